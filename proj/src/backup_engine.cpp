// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/backup_engine.hpp"

#include <curl/curl.h>

#include <cstring>
#include <mutex>
#include <system_error>

#include "logibak/archive_format.hpp"
#include "logibak/error.hpp"
#include "logibak/fsutil.hpp"

namespace fs = std::filesystem;

namespace logibak {

// ── remote sinks ────────────────────────────────────────────────────

std::string redact_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return url;
    const auto auth_begin = scheme_end + 3;
    const auto path_begin = url.find('/', auth_begin);
    const auto at = url.rfind('@', path_begin == std::string::npos ? std::string::npos : path_begin);
    if (at == std::string::npos || at < auth_begin) return url;
    const auto colon = url.find(':', auth_begin);
    if (colon == std::string::npos || colon > at) return url;
    return url.substr(0, colon + 1) + "***" + url.substr(at);
}

namespace {

class FileSink : public RemoteSink {
public:
    explicit FileSink(std::string url) : url_(std::move(url)), dir_(url_.substr(std::strlen("file://"))) {}

    void put(const std::string& name, std::string_view bytes) override {
        std::error_code ec;
        if (!fs::is_directory(dir_, ec)) throw std::runtime_error("remote directory " + dir_.string() + " not found");
        write_file_atomic(dir_ / name, bytes);
    }
    std::string describe() const override { return url_; }

private:
    std::string url_;
    fs::path dir_;
};

void curl_global() {
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

struct ReadCursor {
    std::string_view data;
    std::size_t pos = 0;
};

std::size_t read_cb(char* buf, std::size_t size, std::size_t n, void* userp) {
    auto* c = static_cast<ReadCursor*>(userp);
    const auto len = std::min(size * n, c->data.size() - c->pos);
    std::memcpy(buf, c->data.data() + c->pos, len);
    c->pos += len;
    return len;
}

std::size_t discard_cb(char*, std::size_t size, std::size_t n, void*) { return size * n; }

class CurlSink : public RemoteSink {
public:
    explicit CurlSink(std::string url) : url_(std::move(url)) {
        if (!url_.ends_with('/')) url_ += '/';
        ftp_ = url_.starts_with("ftp://") || url_.starts_with("ftps://");
    }

    void put(const std::string& name, std::string_view bytes) override {
        curl_global();
        std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> h(curl_easy_init(), curl_easy_cleanup);
        if (!h) throw std::runtime_error("cannot initialise libcurl");
        const auto temp = "." + name + ".part";
        const auto target = url_ + (ftp_ ? temp : name);
        ReadCursor cursor{bytes};
        curl_slist* post = nullptr;
        if (ftp_) {
            post = curl_slist_append(post, ("RNFR " + temp).c_str());
            post = curl_slist_append(post, ("RNTO " + name).c_str());
        }
        std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> post_guard(post, curl_slist_free_all);
        char err[CURL_ERROR_SIZE] = {};
        curl_easy_setopt(h.get(), CURLOPT_URL, target.c_str());
        curl_easy_setopt(h.get(), CURLOPT_UPLOAD, 1L);
        curl_easy_setopt(h.get(), CURLOPT_READFUNCTION, read_cb);
        curl_easy_setopt(h.get(), CURLOPT_READDATA, &cursor);
        curl_easy_setopt(h.get(), CURLOPT_INFILESIZE_LARGE, static_cast<curl_off_t>(bytes.size()));
        curl_easy_setopt(h.get(), CURLOPT_WRITEFUNCTION, discard_cb);
        curl_easy_setopt(h.get(), CURLOPT_ERRORBUFFER, err);
        curl_easy_setopt(h.get(), CURLOPT_FAILONERROR, 1L);
        curl_easy_setopt(h.get(), CURLOPT_NOSIGNAL, 1L);
        curl_easy_setopt(h.get(), CURLOPT_CONNECTTIMEOUT, 5L);
        curl_easy_setopt(h.get(), CURLOPT_TIMEOUT, 120L);
        if (ftp_) {
            curl_easy_setopt(h.get(), CURLOPT_POSTQUOTE, post);
            curl_easy_setopt(h.get(), CURLOPT_FTP_CREATE_MISSING_DIRS, static_cast<long>(CURLFTP_CREATE_DIR));
        }
        const auto rc = curl_easy_perform(h.get());
        if (rc != CURLE_OK) throw std::runtime_error(err[0] ? err : curl_easy_strerror(rc));
    }
    std::string describe() const override { return redact_url(url_); }

private:
    std::string url_;
    bool ftp_ = false;
};

}  // namespace

std::unique_ptr<RemoteSink> make_remote_sink(const std::string& url) {
    if (url.starts_with("file://")) return std::make_unique<FileSink>(url);
    for (const char* scheme : {"ftp://", "ftps://", "http://", "https://"}) {
        if (url.starts_with(scheme)) return std::make_unique<CurlSink>(url);
    }
    throw Error(ErrorCode::BadRequest, "unsupported remote sink URL " + redact_url(url));
}

// ── engine ──────────────────────────────────────────────────────────

std::string archive_file_name(const std::string& name) {
    const bool plain = !name.empty() && name != "." && name != ".." && name.find('/') == std::string::npos &&
                       name.find('\\') == std::string::npos && name.find('\0') == std::string::npos &&
                       !name.starts_with('.') && is_valid_utf8(name);
    if (!plain) throw Error(ErrorCode::BadRequest, "archive name must be a plain file name");
    return name.ends_with(".xml") ? name : name + ".xml";
}

BackupEngine::BackupEngine(WallClockSource clock) : clock_(std::move(clock)) {
    if (!clock_) clock_ = [] { return std::chrono::system_clock::now(); };
}

PreparedBackup BackupEngine::prepare(Session& session, const std::string& db_name, const BackupMode& mode) const {
    auto adapter_call = [&](auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            throw Error(ErrorCode::SnapshotFailed, e.render());
        }
    };
    const auto catalog = adapter_call([&] { return session.describe(db_name); });

    PreparedBackup out;
    Selection sel;
    if (const auto* partial = std::get_if<PartialBackup>(&mode)) {
        sel = partial->selection;
        if (sel.db_name.empty()) sel.db_name = db_name;
        const auto report = validate_selection(sel, catalog);
        if (!report.ok()) throw Error(ErrorCode::SelectionInvalid, report.summary());
        out.warnings = report.warnings;
    } else {
        sel = select_everything(catalog);
    }
    out.snapshot = adapter_call([&] { return session.snapshot(db_name, sel); });
    out.document = write_archive(out.snapshot);
    return out;
}

BackupReport BackupEngine::deliver(const PreparedBackup& prepared, const SinkSet& sinks,
                                   const std::optional<std::string>& output_name) const {
    BackupReport r;
    r.dialect = prepared.snapshot.dialect;
    r.db_name = prepared.snapshot.db_name;
    r.counts = article_counts(prepared.snapshot);
    r.bytes = prepared.document.size();
    r.warnings = prepared.warnings;
    r.checksum = inspect_archive(prepared.document).checksum;

    // name choice and the primary write must not interleave with another
    // backup picking the same default name
    static std::mutex naming;
    std::unique_lock naming_lock(naming);
    std::error_code ec;
    if (!fs::is_directory(sinks.primary_dir, ec)) {
        throw Error(ErrorCode::SinkWriteFailed, "primary directory " + sinks.primary_dir.string() + " does not exist");
    }
    r.archive_name = output_name ? archive_file_name(*output_name)
                                 : unique_archive_name(sinks.primary_dir, r.dialect, r.db_name,
                                                       local_wall_clock(clock_()));
    r.primary_path = sinks.primary_dir / r.archive_name;
    try {
        write_file_atomic(r.primary_path, prepared.document);
    } catch (const std::system_error& e) {
        throw Error(ErrorCode::SinkWriteFailed, e.what());
    }
    naming_lock.unlock();

    if (sinks.mirror_dir) {
        try {
            fs::create_directories(*sinks.mirror_dir);
            const auto mirror = *sinks.mirror_dir / r.archive_name;
            write_file_atomic(mirror, prepared.document);
            r.mirror_path = mirror;
        } catch (const std::exception& e) {
            r.warnings.push_back(std::string("mirror copy failed: ") + e.what());
        }
    }

    if (sinks.remote) {
        r.remote_attempted = true;
        r.remote_target = sinks.remote->describe();
        try {
            sinks.remote->put(r.archive_name, prepared.document);
            r.remote_delivered = true;
        } catch (const std::exception& e) {
            r.remote_error = e.what();
        }
    }
    return r;
}

BackupReport BackupEngine::backup_partial(Session& session, const BackupRequest& req, const SinkSet& sinks) const {
    if (!std::holds_alternative<PartialBackup>(req.mode)) {
        throw Error(ErrorCode::SelectionInvalid, "partial backup needs a selection");
    }
    return deliver(prepare(session, req.db_name, req.mode), sinks, req.output_name);
}

BackupReport BackupEngine::backup_full(Session& session, const BackupRequest& req, const SinkSet& sinks) const {
    return deliver(prepare(session, req.db_name, FullBackup{}), sinks, req.output_name);
}

BackupReport BackupEngine::run(Session& session, const BackupRequest& req, const SinkSet& sinks) const {
    return std::holds_alternative<FullBackup>(req.mode) ? backup_full(session, req, sinks)
                                                        : backup_partial(session, req, sinks);
}

}  // namespace logibak
