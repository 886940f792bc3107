// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/restore_engine.hpp"

#include <algorithm>
#include <set>

#include "logibak/error.hpp"
#include "logibak/fsutil.hpp"

namespace fs = std::filesystem;

namespace logibak {

namespace {

constexpr std::pair<RestoreMode, std::string_view> kModeNames[] = {
    {RestoreMode::PartialExist, "partial-exist"}, {RestoreMode::PartialNew, "partial-new"},
    {RestoreMode::FullExist, "full-exist"},       {RestoreMode::FullNew, "full-new"},
    {RestoreMode::Merge, "merge"},
};

constexpr std::size_t kStagedIdBytes = 16;

bool is_staged_id(std::string_view id) {
    return id.size() == kStagedIdBytes * 2 &&
           std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

std::map<ArticleKind, std::size_t> zeroes() {
    std::map<ArticleKind, std::size_t> m;
    for (auto k : kAllArticleKinds) m[k] = 0;
    return m;
}

/// Counts for a clear-and-apply restore, computed against the catalog as it
/// stood before.
void count_replace(RestoreReport& r, const DatabaseSnapshot& before, const std::map<std::string, std::size_t>& rows_before,
                   const DatabaseSnapshot& payload) {
    std::set<std::string> payload_tables;
    for (const auto& t : payload.tables) {
        payload_tables.insert(t.schema.name);
        auto& bucket = before.find_table(t.schema.name) ? r.replaced : r.added;
        bucket[ArticleKind::Table] += 1;
        bucket[ArticleKind::Record] += t.rows.size();
    }
    std::set<ArticleRef> payload_defs;
    for (const auto& d : payload.definitions) {
        payload_defs.insert(d.ref);
        (before.find_definition(d.ref) ? r.replaced : r.added)[d.ref.kind] += 1;
    }
    for (const auto& t : before.tables) {
        auto it = rows_before.find(t.schema.name);
        const auto n = it == rows_before.end() ? 0 : it->second;
        if (payload_tables.contains(t.schema.name)) {
            continue;
        }
        r.removed[ArticleKind::Table] += 1;
        r.removed[ArticleKind::Record] += n;
    }
    for (const auto& d : before.definitions) {
        if (!payload_defs.contains(d.ref)) r.removed[d.ref.kind] += 1;
    }
}

}  // namespace

std::string_view to_string(RestoreMode mode) {
    for (const auto& [m, name] : kModeNames) {
        if (m == mode) return name;
    }
    return "?";
}

std::optional<RestoreMode> parse_restore_mode(std::string_view s) {
    for (const auto& [m, name] : kModeNames) {
        if (name == s) return m;
    }
    return std::nullopt;
}

bool creates_database(RestoreMode mode) noexcept {
    return mode == RestoreMode::PartialNew || mode == RestoreMode::FullNew;
}

// ── staging ─────────────────────────────────────────────────────────

Stager::Stager(fs::path dir) : dir_(std::move(dir)) {}

Stager::Staged Stager::stage(std::string_view bytes) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::StagingWriteFailed, "cannot create staging dir: " + ec.message());
    for (int attempt = 0; attempt < 4; ++attempt) {
        Staged s;
        s.id = random_hex(kStagedIdBytes);
        s.path = dir_ / (s.id + ".xml");
        if (fs::exists(s.path, ec)) continue;
        try {
            write_file_atomic(s.path, bytes);
        } catch (const std::system_error& e) {
            throw Error(ErrorCode::StagingWriteFailed, e.what());
        }
        return s;
    }
    throw Error(ErrorCode::StagingWriteFailed, "could not allocate a staging name");
}

fs::path Stager::path_of(const std::string& id) const {
    std::error_code ec;
    if (is_staged_id(id)) {
        auto p = dir_ / (id + ".xml");
        if (fs::is_regular_file(p, ec)) return p;
    }
    throw Error(ErrorCode::NotFound, "no staged upload with that id");
}

bool Stager::cleanup(const std::string& id) {
    if (!is_staged_id(id)) return false;
    std::error_code ec;
    return fs::remove(dir_ / (id + ".xml"), ec);
}

// ── restore ─────────────────────────────────────────────────────────

std::shared_ptr<std::mutex> RestoreEngine::lock_for(const std::string& db) {
    std::lock_guard lock(locks_mu_);
    auto& m = locks_[db];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

RestoreReport RestoreEngine::restore(Session& session, const Archive& archive, RestoreMode mode,
                                     const std::string& target_db) {
    if (archive.dialect != session.dialect()) {
        throw Error(ErrorCode::DialectMismatch, "archive was written by " + archive.dialect.name() +
                                                    " and cannot be restored into " + session.dialect().name());
    }
    require_identifier(target_db, "target database name");

    const auto guard = lock_for(target_db);
    std::lock_guard lock(*guard);

    RestoreReport r;
    r.mode = mode;
    r.dialect = archive.dialect;
    r.db_name = target_db;
    r.added = r.replaced = r.kept = r.removed = zeroes();

    const auto dbs = session.list_databases();
    const bool exists = std::find(dbs.begin(), dbs.end(), target_db) != dbs.end();
    if (creates_database(mode)) {
        if (exists) throw Error(ErrorCode::DatabaseExists, "database '" + target_db + "' already exists");
        session.create_database(target_db);
        r.created = true;
        session.apply_snapshot(target_db, archive.payload);
        count_replace(r, {}, {}, archive.payload);
        return r;
    }
    if (!exists) throw Error(ErrorCode::UnknownDatabase, "unknown database '" + target_db + "'");

    if (mode == RestoreMode::Merge) {
        auto out = session.merge_snapshot(target_db, archive.payload);
        for (auto k : kAllArticleKinds) {
            r.added[k] = out.added[k];
            r.replaced[k] = out.replaced[k];
            r.kept[k] = out.kept[k];
        }
        return r;
    }

    const auto before = session.describe(target_db);
    std::map<std::string, std::size_t> rows_before;
    {
        Selection all = select_everything(before);
        for (const auto& t : session.snapshot(target_db, all).tables) rows_before[t.schema.name] = t.rows.size();
    }
    r.atomic = session.transactional();
    session.replace_contents(target_db, archive.payload);
    count_replace(r, before, rows_before, archive.payload);
    return r;
}

RestoreReport RestoreEngine::restore_document(Session& session, std::string_view document, RestoreMode mode,
                                              const std::string& target_db) {
    const auto archive = read_archive(document);
    return restore(session, archive, mode, target_db);
}

RestoreReport RestoreEngine::restore_staged(Session& session, Stager& stager, const std::string& staged_id,
                                            RestoreMode mode, const std::string& target_db) {
    struct Cleanup {
        Stager& stager;
        const std::string& id;
        ~Cleanup() { stager.cleanup(id); }
    } cleanup{stager, staged_id};
    const auto path = stager.path_of(staged_id);
    std::string document;
    try {
        document = read_file(path);
    } catch (const std::system_error&) {
        throw Error(ErrorCode::NotFound, "no staged upload with that id");
    }
    return restore_document(session, document, mode, target_db);
}

}  // namespace logibak
