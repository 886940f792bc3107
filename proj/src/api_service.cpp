// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/api_service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "logibak/fsutil.hpp"
#include "logibak/json_codec.hpp"

namespace fs = std::filesystem;

namespace logibak {

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::AuthFailed:
    case ErrorCode::AuthRequired: return 401;
    case ErrorCode::SelectionInvalid:
    case ErrorCode::IllegalIdentifier:
    case ErrorCode::ParseError:
    case ErrorCode::MissingArgument:
    case ErrorCode::ExtraArgument:
    case ErrorCode::MalformedHex:
    case ErrorCode::BadRequest: return 400;
    case ErrorCode::UnknownDatabase:
    case ErrorCode::UnknownArticle:
    case ErrorCode::NotFound: return 404;
    case ErrorCode::DatabaseExists:
    case ErrorCode::ConstraintViolation:
    case ErrorCode::SessionClosed:
    case ErrorCode::NoConnection: return 409;
    case ErrorCode::NotABackupFile:
    case ErrorCode::MalformedDocument:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::DialectMismatch: return 422;
    case ErrorCode::SnapshotFailed: return 502;
    case ErrorCode::AdapterUnavailable: return 503;
    case ErrorCode::DuplicateKey:
    case ErrorCode::MissingStatement:
    case ErrorCode::StoreCorrupt:
    case ErrorCode::SinkWriteFailed:
    case ErrorCode::StagingWriteFailed:
    case ErrorCode::Internal: return 500;
    }
    return 500;
}

const std::vector<Route>& ApiService::routes() {
    static const std::vector<Route> kRoutes = {
        {"POST", "/api/login"},
        {"POST", "/api/logout"},
        {"GET", "/api/dialects"},
        {"GET", "/api/servers"},
        {"POST", "/api/connections/test"},
        {"GET", "/api/databases"},
        {"GET", "/api/databases/{db}/articles"},
        {"GET", "/api/databases/{db}/tables/{table}/rows"},
        {"POST", "/api/backup"},
        {"GET", "/api/archives"},
        {"GET", "/api/archives/{name}"},
        {"POST", "/api/restore/upload"},
        {"POST", "/api/restore"},
    };
    return kRoutes;
}

struct ApiService::Login {
    explicit Login(const AdapterRegistry& registry) : connections(registry) {}

    std::int64_t user_id = 0;
    ConnectionManager connections;

    std::mutex mu;
    std::chrono::steady_clock::time_point last_seen;
    std::optional<Session> active;
    ConnectionSpec spec;
    std::size_t closed_early = 0;

    /// The bound session, or NoConnection.
    std::pair<Session, ConnectionSpec> bound() {
        std::lock_guard lock(mu);
        if (!active || !active->is_open()) {
            throw Error(ErrorCode::NoConnection, "no database connection; test a connection first");
        }
        return {*active, spec};
    }
};

namespace {

using httplib::Request;
using httplib::Response;

void send_json(Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, ErrorCode code, const std::string& message) {
    if (http_status(code) == 401) res.set_header("WWW-Authenticate", "Bearer");
    send_json(res, http_status(code), {{"code", code_string(code)}, {"message", message}});
}

/// Runs `fn` and turns whatever it throws into a {code, message} reply.
template <typename F>
void replying(Response& res, F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
        send_error(res, ErrorCode::BadRequest, e.what());
    } catch (const std::exception&) {
        send_error(res, ErrorCode::Internal, "internal error");
    }
}

json body_of(const Request& req) {
    json body;
    try {
        body = json::parse(req.body);
    } catch (const json::parse_error&) {
        throw Error(ErrorCode::BadRequest, "request body must be JSON");
    }
    if (!body.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return body;
}

std::string string_field(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string()) {
        throw Error(ErrorCode::BadRequest, std::string("'") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return std::nullopt;
    return string_field(body, key);
}

Dialect dialect_field(const std::string& name) {
    if (!Dialect::is_valid_name(name)) throw Error(ErrorCode::BadRequest, "bad dialect name '" + name + "'");
    return Dialect(name);
}

std::string header_safe(std::string s) {
    for (auto& c : s) {
        if (c == '"' || c == '\\' || static_cast<unsigned char>(c) < 0x20) c = '_';
    }
    return s;
}

/// httplib regex for a route path with `{name}` parameters.
std::string route_pattern(const std::string& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] == '{') {
            i = path.find('}', i);
            out += "([^/]+)";
        } else {
            out += path[i];
        }
    }
    return out;
}

}  // namespace

ApiService::ApiService(Options options, AdapterRegistry registry)
    : opts_(std::move(options)),
      registry_(std::move(registry)),
      backups_(opts_.wall_clock),
      stager_(opts_.config.staging_dir),
      server_(std::make_unique<httplib::Server>()) {
    if (!opts_.clock) opts_.clock = [] { return std::chrono::steady_clock::now(); };
    if (opts_.config.remote_url) remote_ = make_remote_sink(*opts_.config.remote_url);
}

ApiService::~ApiService() {
    stop();
    std::lock_guard lock(mu_);
    for (auto& [_, login] : logins_) login->connections.disconnect_all();
}

SinkSet ApiService::sinks() const { return {opts_.config.primary_dir, opts_.config.mirror_dir, remote_}; }

std::size_t ApiService::live_logins() const {
    std::lock_guard lock(mu_);
    return logins_.size();
}

std::size_t ApiService::open_sessions() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [_, login] : logins_) n += login->connections.open_count();
    return n;
}

std::shared_ptr<ApiService::Login> ApiService::authorize(const std::string& header) {
    constexpr std::string_view kBearer = "Bearer ";
    if (!header.starts_with(kBearer)) throw Error(ErrorCode::AuthRequired, "missing bearer token");
    const auto token = header.substr(kBearer.size());

    const auto now = opts_.clock();
    std::vector<std::shared_ptr<Login>> expired;
    std::shared_ptr<Login> found;
    {
        std::lock_guard lock(mu_);
        for (auto it = logins_.begin(); it != logins_.end();) {
            std::lock_guard login_lock(it->second->mu);
            if (now - it->second->last_seen >= opts_.config.session_idle) {
                expired.push_back(it->second);
                it = logins_.erase(it);
            } else {
                ++it;
            }
        }
        if (auto it = logins_.find(token); it != logins_.end()) {
            found = it->second;
            std::lock_guard login_lock(found->mu);
            found->last_seen = now;
        }
    }
    for (auto& login : expired) login->connections.disconnect_all();
    if (!found) throw Error(ErrorCode::AuthRequired, "session expired or unknown; log in again");
    return found;
}

void ApiService::mount(httplib::Server& server) {
    using Handler = std::function<void(const Request&, Response&, Login&)>;
    auto guarded = [this](Handler h) {
        return [this, h = std::move(h)](const Request& req, Response& res) {
            replying(res, [&] {
                auto login = authorize(req.get_header_value("Authorization"));
                h(req, res, *login);
            });
        };
    };

    server.Post("/api/login", [this](const Request& req, Response& res) {
        replying(res, [&] {
            const auto body = body_of(req);
            const auto user = opts_.users.authenticate(string_field(body, "username"), string_field(body, "password"));
            if (!user) throw Error(ErrorCode::AuthFailed, "wrong user name or password");
            auto login = std::make_shared<Login>(registry_);
            login->user_id = *user;
            login->last_seen = opts_.clock();
            const auto token = random_hex(16);
            {
                std::lock_guard lock(mu_);
                logins_[token] = login;
            }
            const auto idle = std::chrono::duration_cast<std::chrono::seconds>(opts_.config.session_idle).count();
            send_json(res, 200, {{"token", token}, {"user_id", *user}, {"idle_timeout_s", idle}});
        });
    });

    server.Post("/api/logout", [this](const Request& req, Response& res) {
        replying(res, [&] {
            const auto header = req.get_header_value("Authorization");
            auto login = authorize(header);
            {
                std::lock_guard lock(mu_);
                logins_.erase(header.substr(std::string_view("Bearer ").size()));
            }
            std::size_t early;
            {
                std::lock_guard lock(login->mu);
                early = login->closed_early;
                login->active.reset();
            }
            const auto closed = early + login->connections.disconnect_all();
            send_json(res, 200, {{"opened", login->connections.opened_total()}, {"closed", closed}});
        });
    });

    server.Get("/api/dialects", guarded([this](const Request&, Response& res, Login&) {
        json names = json::array();
        for (const auto& d : registry_.dialects()) names.push_back(d.name());
        send_json(res, 200, {{"dialects", names}});
    }));

    server.Get("/api/servers", guarded([this](const Request& req, Response& res, Login&) {
        if (!req.has_param("dialect")) throw Error(ErrorCode::BadRequest, "'dialect' query parameter is required");
        const auto dialect = dialect_field(req.get_param_value("dialect"));
        send_json(res, 200, {{"dialect", dialect.name()}, {"servers", registry_.list_servers(dialect)}});
    }));

    server.Post("/api/connections/test", guarded([this](const Request& req, Response& res, Login& login) {
        const auto body = body_of(req);
        ConnectionSpec spec{dialect_field(string_field(body, "dialect")), string_field(body, "server"),
                            string_field(body, "user"), Secret(string_field(body, "password"))};
        auto result = registry_.test_connection(spec);
        if (result.ok) {
            try {
                auto session = login.connections.open(spec);
                std::lock_guard lock(login.mu);
                if (login.active && login.active->close()) ++login.closed_early;
                login.active = session;
                login.spec = spec;
            } catch (const Error& e) {
                result = ConnectionResult::failure(e.what());
            }
        }
        json out = {{"ok", result.ok}, {"connection", spec.describe()}};
        if (!result.ok) out["reason"] = result.reason;
        send_json(res, 200, out);
    }));

    server.Get("/api/databases", guarded([](const Request&, Response& res, Login& login) {
        auto [session, spec] = login.bound();
        send_json(res, 200, {{"connection", spec.describe()}, {"databases", session.list_databases()}});
    }));

    server.Get(route_pattern("/api/databases/{db}/articles"),
               guarded([](const Request& req, Response& res, Login& login) {
                   auto [session, _] = login.bound();
                   send_json(res, 200, articles_json(session.describe(req.matches[1].str())));
               }));

    server.Get(route_pattern("/api/databases/{db}/tables/{table}/rows"),
               guarded([](const Request& req, Response& res, Login& login) {
                   const auto db = req.matches[1].str();
                   const auto table = req.matches[2].str();
                   const auto param = req.get_param_value("keys_only");
                   if (!param.empty() && param != "true" && param != "false") {
                       throw Error(ErrorCode::BadRequest, "keys_only must be true or false");
                   }
                   const bool keys_only = param == "true";

                   auto [session, _] = login.bound();
                   const auto catalog = session.describe(db);
                   if (!catalog.find_table(table)) {
                       throw Error(ErrorCode::UnknownArticle, "no table '" + table + "' in '" + db + "'");
                   }
                   Selection sel;
                   sel.db_name = db;
                   sel.articles.insert({ArticleKind::Table, table});
                   sel.select_all_records.insert(table);
                   const auto snap = session.snapshot(db, sel);
                   const auto& data = *snap.find_table(table);
                   const auto keys = data.schema.key_indices();
                   json rows = json::array();
                   for (const auto& r : data.rows) {
                       json cells = json::array();
                       if (keys_only) {
                           for (auto i : keys) cells.push_back(value_json(r.values[i]));
                       } else {
                           for (const auto& v : r.values) cells.push_back(value_json(v));
                       }
                       rows.push_back(std::move(cells));
                   }
                   send_json(res, 200, {{"schema", schema_json(data.schema)}, {"keys_only", keys_only}, {"rows", rows}});
               }));

    server.Post("/api/backup", guarded([this](const Request& req, Response& res, Login& login) {
        const auto body = body_of(req);
        const auto db = string_field(body, "db");
        const auto full_it = body.find("full");
        if (full_it != body.end() && !full_it->is_boolean()) throw Error(ErrorCode::BadRequest, "'full' must be a boolean");
        const bool full = full_it != body.end() && full_it->get<bool>();
        auto [session, spec] = login.bound();

        BackupRequest request{spec, db, FullBackup{}, optional_string(body, "output_name")};
        if (!full) {
            const auto sel = body.find("selection");
            if (sel == body.end()) throw Error(ErrorCode::BadRequest, "partial backup needs 'selection'");
            request.mode = PartialBackup{selection_from_json(*sel, session.describe(db))};
        } else if (body.contains("selection")) {
            throw Error(ErrorCode::BadRequest, "a full backup takes no 'selection'");
        }
        send_json(res, 200, report_json(backups_.run(session, request, sinks())));
    }));

    server.Get("/api/archives", guarded([this](const Request&, Response& res, Login&) {
        std::vector<std::pair<std::string, std::uintmax_t>> found;
        std::error_code ec;
        for (const auto& e : fs::directory_iterator(opts_.config.primary_dir, ec)) {
            const auto name = e.path().filename().string();
            if (e.is_regular_file(ec) && e.path().extension() == ".xml" && !name.starts_with('.')) {
                found.emplace_back(name, e.file_size(ec));
            }
        }
        std::sort(found.begin(), found.end());
        json list = json::array();
        for (const auto& [name, bytes] : found) list.push_back({{"name", name}, {"bytes", bytes}});
        send_json(res, 200, {{"archives", list}});
    }));

    server.Get(route_pattern("/api/archives/{name}"), guarded([this](const Request& req, Response& res, Login&) {
        const auto name = archive_file_name(req.matches[1].str());
        const auto path = opts_.config.primary_dir / name;
        std::error_code ec;
        if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::NotFound, "no archive named '" + name + "'");
        res.set_content(read_file(path), "application/xml");
        res.set_header("Content-Disposition", "attachment; filename=\"" + header_safe(name) + "\"");
    }));

    server.Post("/api/restore/upload", guarded([this](const Request& req, Response& res, Login&) {
        if (!req.is_multipart_form_data() || !req.has_file("file")) {
            throw Error(ErrorCode::BadRequest, "expected a multipart upload with a 'file' part");
        }
        const auto file = req.get_file_value("file");
        const auto staged = stager_.stage(file.content);
        send_json(res, 200, {{"staged", staged.id}, {"bytes", file.content.size()}});
    }));

    server.Post("/api/restore", guarded([this](const Request& req, Response& res, Login& login) {
        const auto body = body_of(req);
        const auto staged = optional_string(body, "staged");
        // a staged upload is consumed by this request whatever happens
        struct Cleanup {
            Stager& stager;
            const std::optional<std::string>& id;
            ~Cleanup() {
                if (id) stager.cleanup(*id);
            }
        } cleanup{stager_, staged};

        const auto archive = optional_string(body, "archive");
        if (staged.has_value() == archive.has_value()) {
            throw Error(ErrorCode::BadRequest, "give exactly one of 'staged' and 'archive'");
        }
        const auto mode_name = string_field(body, "mode");
        const auto mode = parse_restore_mode(mode_name);
        if (!mode) throw Error(ErrorCode::BadRequest, "unknown restore mode '" + mode_name + "'");
        const auto db = string_field(body, "db");
        auto [session, _] = login.bound();

        RestoreReport report;
        if (staged) {
            report = restores_.restore_staged(session, stager_, *staged, *mode, db);
        } else {
            const auto path = opts_.config.primary_dir / archive_file_name(*archive);
            std::error_code ec;
            if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::NotFound, "no archive named '" + *archive + "'");
            report = restores_.restore_document(session, read_file(path), *mode, db);
        }
        send_json(res, 200, report_json(report));
    }));

    if (opts_.config.static_dir) server.set_mount_point("/", opts_.config.static_dir->string());
}

void ApiService::serve() {
    const auto& addr = opts_.config.bind_addr;
    const auto colon = addr.rfind(':');
    int port = -1;
    if (colon != std::string::npos) {
        const auto digits = addr.substr(colon + 1);
        auto r = std::from_chars(digits.data(), digits.data() + digits.size(), port);
        if (r.ec != std::errc() || r.ptr != digits.data() + digits.size() || port < 0 || port > 65535) port = -1;
    }
    if (port < 0) throw Error(ErrorCode::BadRequest, "http.bind_addr must be host:port, got '" + addr + "'");
    auto host = addr.substr(0, colon);
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);

    std::error_code ec;
    fs::create_directories(opts_.config.primary_dir, ec);
    mount(*server_);
    server_->set_logger([](const Request& req, const Response& res) {
        std::fprintf(stderr, "%s %s %d\n", req.method.c_str(), req.path.c_str(), res.status);
    });
    if (port == 0) {
        port = server_->bind_to_any_port(host);
        if (port < 0) throw Error(ErrorCode::Internal, "cannot listen on " + addr);
    } else if (!server_->bind_to_port(host, port)) {
        throw Error(ErrorCode::Internal, "cannot listen on " + addr);
    }
    std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), port);
    server_->listen_after_bind();
}

void ApiService::stop() {
    if (server_) server_->stop();
}

}  // namespace logibak
