// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <pthread.h>
#include <unistd.h>

#include <csignal>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "logibak/api_service.hpp"
#include "logibak/archive_format.hpp"
#include "logibak/backup_engine.hpp"
#include "logibak/config.hpp"
#include "logibak/fsutil.hpp"
#include "logibak/restore_engine.hpp"

namespace fs = std::filesystem;

namespace logibak::cli {

namespace {

[[noreturn]] void bad_arg(const std::string& msg) { throw Error(ErrorCode::BadRequest, msg); }

/// Splits `s` on `sep` outside parentheses, honouring backslash escapes.
/// Escapes are kept so a second pass can split again.
std::vector<std::string> split_top(std::string_view s, char sep) {
    std::vector<std::string> out(1);
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '\\') {
            if (i + 1 == s.size()) bad_arg("dangling backslash in '" + std::string(s) + "'");
            out.back() += c;
            out.back() += s[++i];
            continue;
        }
        if (c == '(') ++depth;
        if (c == ')' && --depth < 0) bad_arg("unbalanced ')' in '" + std::string(s) + "'");
        if (c == sep && depth == 0) {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    if (depth != 0) bad_arg("unbalanced '(' in '" + std::string(s) + "'");
    return out;
}

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\') ++i;
        out += s[i];
    }
    return out;
}

bool has_unescaped(std::string_view s, std::string_view chars) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\') {
            ++i;
        } else if (chars.find(s[i]) != std::string_view::npos) {
            return true;
        }
    }
    return false;
}

struct Connection {
    std::string dialect = std::string(kRefEngineDialect);
    std::string server;
    std::string user;
    std::string password_env = "LOGIBAK_PASSWORD";

    ConnectionSpec spec() const {
        const char* pw = std::getenv(password_env.c_str());
        if (!Dialect::is_valid_name(dialect)) bad_arg("bad dialect name '" + dialect + "'");
        return {Dialect(dialect), server, user, Secret(pw ? pw : "")};
    }
};

void add_connection_options(CLI::App& cmd, Connection& c) {
    cmd.add_option("--dialect", c.dialect, "DBMS dialect")->capture_default_str();
    cmd.add_option("--server", c.server, "server (a store directory for RefEngine)")->required();
    cmd.add_option("--user", c.user, "login name");
    cmd.add_option("--password-env", c.password_env, "environment variable holding the password")
        ->capture_default_str();
}

Config load_config(const std::string& file) { return file.empty() ? Config::defaults() : Config::load(file); }

std::shared_ptr<const StatementCatalog> load_catalog(const Config& config) {
    return std::make_shared<StatementCatalog>(StatementCatalog::load_file(config.catalog_file.string()));
}

void print_counts(std::ostream& out, const std::string& label, const std::map<ArticleKind, std::size_t>& counts) {
    for (auto k : kAllArticleKinds) {
        auto it = counts.find(k);
        out << std::left << std::setw(24) << (label + std::string(to_string(k))) << ' '
            << (it == counts.end() ? 0 : it->second) << '\n';
    }
}

void print_row(std::ostream& out, std::string_view key, const std::string& value) {
    out << std::left << std::setw(24) << key << ' ' << value << '\n';
}

bool colour_ok(std::ostream& err) {
    return &err == &std::cerr && std::getenv("NO_COLOR") == nullptr && isatty(STDERR_FILENO);
}

void report_error(std::ostream& err, ErrorCode code, const std::string& message) {
    if (colour_ok(err)) {
        err << "\x1b[31m" << code_string(code) << "\x1b[0m: " << message << '\n';
    } else {
        err << code_string(code) << ": " << message << '\n';
    }
}

/// Blocks until SIGINT or SIGTERM, then stops `service`.
int serve_until_signalled(ApiService& service) {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        service.stop();
    });
    try {
        service.serve();
    } catch (...) {
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
        throw;
    }
    pthread_kill(waiter.native_handle(), SIGTERM);  // no-op wake if already signalled
    waiter.join();
    return 0;
}

}  // namespace

TableArg parse_table_arg(std::string_view arg) {
    TableArg out;
    const auto colon = arg.find(':');
    out.table = std::string(arg.substr(0, colon));
    if (!is_identifier(out.table)) bad_arg("bad table name in '" + std::string(arg) + "'");
    if (colon == std::string_view::npos) return out;
    out.all_records = false;
    const auto list = arg.substr(colon + 1);
    if (list.empty()) return out;
    for (const auto& item : split_top(list, ',')) {
        if (item.empty()) bad_arg("empty key in '" + std::string(arg) + "'");
        std::vector<std::string> tuple;
        if (item.front() == '(') {
            if (item.back() != ')' || item.size() < 2) bad_arg("bad composite key '" + item + "'");
            const auto inner = std::string_view(item).substr(1, item.size() - 2);
            for (const auto& part : split_top(inner, '|')) {
                if (has_unescaped(part, "()")) bad_arg("nested parentheses in '" + item + "'");
                tuple.push_back(unescape(part));
            }
        } else {
            if (has_unescaped(item, "()|")) bad_arg("bad key '" + item + "'; wrap composite keys as (a|b)");
            tuple.push_back(unescape(item));
        }
        out.keys.push_back(std::move(tuple));
    }
    return out;
}

void add_tables(Selection& sel, const std::vector<TableArg>& args, const DatabaseSnapshot& catalog) {
    for (const auto& a : args) {
        sel.articles.insert({ArticleKind::Table, a.table});
        if (a.all_records) {
            sel.select_all_records.insert(a.table);
            continue;
        }
        if (a.keys.empty()) continue;
        const auto* t = catalog.find_table(a.table);
        if (!t) throw Error(ErrorCode::SelectionInvalid, "no table '" + a.table + "' in '" + catalog.db_name + "'");
        const auto idx = t->schema.key_indices();
        auto& keys = sel.record_keys[a.table];
        for (const auto& k : a.keys) {
            if (k.size() != idx.size()) {
                throw Error(ErrorCode::SelectionInvalid, "keys of '" + a.table + "' have " +
                                                             std::to_string(idx.size()) + " part(s)");
            }
            KeyTuple key;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const auto& col = t->schema.columns[idx[i]];
                auto v = decode_value(col.type, k[i]);
                if (!v) {
                    throw Error(ErrorCode::SelectionInvalid,
                                "'" + k[i] + "' is not a " + std::string(to_string(col.type)) + " for '" + col.name + "'");
                }
                key.push_back(*std::move(v));
            }
            keys.insert(std::move(key));
        }
    }
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::AdapterUnavailable:
    case ErrorCode::MissingStatement:
    case ErrorCode::StoreCorrupt:
    case ErrorCode::SnapshotFailed:
    case ErrorCode::SinkWriteFailed:
    case ErrorCode::StagingWriteFailed:
    case ErrorCode::Internal: return 1;
    default: return 2;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Selective logical backup and restore", "logibak"};
    app.require_subcommand(1);
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file");

    // backup
    auto* backup = app.add_subcommand("backup", "write an archive of a database");
    Connection backup_conn;
    add_connection_options(*backup, backup_conn);
    std::string backup_db;
    std::vector<std::string> tables, views, procs, funcs, triggers;
    bool full = false;
    std::string out_file;
    backup->add_option("--db", backup_db, "database")->required();
    backup->add_option("--table", tables, "T, T:k1,k2, T: or T:(a|b),(c|d)");
    backup->add_option("--view", views, "view to include");
    backup->add_option("--proc", procs, "stored procedure to include");
    backup->add_option("--func", funcs, "function to include");
    backup->add_option("--trigger", triggers, "trigger to include");
    auto* full_flag = backup->add_flag("--full", full, "every article and record");
    for (auto* o : {"--table", "--view", "--proc", "--func", "--trigger"}) backup->get_option(o)->excludes(full_flag);
    backup->add_option("--out", out_file, "archive path (default: a dated name in the primary dir)");

    // restore
    auto* restore = app.add_subcommand("restore", "restore an archive");
    Connection restore_conn;
    add_connection_options(*restore, restore_conn);
    std::string mode_name, archive_file, restore_db;
    restore->add_option("--mode", mode_name, "partial-exist|partial-new|full-exist|full-new|merge")->required();
    restore->add_option("--archive", archive_file, "archive file")->required();
    restore->add_option("--db", restore_db, "target database")->required();

    // inspect / validate
    auto* inspect = app.add_subcommand("inspect", "print an archive's header, counts and checksum status");
    std::string inspect_file;
    inspect->add_option("--archive", inspect_file, "archive file")->required();
    auto* validate = app.add_subcommand("validate", "exit 0 iff the archive reads cleanly");
    std::string validate_file;
    validate->add_option("--archive", validate_file, "archive file")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP service");

    // useradd
    auto* useradd = app.add_subcommand("useradd", "add a service administrator");
    std::string users_file, username, password_env = "LOGIBAK_NEW_PASSWORD";
    std::int64_t user_id = 0;
    useradd->add_option("--users-file", users_file, "users file (created if missing)")->required();
    useradd->add_option("--id", user_id, "numeric user id")->required();
    useradd->add_option("--username", username, "login name")->required();
    useradd->add_option("--password-env", password_env, "environment variable holding the password")
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        report_error(err, ErrorCode::BadRequest, e.what());
        return 2;
    }

    try {
        if (*inspect) {
            const auto info = inspect_archive(read_file(inspect_file));
            out << "dialect=" << info.dialect.name() << '\n'
                << "format_version=" << info.format_version << '\n'
                << "db=" << info.db_name << '\n'
                << "checksum=" << info.checksum << '\n'
                << "checksum_status=" << (info.checksum_ok ? "ok" : "MISMATCH") << '\n';
            for (auto k : kAllArticleKinds) {
                auto it = info.counts.find(k);
                out << "count." << to_string(k) << '=' << (it == info.counts.end() ? 0 : it->second) << '\n';
            }
            return info.checksum_ok ? 0 : exit_code(ErrorCode::ChecksumMismatch);
        }
        if (*validate) {
            const auto archive = read_archive(read_file(validate_file));
            out << "ok " << archive.dialect.name() << ' ' << archive.db_name << '\n';
            return 0;
        }
        if (*useradd) {
            const char* pw = std::getenv(password_env.c_str());
            if (!pw || !*pw) throw Error(ErrorCode::MissingArgument, "set " + password_env + " to the new password");
            UserStore users = fs::exists(users_file) ? UserStore::load(users_file) : UserStore{};
            users.add_user(user_id, username, pw);
            users.save(users_file);
            out << "added " << username << '\n';
            return 0;
        }

        const auto config = load_config(config_file);
        auto registry = make_registry(config, load_catalog(config));

        if (*serve) {
            if (!config.users_file) throw Error(ErrorCode::MissingArgument, "auth.users_file is not configured");
            ApiService::Options opts;
            opts.config = config;
            opts.users = UserStore::load(*config.users_file);
            ApiService service(std::move(opts), std::move(registry));
            return serve_until_signalled(service);
        }

        ConnectionManager connections(registry);
        if (*backup) {
            const auto spec = backup_conn.spec();
            auto session = connections.open(spec);
            BackupRequest req{spec, backup_db, FullBackup{}, std::nullopt};
            if (!full) {
                Selection sel;
                sel.db_name = backup_db;
                std::vector<TableArg> parsed;
                for (const auto& t : tables) parsed.push_back(parse_table_arg(t));
                add_tables(sel, parsed, session.describe(backup_db));
                const std::pair<ArticleKind, const std::vector<std::string>*> defs[] = {
                    {ArticleKind::View, &views},
                    {ArticleKind::StoredProcedure, &procs},
                    {ArticleKind::Function, &funcs},
                    {ArticleKind::Trigger, &triggers}};
                for (const auto& [kind, names] : defs) {
                    for (const auto& n : *names) sel.articles.insert({kind, n});
                }
                req.mode = PartialBackup{sel};
            }
            SinkSet sinks{config.primary_dir, config.mirror_dir, nullptr};
            if (!out_file.empty()) {
                const fs::path p(out_file);
                sinks.primary_dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
                req.output_name = p.filename().string();
            }
            if (config.remote_url) sinks.remote = make_remote_sink(*config.remote_url);
            const auto r = BackupEngine().run(session, req, sinks);
            print_row(out, "archive", r.archive_name);
            print_row(out, "path", r.primary_path.string());
            if (r.mirror_path) print_row(out, "mirror", r.mirror_path->string());
            print_row(out, "checksum", r.checksum);
            print_row(out, "bytes", std::to_string(r.bytes));
            if (r.remote_attempted) {
                print_row(out, "remote", r.remote_target + (r.remote_delivered ? " delivered" : " FAILED: " + r.remote_error));
            }
            print_counts(out, "", r.counts);
            for (const auto& w : r.warnings) err << "warning: " << w << '\n';
            return 0;
        }
        if (*restore) {
            const auto mode = parse_restore_mode(mode_name);
            if (!mode) bad_arg("unknown restore mode '" + mode_name + "'");
            const auto document = read_file(archive_file);
            auto session = connections.open(restore_conn.spec());
            const auto r = RestoreEngine().restore_document(session, document, *mode, restore_db);
            print_row(out, "mode", std::string(to_string(r.mode)));
            print_row(out, "db", r.db_name);
            print_row(out, "created", r.created ? "yes" : "no");
            print_row(out, "atomic", r.atomic ? "yes" : "no");
            print_counts(out, "added.", r.added);
            print_counts(out, "replaced.", r.replaced);
            print_counts(out, "kept.", r.kept);
            print_counts(out, "removed.", r.removed);
            return 0;
        }
    } catch (const Error& e) {
        report_error(err, e.code(), e.what());
        return exit_code(e.code());
    } catch (const std::system_error& e) {
        report_error(err, ErrorCode::NotFound, e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error(err, ErrorCode::Internal, e.what());
        return 1;
    }
    return 0;
}

}  // namespace logibak::cli
