// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Everything runs against the embedded
// reference engine in a scratch directory.

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <thread>

#include "json.hpp"
#include "logibak/api_service.hpp"
#include "logibak/archive_format.hpp"
#include "logibak/backup_engine.hpp"
#include "logibak/fsutil.hpp"
#include "logibak/ref_engine.hpp"
#include "logibak/restore_engine.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/tempdir.hpp"

using namespace logibak;
using namespace logibak::testgen;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// A store, an open session on it and an output directory.
struct Bench {
    TempDir store_dir{"acc-store"};
    TempDir out_dir{"acc-out"};
    std::shared_ptr<refengine::Store> store = refengine::Store::open(store_dir.path());
    refengine::RefEngineAdapter adapter;
    ConnectionSpec spec{Dialect(std::string(kRefEngineDialect)), store_dir.str(), "admin", Secret()};
    Session session{spec.dialect, adapter.open(spec)};
    BackupEngine backups;
    RestoreEngine restores;

    SinkSet sinks() const { return {out_dir.path(), std::nullopt, nullptr}; }

    std::string backup(const std::string& db, BackupMode mode, const std::string& name) {
        BackupRequest req{spec, db, std::move(mode), name};
        return read_file(backups.run(session, req, sinks()).primary_path);
    }

    DatabaseSnapshot everything(const std::string& db) { return store->snapshot(db, select_everything(store->describe(db))); }

    /// Store file bytes of every database.
    std::map<std::string, std::string> image() const {
        std::map<std::string, std::string> out;
        for (const auto& e : std::filesystem::directory_iterator(store_dir.path())) {
            out[e.path().filename().string()] = read_file(e.path());
        }
        return out;
    }
};

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

Outcome round_trip_law() {
    constexpr int kDatabases = 200;
    Bench b;
    std::set<ValueTag> tags_seen;
    std::size_t blobs = 0, fks = 0, rows = 0;
    for (int i = 0; i < kDatabases; ++i) {
        SnapshotGen gen(static_cast<std::uint64_t>(i) * 7919 + 17);
        const auto src = "src" + std::to_string(i);
        const auto original = gen.snapshot(GenLimits{8, 500, 2}, src);
        for (const auto& t : original.tables) {
            fks += t.schema.foreign_keys.size();
            rows += t.rows.size();
            for (const auto& r : t.rows) {
                for (const auto& v : r.values) {
                    tags_seen.insert(v.tag());
                    if (v.tag() == ValueTag::Blob) ++blobs;
                }
            }
        }
        b.store->create_database(src);
        b.store->apply(src, original);
        const auto doc = b.backup(src, FullBackup{}, src);
        const auto dst = "dst" + std::to_string(i);
        b.restores.restore_document(b.session, doc, RestoreMode::FullNew, dst);
        if (!same_content(original, b.everything(dst))) {
            return {false, "database " + std::to_string(i) + " differs after the round trip"};
        }
    }
    if (tags_seen.size() != 7 || blobs == 0 || fks == 0) {
        return {false, "generator missed value tags, blobs or foreign keys"};
    }
    return {true, std::to_string(kDatabases) + " databases, " + std::to_string(rows) + " rows, " +
                      std::to_string(fks) + " foreign keys, all 7 value tags"};
}

Outcome partial_fidelity() {
    Bench b;
    seed_users_db(*b.store, "Users");
    seed_shop_db(*b.store, "Target");
    b.session.drop_contents("Target");
    Selection sel;
    sel.db_name = "Users";
    sel.articles.insert({ArticleKind::Table, "users"});
    sel.record_keys["users"] = {{Value::integer(19)}, {Value::integer(20)}};
    const auto doc = b.backup("Users", PartialBackup{sel}, "two_users");
    b.restores.restore_document(b.session, doc, RestoreMode::PartialExist, "Target");

    const auto got = b.everything("Target");
    const std::vector<Row> expected = {row({Value::integer(19), Value::text("user1"), Value::text("123456")}),
                                       row({Value::integer(20), Value::text("user20"), Value::text("pswrd20")})};
    if (got.tables.size() != 1 || got.tables[0].schema.name != "users") return {false, "unexpected tables"};
    if (!got.definitions.empty()) return {false, "definitions present"};
    if (got.tables[0].rows != expected) return {false, "rows differ"};
    return {true, "rows 19 and 20 only"};
}

Outcome dialect_guard() {
    Bench b;
    seed_shop_db(*b.store);
    DatabaseSnapshot foreign = b.everything("Shop");
    foreign.dialect = Dialect("SQL2008");
    const auto doc = write_archive(foreign);
    if (inspect_archive(doc).dialect != Dialect("SQL2008")) return {false, "header does not read SQL2008"};
    const auto before = b.image();
    for (auto mode : {RestoreMode::PartialExist, RestoreMode::PartialNew, RestoreMode::FullExist, RestoreMode::FullNew,
                      RestoreMode::Merge}) {
        const auto target = creates_database(mode) ? "Fresh" : "Shop";
        const auto code = code_of([&] { b.restores.restore_document(b.session, doc, mode, target); });
        if (code != ErrorCode::DialectMismatch) {
            return {false, std::string(to_string(mode)) + " gave " + std::string(code_string(code))};
        }
    }
    if (b.image() != before) return {false, "store files changed"};
    return {true, "all 5 modes rejected, store files byte-identical"};
}

std::string xml_safe(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else if (c == '"') out += "&quot;";
        else if (static_cast<unsigned char>(c) >= 0x20 || c == '\n') out += c;
    }
    return out;
}

std::string random_xml(SnapshotGen& gen) {
    static const std::vector<std::string> kNames = {"DataBase_Mangment_System", "Contacts", "Row", "Table", "items",
                                                    "x", "DBMS", "Database", "database", "DBMS_Name", "Format_Version"};
    std::function<std::string(int)> element = [&](int depth) {
        const auto& name = gen.pick(kNames);
        std::string out = "<" + name;
        if (gen.coin(0.3)) out += " name=\"" + xml_safe(gen.text(2)) + "\"";
        if (depth > 3 || gen.coin(0.3)) return out + "/>";
        out += ">";
        for (int i = 0, n = gen.uniform(0, 3); i < n; ++i) {
            out += gen.coin(0.4) ? xml_safe(gen.text(3)) : element(depth + 1);
        }
        return out + "</" + name + ">";
    };
    std::string doc = gen.coin() ? "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" : "";
    return doc + element(0);
}

Outcome invalid_file_guard() {
    Bench b;
    seed_shop_db(*b.store);
    const auto before = b.image();
    SnapshotGen gen(2024);
    for (int i = 0; i < 100; ++i) {
        const auto doc = random_xml(gen);
        const auto code = code_of([&] { b.restores.restore_document(b.session, doc, RestoreMode::FullNew, "Junk"); });
        if (code != ErrorCode::NotABackupFile) {
            return {false, "fuzzed document " + std::to_string(i) + " gave " + std::string(code_string(code))};
        }
    }
    const auto valid = b.backup("Shop", FullBackup{}, "shop");
    for (int i = 0; i < 100; ++i) {
        const auto doc = valid.substr(0, valid.size() * static_cast<std::size_t>(i) / 100);
        const auto code = code_of([&] { b.restores.restore_document(b.session, doc, RestoreMode::FullNew, "Cut"); });
        if (code != ErrorCode::MalformedDocument && code != ErrorCode::ChecksumMismatch) {
            return {false, "truncation " + std::to_string(i) + " gave " + std::string(code_string(code))};
        }
    }
    if (b.image() != before) return {false, "store changed"};
    return {true, "100 fuzzed documents and 100 truncations rejected"};
}

Outcome merge_semantics() {
    Bench b;
    b.store->create_database("m");
    const TableSchema a{"A", {{"id", ValueTag::Int64, false, true}, {"v", ValueTag::Text, true, false}}, {}};
    const TableSchema bt{"B", {{"id", ValueTag::Int64, false, true}, {"blob", ValueTag::Blob, true, false}}, {}};
    b.store->create_table("m", a);
    b.store->create_table("m", bt);
    b.store->insert("m", "A", {row({Value::integer(1), Value::text("old")})});
    b.store->insert("m", "B", {row({Value::integer(1), Value::blob(kJpegHeader)}), row({Value::integer(2), Value::null()})});
    Selection only_b;
    only_b.db_name = "m";
    only_b.articles.insert({ArticleKind::Table, "B"});
    only_b.select_all_records.insert("B");
    const auto b_before = write_archive(b.store->snapshot("m", only_b));

    DatabaseSnapshot arch;
    arch.dialect = Dialect(std::string(kRefEngineDialect));
    arch.db_name = "elsewhere";
    const TableSchema a2{"A", {{"id", ValueTag::Int64, false, true}, {"n", ValueTag::Float64, false, false}}, {}};
    arch.tables.push_back({a2, {row({Value::integer(7), Value::real(0.5)})}});
    arch.tables.push_back({{"C", {{"id", ValueTag::Int64, false, true}}, {}}, {row({Value::integer(9)})}});
    const auto doc = write_archive(arch);

    b.restores.restore_document(b.session, doc, RestoreMode::Merge, "m");
    const auto after = b.everything("m");
    std::vector<std::string> names;
    for (const auto& t : after.tables) names.push_back(t.schema.name);
    if (names != std::vector<std::string>{"A", "B", "C"}) return {false, "tables are not {A', B, C}"};
    if (after.find_table("A")->schema != a2 || after.find_table("A")->rows != arch.tables[0].rows) {
        return {false, "A was not replaced in full"};
    }
    if (write_archive(b.store->snapshot("m", only_b)) != b_before) return {false, "B changed"};
    const auto once = b.image();
    b.restores.restore_document(b.session, doc, RestoreMode::Merge, "m");
    if (b.image() != once) return {false, "second merge changed the store"};
    return {true, "{A,B} + {A',C} = {A',B,C}, B byte-identical, idempotent"};
}

Outcome blob_round_trip() {
    Bench b;
    seed_shop_db(*b.store);
    const auto doc = b.backup("Shop", FullBackup{}, "shop");
    const auto at = doc.find("<Photo>");
    if (at == std::string::npos || doc.compare(at + 7, 10, "0xFFD8FFE0") != 0) {
        return {false, "blob text does not begin 0xFFD8FFE0"};
    }
    b.restores.restore_document(b.session, doc, RestoreMode::FullNew, "Copy");
    const auto& t = *b.store->state("Copy")->tables.at("products");
    if (t.rows.at({Value::integer(10)}).values[3].as_blob() != kJpegHeader) return {false, "bytes differ after restore"};
    return {true, "0xFFD8FFE0... restored byte-identically"};
}

Outcome snapshot_consistency() {
    Bench b;
    seed_shop_db(*b.store);
    std::vector<Row> extra;
    for (int i = 0; i < 12; ++i) {
        extra.push_back(row({Value::integer(100 + i), Value::text("u" + std::to_string(i)), Value::text("p")}));
    }
    b.store->insert("Shop", "users", extra);

    enum class Op { Insert, Erase, NewTable, Definition, Rewrite };
    int schedules = 0;
    for (const std::string table : {"users", "orders"}) {
        const std::size_t positions = b.store->state("Shop")->tables.at(table)->rows.size();
        for (std::size_t pos = 0; pos < positions; pos += (table == "users" ? 3 : 1)) {
            for (auto op : {Op::Insert, Op::Erase, Op::NewTable, Op::Definition, Op::Rewrite}) {
                const int id = 9000 + schedules;
                if (op == Op::Erase) {
                    b.store->insert("Shop", "users", {row({Value::integer(id), Value::text("doomed"), Value::text("x")})});
                }
                const auto expected = write_archive(b.everything("Shop"));
                bool fired = false;
                b.store->set_snapshot_probe([&](const std::string& t, std::size_t index) {
                    if (fired || t != table || index != pos) return;
                    fired = true;
                    // the writer is a separate thread; the backup waits for it here
                    std::thread writer([&] {
                        switch (op) {
                        case Op::Insert:
                            b.store->insert("Shop", "users",
                                            {row({Value::integer(id), Value::text("late"), Value::text("x")})});
                            break;
                        case Op::Erase: b.store->erase("Shop", "users", {Value::integer(id)}); break;
                        case Op::NewTable:
                            b.store->create_table("Shop",
                                                  {"t" + std::to_string(id), {{"id", ValueTag::Int64, false, true}}, {}});
                            break;
                        case Op::Definition:
                            b.store->put_definition("Shop", {{ArticleKind::Function, "f" + std::to_string(id)}, "RETURN 1"});
                            break;
                        case Op::Rewrite:
                            b.store->drop_contents("Shop");
                            break;
                        }
                    });
                    writer.join();
                });
                const auto got = b.backup("Shop", FullBackup{}, "s" + std::to_string(schedules));
                b.store->set_snapshot_probe({});
                if (!fired) return {false, "schedule " + std::to_string(schedules) + " never fired"};
                if (got != expected) return {false, "schedule " + std::to_string(schedules) + " saw a later write"};
                if (write_archive(b.everything("Shop")) == expected) {
                    return {false, "schedule " + std::to_string(schedules) + " write did not land"};
                }
                ++schedules;
                if (op == Op::Rewrite) {
                    // put the database back for the next schedule
                    b.store->apply("Shop", read_archive(expected).payload);
                }
            }
        }
    }
    if (schedules < 20) return {false, "only " + std::to_string(schedules) + " schedules"};
    return {true, std::to_string(schedules) + " writer/backup schedules"};
}

Outcome reduction_law() {
    Bench b;
    int checked = 0;
    for (int i = 0; i < 30; ++i) {
        SnapshotGen gen(static_cast<std::uint64_t>(i) + 777);
        const auto db = "r" + std::to_string(i);
        b.store->create_database(db);
        b.store->apply(db, gen.snapshot(GenLimits{6, 80, 2}, db));
        const auto full = b.backups.prepare(b.session, db, FullBackup{});
        const auto partial = b.backups.prepare(b.session, db, PartialBackup{select_everything(b.store->describe(db))});
        if (full.document != partial.document) return {false, "database " + std::to_string(i) + " differs"};
        const auto full_file = b.backup(db, FullBackup{}, db + "_full");
        const auto partial_file = b.backup(db, PartialBackup{select_everything(b.store->describe(db))}, db + "_partial");
        if (full_file != partial_file) return {false, "written archives differ for database " + std::to_string(i)};
        ++checked;
    }
    return {true, std::to_string(checked) + " databases byte-identical"};
}

Outcome api_auth_sweep() {
    TempDir store_dir("acc-api-store"), out_dir("acc-api-out"), stage_dir("acc-api-stage");
    {
        auto store = refengine::Store::open(store_dir.path());
        seed_users_db(*store);
    }
    ApiService::Options opts;
    opts.config.refengine_roots = {store_dir.str()};
    opts.config.primary_dir = out_dir.path();
    opts.config.staging_dir = stage_dir.path();
    opts.users = seed_admin_users();
    auto catalog = std::make_shared<StatementCatalog>(StatementCatalog::load_file(LOGIBAK_DEFAULT_CATALOG));
    auto registry = make_registry(opts.config, catalog);
    ApiService service(std::move(opts), std::move(registry));
    httplib::Server server;
    service.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    struct Stop {
        httplib::Server& s;
        std::thread& t;
        ~Stop() {
            s.stop();
            t.join();
        }
    } stop{server, thread};
    httplib::Client client("127.0.0.1", port);

    int swept = 0;
    for (const auto& route : ApiService::routes()) {
        if (route.path == "/api/login") continue;
        std::string path;
        for (std::size_t i = 0; i < route.path.size(); ++i) {
            if (route.path[i] == '{') {
                i = route.path.find('}', i);
                path += "Users";
            } else {
                path += route.path[i];
            }
        }
        auto r = route.method == "GET" ? client.Get(path) : client.Post(path, "{}", "application/json");
        if (!r || r->status != 401) return {false, route.method + " " + path + " did not answer 401"};
        ++swept;
    }

    auto login = client.Post("/api/login", json{{"username", "user1"}, {"password", "123456"}}.dump(), "application/json");
    if (!login || login->status != 200) return {false, "user1/123456 did not log in"};
    const httplib::Headers auth = {{"Authorization", "Bearer " + json::parse(login->body)["token"].get<std::string>()}};
    const auto conn = json{{"dialect", "RefEngine"}, {"server", store_dir.str()}, {"user", "admin"}, {"password", ""}};
    for (int i = 0; i < 3; ++i) {
        auto t = client.Post("/api/connections/test", auth, conn.dump(), "application/json");
        if (!t || !json::parse(t->body)["ok"].get<bool>()) return {false, "connection test failed"};
    }
    if (service.open_sessions() == 0) return {false, "no adapter session open before logout"};
    auto out = client.Post("/api/logout", auth, "{}", "application/json");
    if (!out || out->status != 200) return {false, "logout failed"};
    const auto counts = json::parse(out->body);
    if (counts["closed"] != counts["opened"] || counts["opened"].get<int>() != 3) {
        return {false, "logout closed " + counts["closed"].dump() + " of " + counts["opened"].dump()};
    }
    if (service.open_sessions() != 0) return {false, "sessions left open after logout"};
    return {true, std::to_string(swept) + " routes answer 401, login ok, logout closed 3 of 3"};
}

}  // namespace

int main() {
    const std::pair<const char*, Outcome (*)()> criteria[] = {
        {"round-trip law", round_trip_law},
        {"partial fidelity", partial_fidelity},
        {"dialect guard", dialect_guard},
        {"invalid-file guard", invalid_file_guard},
        {"merge semantics", merge_semantics},
        {"blob round-trip", blob_round_trip},
        {"snapshot consistency", snapshot_consistency},
        {"reduction law", reduction_law},
        {"API auth sweep", api_auth_sweep},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s: %s (%lld ms)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                    static_cast<long long>(ms));
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
