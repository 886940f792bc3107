// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>
#include <httplib.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "logibak/api_service.hpp"
#include "logibak/archive_format.hpp"
#include "logibak/json_codec.hpp"
#include "logibak/ref_engine.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

using namespace logibak;
using namespace logibak::testgen;

namespace {

struct ToolResult {
    int exit = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

/// Runs the installed binary through the shell, capturing both streams.
ToolResult tool(const std::vector<std::string>& args, const std::string& env = "NO_COLOR=1") {
    TempDir scratch("cli-err");
    const auto err_file = scratch / "stderr";
    std::string cmd = env + " " + quote(LOGIBAK_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>" + quote(err_file.string());
    ToolResult r;
    FILE* p = popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_file(err_file);
    return r;
}

ToolResult in_process(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    ToolResult r;
    r.exit = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        store = refengine::Store::open(store_dir.path());
        seed_users_db(*store);
        seed_shop_db(*store);
    }

    /// Drops the cached handle so changes made by the child process show.
    std::shared_ptr<refengine::Store> reopen() {
        store.reset();
        store = refengine::Store::open(store_dir.path());
        return store;
    }

    std::vector<std::string> conn() const { return {"--server", store_dir.str(), "--user", "admin"}; }

    std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) const {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }

    TempDir store_dir{"cli-store"};
    TempDir out_dir{"cli-out"};
    std::shared_ptr<refengine::Store> store;
};

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

}  // namespace

TEST(TableArg, Forms) {
    auto all = cli::parse_table_arg("users");
    EXPECT_EQ(all.table, "users");
    EXPECT_TRUE(all.all_records);

    auto schema_only = cli::parse_table_arg("users:");
    EXPECT_FALSE(schema_only.all_records);
    EXPECT_TRUE(schema_only.keys.empty());

    auto simple = cli::parse_table_arg("users:1,2");
    EXPECT_EQ(simple.keys, (std::vector<std::vector<std::string>>{{"1"}, {"2"}}));

    auto composite = cli::parse_table_arg("t:(a|b),(c|d)");
    EXPECT_EQ(composite.keys, (std::vector<std::vector<std::string>>{{"a", "b"}, {"c", "d"}}));

    auto escaped = cli::parse_table_arg(R"(t:a\,b,(x\|y|z\)))");
    EXPECT_EQ(escaped.keys, (std::vector<std::vector<std::string>>{{"a,b"}, {"x|y", "z)"}}));
}

TEST(TableArg, RejectsMalformed) {
    for (const char* bad : {"t:(a|b", "t:a|b", "t:a)", "bad name:1", "t:1,,2", ":1", "t:(a|(b))", "t:a\\"}) {
        EXPECT_EQ(code_of([&] { cli::parse_table_arg(bad); }), ErrorCode::BadRequest) << bad;
    }
}

TEST(TableArg, KeysAreTypedAgainstTheCatalog) {
    DatabaseSnapshot catalog;
    catalog.db_name = "Users";
    catalog.tables.push_back({users_table_schema(), {}});
    Selection sel;
    cli::add_tables(sel, {cli::parse_table_arg("users:19,20")}, catalog);
    EXPECT_EQ(sel.record_keys.at("users"), (std::set<KeyTuple>{{Value::integer(19)}, {Value::integer(20)}}));
    EXPECT_TRUE(sel.select_all_records.empty());

    Selection bad;
    EXPECT_EQ(code_of([&] { cli::add_tables(bad, {cli::parse_table_arg("users:x")}, catalog); }),
              ErrorCode::SelectionInvalid);
    EXPECT_EQ(code_of([&] { cli::add_tables(bad, {cli::parse_table_arg("users:(1|2)")}, catalog); }),
              ErrorCode::SelectionInvalid);
}

TEST(ExitCodes, GuardsAreTwoInternalsAreOne) {
    EXPECT_EQ(cli::exit_code(ErrorCode::DialectMismatch), 2);
    EXPECT_EQ(cli::exit_code(ErrorCode::NotABackupFile), 2);
    EXPECT_EQ(cli::exit_code(ErrorCode::SelectionInvalid), 2);
    EXPECT_EQ(cli::exit_code(ErrorCode::Internal), 1);
    EXPECT_EQ(cli::exit_code(ErrorCode::SinkWriteFailed), 1);
}

TEST_F(CliTest, FullBackupThenFullNewRoundTrips) {
    const auto archive = (out_dir / "shop.xml").string();
    auto b = tool(with({"backup", "--db", "Shop", "--full", "--out", archive}, conn()));
    ASSERT_EQ(b.exit, 0) << b.err;
    EXPECT_NE(b.out.find("shop.xml"), std::string::npos);

    auto i = tool({"inspect", "--archive", archive});
    EXPECT_EQ(i.exit, 0);
    EXPECT_NE(i.out.find("dialect=RefEngine\n"), std::string::npos);
    EXPECT_NE(i.out.find("checksum_status=ok\n"), std::string::npos);
    EXPECT_NE(i.out.find("count.Table=3\n"), std::string::npos);

    EXPECT_EQ(tool({"validate", "--archive", archive}).exit, 0);

    auto r = tool(with({"restore", "--mode", "full-new", "--archive", archive, "--db", "ShopCopy"}, conn()));
    ASSERT_EQ(r.exit, 0) << r.err;
    auto fresh = reopen();
    EXPECT_TRUE(same_content(fresh->snapshot("Shop", select_everything(fresh->describe("Shop"))),
                             fresh->snapshot("ShopCopy", select_everything(fresh->describe("ShopCopy")))));

    auto again = tool(with({"restore", "--mode", "full-new", "--archive", archive, "--db", "ShopCopy"}, conn()));
    EXPECT_EQ(again.exit, 2);
    EXPECT_TRUE(again.err.starts_with("DATABASE_EXISTS: ")) << again.err;
}

TEST_F(CliTest, ValidateReportsDocumentErrors) {
    const auto archive = (out_dir / "users.xml").string();
    ASSERT_EQ(tool(with({"backup", "--db", "Users", "--full", "--out", archive}, conn())).exit, 0);
    const auto doc = read_file(archive);

    const auto cut = (out_dir / "cut.xml").string();
    write_file_atomic(cut, doc.substr(0, doc.size() / 2));
    auto t = tool({"validate", "--archive", cut});
    EXPECT_EQ(t.exit, 2);
    EXPECT_TRUE(t.err.starts_with("MALFORMED_DOCUMENT: ")) << t.err;
    EXPECT_EQ(std::count(t.err.begin(), t.err.end(), '\n'), 1);

    const auto other = (out_dir / "other.xml").string();
    write_file_atomic(other, "<?xml version=\"1.0\"?>\n<Invoices><Invoice id=\"1\"/></Invoices>\n");
    auto o = tool({"validate", "--archive", other});
    EXPECT_EQ(o.exit, 2);
    EXPECT_TRUE(o.err.starts_with("NOT_A_BACKUP_FILE: ")) << o.err;

    auto missing = tool({"validate", "--archive", (out_dir / "nope.xml").string()});
    EXPECT_EQ(missing.exit, 2);
    EXPECT_TRUE(missing.err.starts_with("NOT_FOUND: ")) << missing.err;
}

TEST_F(CliTest, PartialBackupIntoEmptiedDatabase) {
    const auto archive = (out_dir / "two.xml").string();
    auto b = tool(with({"backup", "--db", "Users", "--table", "users:19,20", "--out", archive}, conn()));
    ASSERT_EQ(b.exit, 0) << b.err;
    auto r = tool(with({"restore", "--mode", "partial-exist", "--archive", archive, "--db", "Shop"}, conn()));
    ASSERT_EQ(r.exit, 0) << r.err;
    auto fresh = reopen();
    auto got = fresh->snapshot("Shop", select_everything(fresh->describe("Shop")));
    ASSERT_EQ(got.tables.size(), 1u);
    EXPECT_TRUE(got.definitions.empty());
    EXPECT_EQ(got.tables[0].rows,
              (std::vector<Row>{row({Value::integer(19), Value::text("user1"), Value::text("123456")}),
                                row({Value::integer(20), Value::text("user20"), Value::text("pswrd20")})}));
}

TEST_F(CliTest, GuardsAndUsageErrorsExitTwo) {
    DatabaseSnapshot foreign;
    foreign.dialect = Dialect("SQL2008");
    foreign.db_name = "Shop";
    const auto archive = (out_dir / "foreign.xml").string();
    write_file_atomic(archive, write_archive(foreign));
    const auto before = read_file(store->file_of("Shop"));
    auto d = tool(with({"restore", "--mode", "merge", "--archive", archive, "--db", "Shop"}, conn()));
    EXPECT_EQ(d.exit, 2);
    EXPECT_TRUE(d.err.starts_with("DIALECT_MISMATCH: ")) << d.err;
    EXPECT_EQ(read_file(store->file_of("Shop")), before);

    auto orphan = tool(with({"backup", "--db", "Users", "--table", "users:99", "--out", archive}, conn()));
    EXPECT_EQ(orphan.exit, 0) << orphan.err;  // absent keys are a warning, not an error
    auto bad_key = tool(with({"backup", "--db", "Users", "--table", "users:abc", "--out", archive}, conn()));
    EXPECT_EQ(bad_key.exit, 2);
    EXPECT_TRUE(bad_key.err.starts_with("SELECTION_INVALID: ")) << bad_key.err;

    EXPECT_EQ(tool({"frobnicate"}).exit, 2);
    EXPECT_EQ(tool({"backup", "--db", "Users"}).exit, 2);
    EXPECT_EQ(tool(with({"backup", "--db", "Users", "--full", "--table", "users"}, conn())).exit, 2);
    EXPECT_EQ(tool({"restore", "--mode", "sideways", "--archive", archive, "--db", "x", "--server", "s"}).exit, 2);
    EXPECT_EQ(tool({"--help"}).exit, 0);
}

TEST_F(CliTest, NoColourAndNoPasswordInOutput) {
    const auto archive = (out_dir / "u.xml").string();
    auto b = tool(with({"backup", "--db", "Users", "--full", "--out", archive}, conn()),
                  "NO_COLOR=1 LOGIBAK_PASSWORD=hunter2-secret");
    ASSERT_EQ(b.exit, 0);
    auto e = tool(with({"restore", "--mode", "full-new", "--archive", archive, "--db", "Users"}, conn()),
                  "NO_COLOR=1 LOGIBAK_PASSWORD=hunter2-secret");
    for (const auto& s : {b.out, b.err, e.out, e.err, read_file(archive)}) {
        EXPECT_EQ(s.find("hunter2"), std::string::npos);
        EXPECT_EQ(s.find('\x1b'), std::string::npos);
    }
}

TEST_F(CliTest, CliAndApiWriteIdenticalArchives) {
    TempDir api_out("cli-api-out");
    const std::string selection_arg = "users:19,21";
    auto c = in_process(with({"backup", "--db", "Users", "--table", selection_arg, "--view", "order_view", "--out",
                              (out_dir / "same.xml").string()},
                             conn()));
    // order_view lives in Shop, so this must fail first
    EXPECT_EQ(c.exit, 2);
    c = in_process(with({"backup", "--db", "Users", "--table", selection_arg, "--out", (out_dir / "same.xml").string()},
                        conn()));
    ASSERT_EQ(c.exit, 0) << c.err;

    ApiService::Options opts;
    opts.config.refengine_roots = {store_dir.str()};
    opts.config.primary_dir = api_out.path();
    opts.users = seed_admin_users();
    auto catalog = std::make_shared<StatementCatalog>(StatementCatalog::load_file(LOGIBAK_DEFAULT_CATALOG));
    auto registry = make_registry(opts.config, catalog);
    ApiService service(std::move(opts), std::move(registry));
    httplib::Server server;
    service.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    auto login = client.Post("/api/login", json{{"username", "user1"}, {"password", "123456"}}.dump(), "application/json");
    ASSERT_TRUE(login);
    const httplib::Headers auth = {{"Authorization", "Bearer " + json::parse(login->body)["token"].get<std::string>()}};
    client.Post("/api/connections/test", auth,
                json{{"dialect", "RefEngine"}, {"server", store_dir.str()}, {"user", "admin"}, {"password", ""}}.dump(),
                "application/json");
    json body = {{"db", "Users"},
                 {"output_name", "same"},
                 {"selection", {{"articles", {{{"kind", "Table"}, {"name", "users"}}}}, {"records", {{"users", {19, 21}}}}}}};
    auto r = client.Post("/api/backup", auth, body.dump(), "application/json");
    server.stop();
    t.join();
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << r->body;
    EXPECT_EQ(read_file(api_out.path() / "same.xml"), read_file(out_dir / "same.xml"));
}

TEST_F(CliTest, UseraddThenServeAcceptsTheLogin) {
    const auto users = (out_dir / "users.json").string();
    auto a = tool({"useradd", "--users-file", users, "--id", "19", "--username", "user1"},
                  "LOGIBAK_NEW_PASSWORD=123456");
    ASSERT_EQ(a.exit, 0) << a.err;
    EXPECT_EQ(read_file(users).find("123456"), std::string::npos);
    EXPECT_EQ(tool({"useradd", "--users-file", users, "--id", "19", "--username", "x"}, "LOGIBAK_NEW_PASSWORD=p").exit,
              2);

    const auto config = out_dir / "logibak.json";
    {
        std::ofstream f(config);
        f << json{{"refengine", {{"roots", {store_dir.str()}}}},
                  {"sinks", {{"primary_dir", (out_dir / "archives").string()}}},
                  {"http", {{"bind_addr", "127.0.0.1:0"}}},
                  {"auth", {{"users_file", users}}}}
                 .dump();
    }

    int pipefd[2];
    ASSERT_EQ(pipe(pipefd), 0);
    const pid_t pid = fork();
    if (pid == 0) {
        dup2(pipefd[1], STDERR_FILENO);
        close(pipefd[0]);
        execl(LOGIBAK_CLI_PATH, "logibak", "--config", config.c_str(), "serve", static_cast<char*>(nullptr));
        _exit(127);
    }
    close(pipefd[1]);
    FILE* err = fdopen(pipefd[0], "r");
    char line[256] = {};
    ASSERT_NE(fgets(line, sizeof line, err), nullptr);
    const std::string first(line);
    ASSERT_TRUE(first.starts_with("listening on 127.0.0.1:")) << first;
    const int port = std::stoi(first.substr(first.rfind(':') + 1));

    httplib::Client client("127.0.0.1", port);
    auto ok = client.Post("/api/login", json{{"username", "user1"}, {"password", "123456"}}.dump(), "application/json");
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->status, 200);
    auto no = client.Get("/api/databases");
    ASSERT_TRUE(no);
    EXPECT_EQ(no->status, 401);

    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    fclose(err);
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
}
