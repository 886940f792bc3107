// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "logibak/core_model.hpp"
#include "logibak/statement_catalog.hpp"

namespace logibak {

/// A password that refuses to be printed. The only way out is `reveal()`.
class Secret {
public:
    Secret() = default;
    explicit Secret(std::string value) : value_(std::move(value)) {}

    const std::string& reveal() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    /// Always "***".
    std::string redacted() const { return "***"; }

private:
    std::string value_;
};

struct ConnectionSpec {
    Dialect dialect;
    std::string server;
    std::string user;
    Secret password;

    /// `dialect://user@server`, never the password.
    std::string describe() const;
};

struct ConnectionResult {
    bool ok = false;
    std::string reason;

    static ConnectionResult success() { return {true, {}}; }
    static ConnectionResult failure(std::string why) { return {false, std::move(why)}; }
};

/// Per-kind article counts for merge reporting.
struct MergeOutcome {
    std::map<ArticleKind, std::size_t> added;
    std::map<ArticleKind, std::size_t> replaced;
    std::map<ArticleKind, std::size_t> kept;
};

/// What a dialect implementation provides for one live connection. Callers
/// go through Session, which adds the open flag and task confinement.
class AdapterSession {
public:
    virtual ~AdapterSession() = default;

    virtual std::vector<std::string> list_databases() = 0;

    /// Schemas and definitions of every article, no rows.
    virtual DatabaseSnapshot describe(const std::string& db) = 0;

    virtual DatabaseSnapshot snapshot(const std::string& db, const Selection& sel) = 0;

    virtual void create_database(const std::string& name) = 0;
    virtual void drop_contents(const std::string& db) = 0;

    /// Applies `s` to a database holding no articles.
    virtual void apply_snapshot(const std::string& db, const DatabaseSnapshot& s) = 0;

    /// drop_contents followed by apply_snapshot. Adapters that can do both
    /// in one transaction override this and report `transactional()`.
    virtual void replace_contents(const std::string& db, const DatabaseSnapshot& s) {
        drop_contents(db);
        apply_snapshot(db, s);
    }
    virtual bool transactional() const { return false; }

    virtual MergeOutcome merge_snapshot(const std::string& db, const DatabaseSnapshot& s) = 0;

    virtual void close() {}
};

/// Handle to an open adapter session. Copies share the session; one call
/// runs at a time and the rest queue. Every call on a closed session throws
/// SessionClosed.
class Session {
public:
    Session() = default;
    Session(Dialect dialect, std::unique_ptr<AdapterSession> impl);

    const Dialect& dialect() const;
    bool is_open() const;
    bool transactional() const;

    std::vector<std::string> list_databases();
    DatabaseSnapshot describe(const std::string& db);
    DatabaseSnapshot snapshot(const std::string& db, const Selection& sel);
    void create_database(const std::string& name);
    void drop_contents(const std::string& db);
    void apply_snapshot(const std::string& db, const DatabaseSnapshot& s);
    void replace_contents(const std::string& db, const DatabaseSnapshot& s);
    MergeOutcome merge_snapshot(const std::string& db, const DatabaseSnapshot& s);

    /// Returns true if this call closed the session.
    bool close();

private:
    struct State;

    template <typename F>
    auto with_open(F&& fn);

    std::shared_ptr<State> state_;
};

class Adapter {
public:
    virtual ~Adapter() = default;

    virtual const Dialect& dialect() const = 0;

    /// Ok iff a session can be opened and closed again. Never throws.
    virtual ConnectionResult test_connection(const ConnectionSpec& spec) = 0;

    virtual std::vector<std::string> list_servers() = 0;

    /// Throws AdapterUnavailable when no session can be opened.
    virtual std::unique_ptr<AdapterSession> open(const ConnectionSpec& spec) = 0;
};

/// Dialect-keyed set of adapters. Filled at startup, read-only afterwards.
class AdapterRegistry {
public:
    void add(std::shared_ptr<Adapter> adapter);

    Adapter* find(const Dialect& dialect) const;
    std::vector<Dialect> dialects() const;

    /// Unknown dialects fail with "no adapter registered".
    ConnectionResult test_connection(const ConnectionSpec& spec) const;

    /// Throws AdapterUnavailable for unknown dialects.
    std::vector<std::string> list_servers(const Dialect& dialect) const;

private:
    std::map<Dialect, std::shared_ptr<Adapter>> adapters_;
};

/// Tracks every session it opened so they can all be closed at once.
/// Safe for concurrent use.
class ConnectionManager {
public:
    explicit ConnectionManager(const AdapterRegistry& registry) : registry_(&registry) {}
    ~ConnectionManager();

    ConnectionManager(const ConnectionManager&) = delete;
    ConnectionManager& operator=(const ConnectionManager&) = delete;

    /// Throws AdapterUnavailable (including for unknown dialects).
    Session open(const ConnectionSpec& spec);

    /// Closes every open session; returns how many were open.
    std::size_t disconnect_all();

    std::size_t open_count() const;
    std::size_t opened_total() const noexcept { return opened_total_.load(); }

private:
    const AdapterRegistry* registry_;
    mutable std::mutex mu_;
    std::vector<Session> sessions_;
    std::atomic<std::size_t> opened_total_{0};
};

// ── catalog-driven stubs ────────────────────────────────────────────

/// Executes rendered statements against a live DBMS. Result rows are
/// returned as text cells.
class Driver {
public:
    virtual ~Driver() = default;
    virtual void connect(const ConnectionSpec& spec) = 0;
    virtual std::vector<std::vector<std::string>> query(const std::string& sql) = 0;
    virtual void execute(const std::string& sql) = 0;
};

using DriverFactory = std::function<std::unique_ptr<Driver>()>;

/// Adapter for dialects served only through the statement catalog. Without
/// a driver factory every operation reports AdapterUnavailable; with one,
/// server and database listing and database creation run the rendered
/// catalog statements. Catalog introspection and data movement need a
/// native result mapping and stay unavailable.
class CatalogAdapter : public Adapter {
public:
    CatalogAdapter(Dialect dialect, std::shared_ptr<const StatementCatalog> catalog, DriverFactory driver = {});

    const Dialect& dialect() const override { return dialect_; }
    ConnectionResult test_connection(const ConnectionSpec& spec) override;
    std::vector<std::string> list_servers() override;
    std::unique_ptr<AdapterSession> open(const ConnectionSpec& spec) override;

    /// The statement that would run for `spec`; exposed for diagnostics.
    std::string statement(const std::string& spec, const StatementArgs& args = {}) const;

private:
    Dialect dialect_;
    std::shared_ptr<const StatementCatalog> catalog_;
    DriverFactory driver_;
};

}  // namespace logibak
