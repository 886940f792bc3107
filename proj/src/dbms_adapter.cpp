// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/dbms_adapter.hpp"

#include <algorithm>

#include "logibak/error.hpp"

namespace logibak {

std::string ConnectionSpec::describe() const {
    std::string out = dialect.name() + "://";
    if (!user.empty()) out += user + "@";
    out += server;
    return out;
}

// ── Session ─────────────────────────────────────────────────────────

struct Session::State {
    Dialect dialect;
    std::mutex mu;  // confines the adapter session to one call at a time
    std::atomic<bool> open{true};
    std::unique_ptr<AdapterSession> impl;
};

Session::Session(Dialect dialect, std::unique_ptr<AdapterSession> impl) : state_(std::make_shared<State>()) {
    state_->dialect = std::move(dialect);
    state_->impl = std::move(impl);
}

const Dialect& Session::dialect() const {
    if (!state_) throw Error(ErrorCode::SessionClosed, "session is not open");
    return state_->dialect;
}

bool Session::is_open() const { return state_ && state_->open.load(); }

template <typename F>
auto Session::with_open(F&& fn) {
    if (!state_) throw Error(ErrorCode::SessionClosed, "session is not open");
    std::lock_guard lock(state_->mu);
    if (!state_->open.load()) throw Error(ErrorCode::SessionClosed, "session is closed");
    return fn(*state_->impl);
}

bool Session::transactional() const {
    return is_open() && state_->impl->transactional();
}

std::vector<std::string> Session::list_databases() {
    return with_open([](AdapterSession& s) { return s.list_databases(); });
}

DatabaseSnapshot Session::describe(const std::string& db) {
    return with_open([&](AdapterSession& s) { return s.describe(db); });
}

DatabaseSnapshot Session::snapshot(const std::string& db, const Selection& sel) {
    return with_open([&](AdapterSession& s) { return s.snapshot(db, sel); });
}

void Session::create_database(const std::string& name) {
    with_open([&](AdapterSession& s) { s.create_database(name); });
}

void Session::drop_contents(const std::string& db) {
    with_open([&](AdapterSession& s) { s.drop_contents(db); });
}

void Session::apply_snapshot(const std::string& db, const DatabaseSnapshot& snap) {
    with_open([&](AdapterSession& s) { s.apply_snapshot(db, snap); });
}

void Session::replace_contents(const std::string& db, const DatabaseSnapshot& snap) {
    with_open([&](AdapterSession& s) { s.replace_contents(db, snap); });
}

MergeOutcome Session::merge_snapshot(const std::string& db, const DatabaseSnapshot& snap) {
    return with_open([&](AdapterSession& s) { return s.merge_snapshot(db, snap); });
}

bool Session::close() {
    if (!state_) return false;
    std::lock_guard lock(state_->mu);
    if (!state_->open.exchange(false)) return false;
    try {
        state_->impl->close();
    } catch (...) {
        // a session that fails to close cleanly is still unusable
    }
    return true;
}

// ── registry ────────────────────────────────────────────────────────

void AdapterRegistry::add(std::shared_ptr<Adapter> adapter) {
    const Dialect d = adapter->dialect();
    adapters_[d] = std::move(adapter);
}

Adapter* AdapterRegistry::find(const Dialect& dialect) const {
    auto it = adapters_.find(dialect);
    return it == adapters_.end() ? nullptr : it->second.get();
}

std::vector<Dialect> AdapterRegistry::dialects() const {
    std::vector<Dialect> out;
    for (const auto& [d, _] : adapters_) out.push_back(d);
    return out;
}

ConnectionResult AdapterRegistry::test_connection(const ConnectionSpec& spec) const {
    auto* a = find(spec.dialect);
    if (!a) return ConnectionResult::failure("no adapter registered");
    return a->test_connection(spec);
}

std::vector<std::string> AdapterRegistry::list_servers(const Dialect& dialect) const {
    auto* a = find(dialect);
    if (!a) throw Error(ErrorCode::AdapterUnavailable, "no adapter registered for dialect " + dialect.name());
    return a->list_servers();
}

// ── connection manager ──────────────────────────────────────────────

ConnectionManager::~ConnectionManager() { disconnect_all(); }

Session ConnectionManager::open(const ConnectionSpec& spec) {
    auto* a = registry_->find(spec.dialect);
    if (!a) throw Error(ErrorCode::AdapterUnavailable, "no adapter registered for dialect " + spec.dialect.name());
    Session s(spec.dialect, a->open(spec));
    std::lock_guard lock(mu_);
    std::erase_if(sessions_, [](const Session& x) { return !x.is_open(); });
    sessions_.push_back(s);
    ++opened_total_;
    return s;
}

std::size_t ConnectionManager::disconnect_all() {
    std::vector<Session> victims;
    {
        std::lock_guard lock(mu_);
        victims.swap(sessions_);
    }
    std::size_t closed = 0;
    for (auto& s : victims) closed += s.close() ? 1 : 0;
    return closed;
}

std::size_t ConnectionManager::open_count() const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(std::count_if(sessions_.begin(), sessions_.end(),
                                                  [](const Session& s) { return s.is_open(); }));
}

// ── catalog adapter ─────────────────────────────────────────────────

namespace {

[[noreturn]] void unavailable(const Dialect& d, const std::string& what) {
    throw Error(ErrorCode::AdapterUnavailable, what + " is not available for " + d.name() + " without a native driver");
}

std::vector<std::string> first_column(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (!r.empty()) out.push_back(r.front());
    }
    return out;
}

class CatalogSession : public AdapterSession {
public:
    CatalogSession(const CatalogAdapter& owner, std::unique_ptr<Driver> driver)
        : owner_(owner), driver_(std::move(driver)) {}

    std::vector<std::string> list_databases() override {
        return first_column(driver_->query(owner_.statement("Get_All_DataBases")));
    }

    void create_database(const std::string& name) override {
        require_identifier(name, "database name");
        driver_->execute(owner_.statement("Add_DataBase", {{"db", name}}));
    }

    // TODO(drivers): map catalog result sets to schemas once a native
    // driver exists for the dialect.
    DatabaseSnapshot describe(const std::string&) override { unavailable(owner_.dialect(), "describe"); }
    DatabaseSnapshot snapshot(const std::string&, const Selection&) override {
        unavailable(owner_.dialect(), "snapshot");
    }
    void drop_contents(const std::string&) override { unavailable(owner_.dialect(), "drop_contents"); }
    void apply_snapshot(const std::string&, const DatabaseSnapshot&) override {
        unavailable(owner_.dialect(), "apply_snapshot");
    }
    MergeOutcome merge_snapshot(const std::string&, const DatabaseSnapshot&) override {
        unavailable(owner_.dialect(), "merge_snapshot");
    }

private:
    const CatalogAdapter& owner_;
    std::unique_ptr<Driver> driver_;
};

}  // namespace

CatalogAdapter::CatalogAdapter(Dialect dialect, std::shared_ptr<const StatementCatalog> catalog, DriverFactory driver)
    : dialect_(std::move(dialect)), catalog_(std::move(catalog)), driver_(std::move(driver)) {}

std::string CatalogAdapter::statement(const std::string& spec, const StatementArgs& args) const {
    return catalog_->render({dialect_, spec}, args);
}

ConnectionResult CatalogAdapter::test_connection(const ConnectionSpec& spec) {
    try {
        auto s = open(spec);
        s->close();
        return ConnectionResult::success();
    } catch (const std::exception& e) {
        return ConnectionResult::failure(e.what());
    }
}

std::vector<std::string> CatalogAdapter::list_servers() {
    if (!catalog_->find({dialect_, "Get_All_Servers"})) unavailable(dialect_, "server listing");
    const auto sql = statement("Get_All_Servers");
    if (!driver_) unavailable(dialect_, "server listing (" + sql + ")");
    auto d = driver_();
    return first_column(d->query(sql));
}

std::unique_ptr<AdapterSession> CatalogAdapter::open(const ConnectionSpec& spec) {
    if (!driver_) unavailable(dialect_, "a session");
    auto d = driver_();
    d->connect(spec);
    return std::make_unique<CatalogSession>(*this, std::move(d));
}

}  // namespace logibak
