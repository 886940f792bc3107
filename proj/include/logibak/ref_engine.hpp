// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// The embedded reference engine: a small file-backed relational store that
// implements the full adapter contract.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "logibak/core_model.hpp"
#include "logibak/dbms_adapter.hpp"

namespace logibak::refengine {

/// File extension of database files under a store root.
inline constexpr std::string_view kDatabaseExtension = ".rfdb";
/// The store's private bookkeeping file; never listed as a database.
inline constexpr std::string_view kMetaFileName = "store.meta";

/// Attribute keys owned by the engine. Restores never overwrite them.
inline constexpr std::string_view kOwnedAttributes[] = {"name", "dbid"};

struct TableState {
    TableSchema schema;
    std::map<KeyTuple, Row> rows;  // by record identity
};

/// One immutable version of a database. Writers build a new version and
/// publish it; readers keep whichever version they started with.
struct DbState {
    std::string name;
    Attributes attributes;
    std::map<std::string, std::shared_ptr<const TableState>> tables;
    std::map<ArticleRef, std::string> definitions;
};

/// Table and view names referenced by a definition body: the identifier
/// after FROM, JOIN, INTO or UPDATE (and ON, for triggers), matched
/// case-insensitively, skipping qualified names and calls.
std::set<std::string> definition_references(const DefinitionArticle& def);

/// A store root directory. One instance per root per process; all sessions
/// on that root share it. Writers are serialised per database and readers
/// never wait for writers.
class Store {
public:
    /// Throws AdapterUnavailable("store not found") unless `root` is an
    /// existing directory.
    static std::shared_ptr<Store> open(const std::filesystem::path& root);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path file_of(const std::string& db) const;

    /// User databases, sorted.
    std::vector<std::string> databases() const;
    bool exists(const std::string& db) const;

    /// The current version. Throws UnknownDatabase or StoreCorrupt.
    std::shared_ptr<const DbState> state(const std::string& db) const;

    DatabaseSnapshot snapshot(const std::string& db, const Selection& sel) const;
    /// Every article, no rows.
    DatabaseSnapshot describe(const std::string& db) const;

    void create_database(const std::string& name);
    void drop_contents(const std::string& db);
    /// Target must hold no articles; throws ConstraintViolation otherwise.
    void apply(const std::string& db, const DatabaseSnapshot& s);
    /// Clear and apply as one commit.
    void replace(const std::string& db, const DatabaseSnapshot& s);
    MergeOutcome merge(const std::string& db, const DatabaseSnapshot& s);

    // Direct writes, used by fixtures and by writers in tests.
    void create_table(const std::string& db, const TableSchema& schema);
    void insert(const std::string& db, const std::string& table, const std::vector<Row>& rows);
    void erase(const std::string& db, const std::string& table, const KeyTuple& key);
    void put_definition(const std::string& db, const DefinitionArticle& def);

    /// Called by snapshot() before each row is copied, with the table name
    /// and row index. Lets tests schedule writes at exact points.
    using SnapshotProbe = std::function<void(const std::string& table, std::size_t row)>;
    void set_snapshot_probe(SnapshotProbe probe);

    explicit Store(std::filesystem::path root);

private:
    struct Entry;

    Entry& entry(const std::string& db) const;
    std::shared_ptr<const DbState> load(const std::string& db) const;
    void commit(const std::string& db, const std::function<void(DbState&)>& mutate);
    DatabaseSnapshot extract(const DbState& st, const Selection& sel, bool with_rows) const;

    std::filesystem::path root_;
    mutable std::mutex mu_;  // guards entries_, the meta file and the probe
    mutable std::map<std::string, std::unique_ptr<Entry>> entries_;
    SnapshotProbe probe_;
};

/// Encodes a database version in the RFE1 file format.
std::string encode_store_file(const DbState& st);
/// Throws StoreCorrupt.
DbState decode_store_file(std::string_view bytes);

class RefEngineAdapter : public Adapter {
public:
    /// `roots` are the directories advertised by list_servers. When
    /// non-empty, only those directories may be opened.
    explicit RefEngineAdapter(std::vector<std::string> roots = {});

    const Dialect& dialect() const override { return dialect_; }
    ConnectionResult test_connection(const ConnectionSpec& spec) override;
    std::vector<std::string> list_servers() override { return roots_; }
    std::unique_ptr<AdapterSession> open(const ConnectionSpec& spec) override;

private:
    Dialect dialect_;
    std::vector<std::string> roots_;
};

}  // namespace logibak::refengine
