// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace logibak {

/// `[A-Za-z_][A-Za-z0-9_]*` -- the grammar for every database, table,
/// column and article name, and for statement placeholder arguments.
bool is_identifier(std::string_view s) noexcept;

/// Throws IllegalIdentifier naming `what` if `s` is not an identifier.
void require_identifier(std::string_view s, std::string_view what);

bool is_valid_utf8(std::string_view s) noexcept;

/// A DBMS family as written in the archive header. Case-sensitive.
class Dialect {
public:
    Dialect() = default;
    /// Throws IllegalIdentifier unless `name` matches `[A-Za-z0-9_]+`.
    explicit Dialect(std::string name);

    static bool is_valid_name(std::string_view name) noexcept;

    const std::string& name() const noexcept { return name_; }
    bool empty() const noexcept { return name_.empty(); }

    friend bool operator==(const Dialect&, const Dialect&) = default;
    friend auto operator<=>(const Dialect&, const Dialect&) = default;

private:
    std::string name_;
};

/// Reference-engine dialect name.
inline constexpr std::string_view kRefEngineDialect = "RefEngine";

enum class ArticleKind { StoredProcedure, Function, Trigger, View, Table, Record };

inline constexpr ArticleKind kAllArticleKinds[] = {
    ArticleKind::StoredProcedure, ArticleKind::Function, ArticleKind::Trigger,
    ArticleKind::View,            ArticleKind::Table,    ArticleKind::Record,
};

std::string_view to_string(ArticleKind kind);
std::optional<ArticleKind> parse_article_kind(std::string_view s);

/// True for the kinds stored as DefinitionArticle text.
bool is_definition_kind(ArticleKind kind) noexcept;

struct ArticleRef {
    ArticleKind kind = ArticleKind::Table;
    std::string name;

    friend bool operator==(const ArticleRef&, const ArticleRef&) = default;
    friend auto operator<=>(const ArticleRef&, const ArticleRef&) = default;
};

// ── values ──────────────────────────────────────────────────────────

enum class ValueTag { Null, Bool, Int64, Float64, Text, Blob, Timestamp };

std::string_view to_string(ValueTag tag);
std::optional<ValueTag> parse_value_tag(std::string_view s);

struct Null {
    friend bool operator==(Null, Null) { return true; }
};

using Blob = std::vector<std::uint8_t>;

/// UTC instant, microseconds since the Unix epoch. Representable range is
/// years 0001 through 9999.
struct Timestamp {
    std::int64_t micros = 0;

    friend bool operator==(Timestamp, Timestamp) = default;
    friend auto operator<=>(Timestamp, Timestamp) = default;
};

inline constexpr std::int64_t kMinTimestampMicros = -62135596800LL * 1000000;  // 0001-01-01
inline constexpr std::int64_t kMaxTimestampMicros = 253402300799999999LL;      // 9999-12-31

/// `YYYY-MM-DDTHH:MM:SS.ssssssZ`
std::string format_timestamp(Timestamp ts);
std::optional<Timestamp> parse_timestamp(std::string_view s);

class Value {
public:
    using Storage = std::variant<Null, bool, std::int64_t, double, std::string, Blob, Timestamp>;

    Value() = default;

    static Value null() { return Value(); }
    static Value boolean(bool b) { return Value(Storage(std::in_place_index<1>, b)); }
    static Value integer(std::int64_t i) { return Value(Storage(std::in_place_index<2>, i)); }
    static Value real(double d) { return Value(Storage(std::in_place_index<3>, d)); }
    static Value text(std::string s) { return Value(Storage(std::in_place_index<4>, std::move(s))); }
    static Value blob(Blob b) { return Value(Storage(std::in_place_index<5>, std::move(b))); }
    static Value timestamp(Timestamp t) { return Value(Storage(std::in_place_index<6>, t)); }

    ValueTag tag() const noexcept { return static_cast<ValueTag>(storage_.index()); }
    bool is_null() const noexcept { return tag() == ValueTag::Null; }

    bool as_bool() const { return std::get<1>(storage_); }
    std::int64_t as_int() const { return std::get<2>(storage_); }
    double as_real() const { return std::get<3>(storage_); }
    const std::string& as_text() const { return std::get<4>(storage_); }
    const Blob& as_blob() const { return std::get<5>(storage_); }
    Timestamp as_timestamp() const { return std::get<6>(storage_); }

    const Storage& storage() const noexcept { return storage_; }

    /// Floats compare bit-wise except that every NaN equals every other NaN.
    friend bool operator==(const Value& a, const Value& b);
    /// Total order: by tag first, then by payload (-0.0 < +0.0, NaN last).
    friend std::strong_ordering operator<=>(const Value& a, const Value& b);

    /// Human-readable rendering, used in messages and the CLI.
    std::string debug_string() const;

private:
    explicit Value(Storage s) : storage_(std::move(s)) {}
    Storage storage_;
};

// ── schema and data ─────────────────────────────────────────────────

struct ColumnDef {
    std::string name;
    ValueTag type = ValueTag::Text;
    bool nullable = true;
    bool is_key = false;

    friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

struct ForeignKey {
    std::string column;
    std::string ref_table;
    std::string ref_column;

    friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
    friend auto operator<=>(const ForeignKey&, const ForeignKey&) = default;
};

struct TableSchema {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<ForeignKey> foreign_keys;

    std::optional<std::size_t> column_index(std::string_view column) const;

    /// Indices of the record-identity columns: the declared key columns, or
    /// every column when the table declares none.
    std::vector<std::size_t> key_indices() const;

    friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

struct Row {
    std::vector<Value> values;

    friend bool operator==(const Row&, const Row&) = default;
    friend auto operator<=>(const Row&, const Row&) = default;
};

using KeyTuple = std::vector<Value>;

KeyTuple key_of(const TableSchema& schema, const Row& row);

struct TableData {
    TableSchema schema;
    std::vector<Row> rows;

    friend bool operator==(const TableData&, const TableData&) = default;
};

struct DefinitionArticle {
    ArticleRef ref;
    std::string body;

    friend bool operator==(const DefinitionArticle&, const DefinitionArticle&) = default;
};

using Attributes = std::vector<std::pair<std::string, std::string>>;

struct DatabaseSnapshot {
    Dialect dialect;
    std::string db_name;
    Attributes db_attributes;
    std::vector<TableData> tables;
    std::vector<DefinitionArticle> definitions;

    const TableData* find_table(std::string_view name) const;
    const DefinitionArticle* find_definition(const ArticleRef& ref) const;

    friend bool operator==(const DatabaseSnapshot&, const DatabaseSnapshot&) = default;
};

/// Every broken invariant of `snapshot`, one message each; empty when the
/// snapshot is internally consistent.
std::vector<std::string> check_snapshot(const DatabaseSnapshot& snapshot);

/// Tables sorted by name, rows sorted, definitions sorted by (kind, name).
DatabaseSnapshot canonical(DatabaseSnapshot snapshot);

/// Equal dialect, schemas, definitions and row multisets. Database name and
/// attributes are not compared.
bool same_content(const DatabaseSnapshot& a, const DatabaseSnapshot& b);

// ── selection ───────────────────────────────────────────────────────

struct Selection {
    std::string db_name;
    std::set<ArticleRef> articles;
    std::map<std::string, std::set<KeyTuple>> record_keys;
    std::set<std::string> select_all_records;

    bool empty() const { return articles.empty() && record_keys.empty() && select_all_records.empty(); }

    friend bool operator==(const Selection&, const Selection&) = default;
};

/// Selects every article and every record of `catalog`.
Selection select_everything(const DatabaseSnapshot& catalog);

enum class ViolationKind {
    DatabaseMismatch,
    UnknownArticle,
    RecordArticle,
    OrphanRecordSelection,
    KeyArity,
    KeyType,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string subject;  // article or table name
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

/// Checks `sel` against the catalog image `snapshot` (rows are not needed).
ValidationReport validate_selection(const Selection& sel, const DatabaseSnapshot& snapshot);

}  // namespace logibak
