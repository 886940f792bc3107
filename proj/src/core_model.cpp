// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/core_model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "logibak/error.hpp"

namespace logibak {

bool is_identifier(std::string_view s) noexcept {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    if (!alpha(s.front())) return false;
    return std::all_of(s.begin() + 1, s.end(), [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

void require_identifier(std::string_view s, std::string_view what) {
    if (!is_identifier(s)) {
        throw Error(ErrorCode::IllegalIdentifier,
                    std::string(what) + " '" + std::string(s) + "' is not an identifier");
    }
}

bool is_valid_utf8(std::string_view s) noexcept {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

// ── Dialect ─────────────────────────────────────────────────────────

bool Dialect::is_valid_name(std::string_view name) noexcept {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

Dialect::Dialect(std::string name) : name_(std::move(name)) {
    if (!is_valid_name(name_)) {
        throw Error(ErrorCode::IllegalIdentifier, "dialect name '" + name_ + "' must match [A-Za-z0-9_]+");
    }
}

// ── ArticleKind / ValueTag ──────────────────────────────────────────

std::string_view to_string(ArticleKind kind) {
    switch (kind) {
    case ArticleKind::StoredProcedure: return "StoredProcedure";
    case ArticleKind::Function: return "Function";
    case ArticleKind::Trigger: return "Trigger";
    case ArticleKind::View: return "View";
    case ArticleKind::Table: return "Table";
    case ArticleKind::Record: return "Record";
    }
    return "?";
}

std::optional<ArticleKind> parse_article_kind(std::string_view s) {
    for (auto k : kAllArticleKinds) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

bool is_definition_kind(ArticleKind kind) noexcept {
    return kind != ArticleKind::Table && kind != ArticleKind::Record;
}

std::string_view to_string(ValueTag tag) {
    switch (tag) {
    case ValueTag::Null: return "Null";
    case ValueTag::Bool: return "Bool";
    case ValueTag::Int64: return "Int64";
    case ValueTag::Float64: return "Float64";
    case ValueTag::Text: return "Text";
    case ValueTag::Blob: return "Blob";
    case ValueTag::Timestamp: return "Timestamp";
    }
    return "?";
}

std::optional<ValueTag> parse_value_tag(std::string_view s) {
    for (auto t : {ValueTag::Null, ValueTag::Bool, ValueTag::Int64, ValueTag::Float64, ValueTag::Text,
                   ValueTag::Blob, ValueTag::Timestamp}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

// ── Timestamp ───────────────────────────────────────────────────────

namespace {

// Proleptic Gregorian conversions (H. Hinnant's algorithms).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

constexpr std::int64_t kMicrosPerDay = 86400LL * 1000000;

template <typename T>
bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, T& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return r.ec == std::errc();
}

}  // namespace

std::string format_timestamp(Timestamp ts) {
    std::int64_t micros = std::clamp(ts.micros, kMinTimestampMicros, kMaxTimestampMicros);
    std::int64_t days = micros / kMicrosPerDay;
    std::int64_t rem = micros % kMicrosPerDay;
    if (rem < 0) {
        rem += kMicrosPerDay;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    const auto secs = rem / 1000000;
    const auto frac = rem % 1000000;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                  static_cast<long long>(secs % 60), static_cast<long long>(frac));
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    // 0123456789012345678901234567
    // YYYY-MM-DDTHH:MM:SS.ssssssZ
    if (s.size() != 27 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
        s[19] != '.' || s[26] != 'Z') {
        return std::nullopt;
    }
    std::int64_t y;
    unsigned mo, d, h, mi, sec;
    std::int64_t frac;
    if (!parse_fixed(s, 0, 4, y) || !parse_fixed(s, 5, 2, mo) || !parse_fixed(s, 8, 2, d) ||
        !parse_fixed(s, 11, 2, h) || !parse_fixed(s, 14, 2, mi) || !parse_fixed(s, 17, 2, sec) ||
        !parse_fixed(s, 20, 6, frac)) {
        return std::nullopt;
    }
    if (y < 1 || mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h > 23 || mi > 59 || sec > 59) {
        return std::nullopt;
    }
    const std::int64_t days = days_from_civil(y, mo, d);
    return Timestamp{days * kMicrosPerDay + (static_cast<std::int64_t>(h) * 3600 + mi * 60 + sec) * 1000000 + frac};
}

// ── Value ───────────────────────────────────────────────────────────

namespace {

int compare_reals(double a, double b) {
    const bool na = std::isnan(a), nb = std::isnan(b);
    if (na || nb) return na == nb ? 0 : (na ? 1 : -1);
    if (a < b) return -1;
    if (a > b) return 1;
    // equal magnitude; order -0.0 before +0.0
    const bool sa = std::signbit(a), sb = std::signbit(b);
    return sa == sb ? 0 : (sa ? -1 : 1);
}

}  // namespace

bool operator==(const Value& a, const Value& b) { return (a <=> b) == 0; }

std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (a.storage_.index() != b.storage_.index()) return a.storage_.index() <=> b.storage_.index();
    switch (a.tag()) {
    case ValueTag::Null: return std::strong_ordering::equal;
    case ValueTag::Bool: return a.as_bool() <=> b.as_bool();
    case ValueTag::Int64: return a.as_int() <=> b.as_int();
    case ValueTag::Float64: return compare_reals(a.as_real(), b.as_real()) <=> 0;
    case ValueTag::Text: return a.as_text() <=> b.as_text();
    case ValueTag::Blob: return a.as_blob() <=> b.as_blob();
    case ValueTag::Timestamp: return a.as_timestamp() <=> b.as_timestamp();
    }
    return std::strong_ordering::equal;
}

std::string Value::debug_string() const {
    switch (tag()) {
    case ValueTag::Null: return "NULL";
    case ValueTag::Bool: return as_bool() ? "true" : "false";
    case ValueTag::Int64: return std::to_string(as_int());
    case ValueTag::Float64: {
        char buf[32];
        auto r = std::to_chars(buf, buf + sizeof buf, as_real());
        return std::string(buf, r.ptr);
    }
    case ValueTag::Text: return "'" + as_text() + "'";
    case ValueTag::Blob: return "<blob " + std::to_string(as_blob().size()) + " bytes>";
    case ValueTag::Timestamp: return format_timestamp(as_timestamp());
    }
    return "?";
}

// ── schema ──────────────────────────────────────────────────────────

std::optional<std::size_t> TableSchema::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == column) return i;
    }
    return std::nullopt;
}

std::vector<std::size_t> TableSchema::key_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].is_key) out.push_back(i);
    }
    if (out.empty()) {
        for (std::size_t i = 0; i < columns.size(); ++i) out.push_back(i);
    }
    return out;
}

KeyTuple key_of(const TableSchema& schema, const Row& row) {
    KeyTuple key;
    for (auto i : schema.key_indices()) key.push_back(row.values.at(i));
    return key;
}

const TableData* DatabaseSnapshot::find_table(std::string_view name) const {
    for (const auto& t : tables) {
        if (t.schema.name == name) return &t;
    }
    return nullptr;
}

const DefinitionArticle* DatabaseSnapshot::find_definition(const ArticleRef& ref) const {
    for (const auto& d : definitions) {
        if (d.ref == ref) return &d;
    }
    return nullptr;
}

std::vector<std::string> check_snapshot(const DatabaseSnapshot& s) {
    std::vector<std::string> problems;
    auto bad = [&](std::string msg) { problems.push_back(std::move(msg)); };

    if (s.dialect.empty()) bad("dialect is empty");
    if (!is_identifier(s.db_name)) bad("database name '" + s.db_name + "' is not an identifier");
    for (const auto& [k, v] : s.db_attributes) {
        if (!is_identifier(k)) bad("attribute name '" + k + "' is not an identifier");
        if (!is_valid_utf8(v)) bad("attribute '" + k + "' is not valid UTF-8");
    }

    std::set<std::string> table_names;
    for (const auto& t : s.tables) {
        const auto& schema = t.schema;
        if (!is_identifier(schema.name)) bad("table name '" + schema.name + "' is not an identifier");
        if (!table_names.insert(schema.name).second) bad("duplicate table '" + schema.name + "'");
        if (schema.columns.empty()) bad("table '" + schema.name + "' has no columns");
        std::set<std::string> cols;
        for (const auto& c : schema.columns) {
            if (!is_identifier(c.name)) bad("column '" + schema.name + "." + c.name + "' is not an identifier");
            if (!cols.insert(c.name).second) bad("duplicate column '" + schema.name + "." + c.name + "'");
            if (c.type == ValueTag::Null) bad("column '" + schema.name + "." + c.name + "' has type Null");
        }
        for (const auto& row : t.rows) {
            if (row.values.size() != schema.columns.size()) {
                bad("row arity mismatch in '" + schema.name + "'");
                continue;
            }
            for (std::size_t i = 0; i < row.values.size(); ++i) {
                const auto& v = row.values[i];
                const auto& c = schema.columns[i];
                if (v.is_null()) {
                    if (!c.nullable) bad("NULL in non-nullable column '" + schema.name + "." + c.name + "'");
                } else if (v.tag() != c.type) {
                    bad("value of type " + std::string(to_string(v.tag())) + " in " +
                        std::string(to_string(c.type)) + " column '" + schema.name + "." + c.name + "'");
                } else if (v.tag() == ValueTag::Text && !is_valid_utf8(v.as_text())) {
                    bad("invalid UTF-8 text in '" + schema.name + "." + c.name + "'");
                } else if (v.tag() == ValueTag::Timestamp && (v.as_timestamp().micros < kMinTimestampMicros ||
                                                              v.as_timestamp().micros > kMaxTimestampMicros)) {
                    bad("timestamp out of range in '" + schema.name + "." + c.name + "'");
                }
            }
        }
    }
    for (const auto& t : s.tables) {
        for (const auto& fk : t.schema.foreign_keys) {
            const auto where = t.schema.name + "." + fk.column;
            if (!t.schema.column_index(fk.column)) bad("foreign key on unknown column '" + where + "'");
            const auto* target = s.find_table(fk.ref_table);
            if (!target) {
                bad("foreign key '" + where + "' references absent table '" + fk.ref_table + "'");
            } else if (!target->schema.column_index(fk.ref_column)) {
                bad("foreign key '" + where + "' references absent column '" + fk.ref_table + "." + fk.ref_column + "'");
            }
        }
    }

    std::set<ArticleRef> defs;
    for (const auto& d : s.definitions) {
        if (!is_definition_kind(d.ref.kind)) bad("definition '" + d.ref.name + "' has kind " + std::string(to_string(d.ref.kind)));
        if (!is_identifier(d.ref.name)) bad("definition name '" + d.ref.name + "' is not an identifier");
        if (!defs.insert(d.ref).second) bad("duplicate " + std::string(to_string(d.ref.kind)) + " '" + d.ref.name + "'");
        if (d.body.empty()) bad(std::string(to_string(d.ref.kind)) + " '" + d.ref.name + "' has an empty body");
        if (!is_valid_utf8(d.body)) bad("definition '" + d.ref.name + "' body is not valid UTF-8");
    }
    return problems;
}

DatabaseSnapshot canonical(DatabaseSnapshot s) {
    std::sort(s.tables.begin(), s.tables.end(),
              [](const TableData& a, const TableData& b) { return a.schema.name < b.schema.name; });
    for (auto& t : s.tables) std::sort(t.rows.begin(), t.rows.end());
    std::sort(s.definitions.begin(), s.definitions.end(),
              [](const DefinitionArticle& a, const DefinitionArticle& b) { return a.ref < b.ref; });
    return s;
}

bool same_content(const DatabaseSnapshot& a, const DatabaseSnapshot& b) {
    if (a.dialect != b.dialect) return false;
    auto ca = canonical(a);
    auto cb = canonical(b);
    return ca.tables == cb.tables && ca.definitions == cb.definitions;
}

// ── selection ───────────────────────────────────────────────────────

Selection select_everything(const DatabaseSnapshot& catalog) {
    Selection sel;
    sel.db_name = catalog.db_name;
    for (const auto& t : catalog.tables) {
        sel.articles.insert({ArticleKind::Table, t.schema.name});
        sel.select_all_records.insert(t.schema.name);
    }
    for (const auto& d : catalog.definitions) sel.articles.insert(d.ref);
    return sel;
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::DatabaseMismatch: return "database mismatch";
    case ViolationKind::UnknownArticle: return "unknown article";
    case ViolationKind::RecordArticle: return "record article";
    case ViolationKind::OrphanRecordSelection: return "orphan record selection";
    case ViolationKind::KeyArity: return "key arity";
    case ViolationKind::KeyType: return "key type";
    }
    return "?";
}

std::string ValidationReport::summary() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(v.kind)) + ": " + v.message;
    }
    return out;
}

ValidationReport validate_selection(const Selection& sel, const DatabaseSnapshot& snapshot) {
    ValidationReport report;
    auto violate = [&](ViolationKind kind, const std::string& subject, std::string message) {
        report.violations.push_back({kind, subject, std::move(message)});
    };

    if (sel.db_name != snapshot.db_name) {
        violate(ViolationKind::DatabaseMismatch, sel.db_name,
                "selection is for database '" + sel.db_name + "', catalog is '" + snapshot.db_name + "'");
    }
    if (sel.empty()) report.warnings.push_back("selection contains zero articles");

    for (const auto& ref : sel.articles) {
        if (ref.kind == ArticleKind::Record) {
            violate(ViolationKind::RecordArticle, ref.name,
                    "records are selected through record keys, not as articles ('" + ref.name + "')");
            continue;
        }
        const bool exists = ref.kind == ArticleKind::Table ? snapshot.find_table(ref.name) != nullptr
                                                           : snapshot.find_definition(ref) != nullptr;
        if (!exists) {
            violate(ViolationKind::UnknownArticle, ref.name,
                    std::string(to_string(ref.kind)) + " '" + ref.name + "' does not exist");
        }
    }

    auto table_selected = [&](const std::string& table) {
        return sel.articles.count(ArticleRef{ArticleKind::Table, table}) > 0;
    };
    std::set<std::string> record_tables = sel.select_all_records;
    for (const auto& [table, _] : sel.record_keys) record_tables.insert(table);
    for (const auto& table : record_tables) {
        if (!table_selected(table)) {
            violate(ViolationKind::OrphanRecordSelection, table,
                    "records selected under table '" + table + "' which is not selected");
        }
    }

    for (const auto& [table, keys] : sel.record_keys) {
        const auto* data = snapshot.find_table(table);
        if (!data) continue;  // reported above as unknown or orphan
        const auto key_cols = data->schema.key_indices();
        for (const auto& key : keys) {
            if (key.size() != key_cols.size()) {
                violate(ViolationKind::KeyArity, table,
                        "key of " + std::to_string(key.size()) + " values for '" + table + "' which has " +
                            std::to_string(key_cols.size()) + " key columns");
                continue;
            }
            for (std::size_t i = 0; i < key.size(); ++i) {
                const auto& col = data->schema.columns[key_cols[i]];
                if (key[i].tag() != col.type) {
                    violate(ViolationKind::KeyType, table,
                            "key value " + key[i].debug_string() + " does not match " +
                                std::string(to_string(col.type)) + " column '" + table + "." + col.name + "'");
                }
            }
        }
    }

    for (const auto& t : snapshot.tables) {
        if (!table_selected(t.schema.name)) continue;
        for (const auto& fk : t.schema.foreign_keys) {
            if (!table_selected(fk.ref_table)) {
                report.warnings.push_back("foreign key " + t.schema.name + "." + fk.column + " -> " + fk.ref_table +
                                          " is dropped: target table not selected");
            }
        }
    }
    return report;
}

}  // namespace logibak
