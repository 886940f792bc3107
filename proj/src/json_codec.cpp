// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/json_codec.hpp"

#include <cmath>

#include "logibak/error.hpp"

namespace logibak {

namespace {

constexpr ArticleKind kGroupOrder[] = {ArticleKind::Table, ArticleKind::View, ArticleKind::StoredProcedure,
                                       ArticleKind::Function, ArticleKind::Trigger};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::SelectionInvalid, msg); }

const json& member(const json& obj, const char* key) {
    static const json absent;
    auto it = obj.find(key);
    return it == obj.end() ? absent : *it;
}

std::string text_of(const json& j, const char* what) {
    if (!j.is_string()) invalid(std::string(what) + " must be a string");
    return j.get<std::string>();
}

}  // namespace

json counts_json(const std::map<ArticleKind, std::size_t>& counts) {
    json out = json::object();
    for (auto k : kAllArticleKinds) {
        auto it = counts.find(k);
        out[std::string(to_string(k))] = it == counts.end() ? 0 : it->second;
    }
    return out;
}

json value_json(const Value& v) {
    switch (v.tag()) {
    case ValueTag::Null: return nullptr;
    case ValueTag::Bool: return v.as_bool();
    case ValueTag::Int64: return v.as_int();
    case ValueTag::Float64:
        if (std::isfinite(v.as_real())) return v.as_real();
        return encode_value(v);
    case ValueTag::Text: return v.as_text();
    default: return encode_value(v);
    }
}

Value value_from_json(ValueTag tag, const json& j) {
    if (j.is_null()) return Value::null();
    std::optional<Value> v;
    switch (tag) {
    case ValueTag::Bool:
        if (j.is_boolean()) v = Value::boolean(j.get<bool>());
        break;
    case ValueTag::Int64:
        if (j.is_number_integer()) {
            if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) break;
            v = Value::integer(j.get<std::int64_t>());
        }
        break;
    case ValueTag::Float64:
        if (j.is_number()) v = Value::real(j.get<double>());
        break;
    default: break;
    }
    if (!v && j.is_string()) v = decode_value(tag, j.get<std::string>());
    if (!v) invalid("expected a " + std::string(to_string(tag)) + " value, got " + j.dump());
    return *std::move(v);
}

Selection selection_from_json(const json& j, const DatabaseSnapshot& catalog) {
    if (!j.is_object()) invalid("selection must be an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "articles" && key != "records" && key != "all_records") invalid("unknown selection field '" + key + "'");
    }
    Selection sel;
    sel.db_name = catalog.db_name;

    if (const auto& arts = member(j, "articles"); !arts.is_null()) {
        if (!arts.is_array()) invalid("articles must be an array");
        for (const auto& a : arts) {
            if (!a.is_object()) invalid("article must be an object");
            auto kind = parse_article_kind(text_of(member(a, "kind"), "article kind"));
            if (!kind) invalid("unknown article kind " + member(a, "kind").dump());
            sel.articles.insert({*kind, text_of(member(a, "name"), "article name")});
        }
    }
    if (const auto& recs = member(j, "records"); !recs.is_null()) {
        if (!recs.is_object()) invalid("records must be an object keyed by table");
        for (const auto& [table, keys] : recs.items()) {
            const auto* t = catalog.find_table(table);
            if (!t) invalid("records given for unknown table '" + table + "'");
            if (!keys.is_array()) invalid("keys of '" + table + "' must be an array");
            const auto idx = t->schema.key_indices();
            auto& out = sel.record_keys[table];
            for (const auto& k : keys) {
                // single-column keys may drop the brackets
                const json tuple = k.is_array() ? k : json::array({k});
                if (tuple.size() != idx.size()) {
                    invalid("key " + k.dump() + " of '" + table + "' needs " + std::to_string(idx.size()) + " values");
                }
                KeyTuple key;
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    key.push_back(value_from_json(t->schema.columns[idx[i]].type, tuple[i]));
                }
                out.insert(std::move(key));
            }
        }
    }
    if (const auto& all = member(j, "all_records"); !all.is_null()) {
        if (!all.is_array()) invalid("all_records must be an array");
        for (const auto& t : all) sel.select_all_records.insert(text_of(t, "table name"));
    }
    return sel;
}

json selection_json(const Selection& sel) {
    json arts = json::array();
    for (const auto& a : sel.articles) arts.push_back({{"kind", to_string(a.kind)}, {"name", a.name}});
    json recs = json::object();
    for (const auto& [table, keys] : sel.record_keys) {
        json list = json::array();
        for (const auto& k : keys) {
            json tuple = json::array();
            for (const auto& v : k) tuple.push_back(value_json(v));
            list.push_back(std::move(tuple));
        }
        recs[table] = std::move(list);
    }
    return {{"articles", arts}, {"records", recs}, {"all_records", sel.select_all_records}};
}

json schema_json(const TableSchema& schema) {
    json cols = json::array();
    for (const auto& c : schema.columns) {
        cols.push_back({{"name", c.name}, {"type", to_string(c.type)}, {"nullable", c.nullable}, {"key", c.is_key}});
    }
    json fks = json::array();
    for (const auto& fk : schema.foreign_keys) {
        fks.push_back({{"column", fk.column}, {"ref_table", fk.ref_table}, {"ref_column", fk.ref_column}});
    }
    return {{"name", schema.name}, {"columns", cols}, {"foreign_keys", fks}};
}

json articles_json(const DatabaseSnapshot& catalog) {
    json groups = json::array();
    for (auto kind : kGroupOrder) {
        json items = json::array();
        if (kind == ArticleKind::Table) {
            for (const auto& t : catalog.tables) {
                json keys = json::array();
                for (auto i : t.schema.key_indices()) keys.push_back(t.schema.columns[i].name);
                items.push_back({{"name", t.schema.name}, {"key_columns", keys}});
            }
        } else {
            for (const auto& d : catalog.definitions) {
                if (d.ref.kind == kind) items.push_back({{"name", d.ref.name}});
            }
        }
        const bool empty = items.empty();
        groups.push_back({{"kind", to_string(kind)}, {"empty", empty}, {"items", std::move(items)}});
    }
    return {{"db", catalog.db_name}, {"dialect", catalog.dialect.name()}, {"groups", groups}};
}

json report_json(const BackupReport& r) {
    json out = {{"dialect", r.dialect.name()},
                {"db", r.db_name},
                {"archive_name", r.archive_name},
                {"checksum", r.checksum},
                {"bytes", r.bytes},
                {"counts", counts_json(r.counts)},
                {"mirrored", r.mirror_path.has_value()},
                {"warnings", r.warnings}};
    if (r.remote_attempted) {
        out["remote"] = {{"target", r.remote_target}, {"delivered", r.remote_delivered}, {"error", r.remote_error}};
    }
    return out;
}

json report_json(const RestoreReport& r) {
    return {{"mode", to_string(r.mode)},
            {"dialect", r.dialect.name()},
            {"db", r.db_name},
            {"created", r.created},
            {"atomic", r.atomic},
            {"added", counts_json(r.added)},
            {"replaced", counts_json(r.replaced)},
            {"kept", counts_json(r.kept)},
            {"removed", counts_json(r.removed)}};
}

json info_json(const ArchiveInfo& info) {
    return {{"dialect", info.dialect.name()},
            {"format_version", info.format_version},
            {"db", info.db_name},
            {"checksum", info.checksum},
            {"checksum_ok", info.checksum_ok},
            {"counts", counts_json(info.counts)}};
}

}  // namespace logibak
