// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/statement_catalog.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "logibak/error.hpp"

namespace logibak {

namespace {

constexpr std::array<std::string_view, 23> kSpecs = {
    "Get_All_DataBases",
    "Get_All_Tables",
    "Get_All_StoredProcedures",
    "Get_All_Views",
    "Get_All_Functions",
    "Get_All_Triggers",
    "Get_Selected_StoredProcedures",
    "Get_Selected_Views",
    "Get_Selected_DataBase",
    "Get_Selected_Functions",
    "Get_Selected_Triggers",
    "Get_Selected_Tables",
    "Get_All_Records",
    "Delete_DataBase",
    "Add_DataBase",
    "Get_All_Attributes",
    "Get_All_Keys",
    "Disconnect_All_Connections",
    "Get_DataBase_ID",
    "Get_All_Servers",
    // restore side
    "Create_Table",
    "Insert_Row",
    "Create_Definition",
};

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
    throw Error(ErrorCode::ParseError, "statement catalog line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits on unescaped '|' and resolves `\|` / `\\` escapes.
std::vector<std::string> split_fields(std::string_view line, std::size_t lineno) {
    std::vector<std::string> fields(1);
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '\\') {
            if (i + 1 < line.size() && (line[i + 1] == '|' || line[i + 1] == '\\')) {
                fields.back() += line[++i];
            } else {
                parse_fail(lineno, "dangling escape");
            }
        } else if (c == '|') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    for (auto& f : fields) f = std::string(trim(f));
    return fields;
}

// Placeholder names in template order; throws on stray braces.
std::vector<std::string> placeholders(std::string_view text, std::size_t lineno) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '}') parse_fail(lineno, "unmatched '}' in query");
        if (text[i] != '{') continue;
        const auto close = text.find('}', i);
        if (close == std::string_view::npos) parse_fail(lineno, "unterminated placeholder");
        auto name = text.substr(i + 1, close - i - 1);
        if (!is_identifier(name)) parse_fail(lineno, "bad placeholder '{" + std::string(name) + "}'");
        out.emplace_back(name);
        i = close;
    }
    return out;
}

}  // namespace

std::span<const std::string_view> statement_specs() { return kSpecs; }

bool is_statement_spec(std::string_view spec) {
    return std::find(kSpecs.begin(), kSpecs.end(), spec) != kSpecs.end();
}

StatementCatalog StatementCatalog::load(std::string_view document) {
    StatementCatalog catalog;
    if (!is_valid_utf8(document)) throw Error(ErrorCode::ParseError, "statement catalog is not valid UTF-8");

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < document.size()) {
        auto eol = document.find('\n', pos);
        if (eol == std::string_view::npos) eol = document.size();
        const auto line = trim(document.substr(pos, eol - pos));
        pos = eol + 1;
        ++lineno;

        if (line.empty() || line.front() == '#') continue;
        if (line.starts_with("@version")) {
            if (trim(line.substr(8)) != "1") parse_fail(lineno, "unsupported catalog version");
            continue;
        }

        auto fields = split_fields(line, lineno);
        if (fields.size() != 4) parse_fail(lineno, "expected 4 fields, got " + std::to_string(fields.size()));
        if (!Dialect::is_valid_name(fields[0])) parse_fail(lineno, "bad dialect '" + fields[0] + "'");
        if (!is_statement_spec(fields[1])) parse_fail(lineno, "unknown statement spec '" + fields[1] + "'");
        if (fields[3].empty()) parse_fail(lineno, "empty query");

        StatementTemplate tmpl;
        tmpl.key = {Dialect(fields[0]), fields[1]};
        tmpl.text = fields[3];
        if (!fields[2].empty()) {
            std::stringstream ss(fields[2]);
            std::string p;
            while (std::getline(ss, p, ',')) {
                auto name = std::string(trim(p));
                if (!is_identifier(name)) parse_fail(lineno, "bad param name '" + name + "'");
                if (std::find(tmpl.params.begin(), tmpl.params.end(), name) != tmpl.params.end()) {
                    parse_fail(lineno, "param '" + name + "' declared twice");
                }
                tmpl.params.push_back(std::move(name));
            }
        }
        const auto used = placeholders(tmpl.text, lineno);
        const std::set<std::string> used_set(used.begin(), used.end());
        const std::set<std::string> declared(tmpl.params.begin(), tmpl.params.end());
        if (used_set != declared) parse_fail(lineno, "placeholders do not match declared params");

        auto key = tmpl.key;
        if (!catalog.templates_.emplace(key, std::move(tmpl)).second) {
            throw Error(ErrorCode::DuplicateKey, "statement catalog line " + std::to_string(lineno) +
                                                     ": duplicate (" + key.dialect.name() + ", " + key.spec + ")");
        }
    }
    return catalog;
}

StatementCatalog StatementCatalog::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open statement catalog '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load(ss.str());
}

const StatementTemplate* StatementCatalog::find(const StatementKey& key) const {
    auto it = templates_.find(key);
    return it == templates_.end() ? nullptr : &it->second;
}

const StatementTemplate& StatementCatalog::at(const StatementKey& key) const {
    const auto* t = find(key);
    if (!t) {
        throw Error(ErrorCode::MissingStatement,
                    "no statement " + key.spec + " for dialect " + key.dialect.name());
    }
    return *t;
}

std::string StatementCatalog::render(const StatementKey& key, const StatementArgs& args) const {
    const auto& tmpl = at(key);
    for (const auto& p : tmpl.params) {
        auto it = args.find(p);
        if (it == args.end()) throw Error(ErrorCode::MissingArgument, key.spec + " needs argument '" + p + "'");
        require_identifier(it->second, "argument '" + p + "'");
    }
    for (const auto& [name, _] : args) {
        if (std::find(tmpl.params.begin(), tmpl.params.end(), name) == tmpl.params.end()) {
            throw Error(ErrorCode::ExtraArgument, key.spec + " takes no argument '" + name + "'");
        }
    }

    std::string out;
    out.reserve(tmpl.text.size());
    for (std::size_t i = 0; i < tmpl.text.size(); ++i) {
        if (tmpl.text[i] != '{') {
            out += tmpl.text[i];
            continue;
        }
        const auto close = tmpl.text.find('}', i);
        out += args.at(tmpl.text.substr(i + 1, close - i - 1));
        i = close;
    }
    return out;
}

std::vector<Dialect> StatementCatalog::dialects() const {
    std::vector<Dialect> out;
    for (const auto& [key, _] : templates_) {
        if (out.empty() || out.back() != key.dialect) out.push_back(key.dialect);
    }
    return out;
}

}  // namespace logibak
