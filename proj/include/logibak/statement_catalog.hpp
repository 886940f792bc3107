// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logibak/core_model.hpp"

namespace logibak {

/// The closed vocabulary of statement specifications.
std::span<const std::string_view> statement_specs();
bool is_statement_spec(std::string_view spec);

struct StatementKey {
    Dialect dialect;
    std::string spec;

    friend bool operator==(const StatementKey&, const StatementKey&) = default;
    friend auto operator<=>(const StatementKey&, const StatementKey&) = default;
};

struct StatementTemplate {
    StatementKey key;
    std::string text;
    std::vector<std::string> params;
};

using StatementArgs = std::map<std::string, std::string>;

/// Dialect-keyed query templates. Immutable once loaded.
///
/// Document grammar (UTF-8, one record per line):
///
///     line    := comment | blank | version | record
///     comment := '#' any*
///     version := '@version' SP+ '1'
///     record  := dialect SEP spec SEP params SEP query
///     SEP     := SP* '|' SP*
///     params  := '' | ident (',' ident)*
///
/// `\|` stands for a literal bar and `\\` for a backslash inside any field.
/// Placeholders in `query` are `{ident}`; the set of placeholders must equal
/// the declared params.
class StatementCatalog {
public:
    StatementCatalog() = default;

    /// Throws ParseError (with line number) or DuplicateKey.
    static StatementCatalog load(std::string_view document);
    static StatementCatalog load_file(const std::string& path);

    const StatementTemplate* find(const StatementKey& key) const;
    const StatementTemplate& at(const StatementKey& key) const;  // MissingStatement

    /// Substitutes each placeholder with its argument. Arguments must be
    /// identifiers; throws MissingStatement, MissingArgument, ExtraArgument
    /// or IllegalIdentifier.
    std::string render(const StatementKey& key, const StatementArgs& args) const;

    std::vector<Dialect> dialects() const;
    std::size_t size() const noexcept { return templates_.size(); }
    bool empty() const noexcept { return templates_.empty(); }

private:
    std::map<StatementKey, StatementTemplate> templates_;
};

}  // namespace logibak
