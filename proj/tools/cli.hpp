// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "logibak/core_model.hpp"
#include "logibak/error.hpp"

namespace logibak::cli {

/// `--table` argument: `users`, `users:1,2`, `users:` (schema only) or
/// `t:(a|b),(c|d)` for composite keys. Keys stay text until they are typed
/// against the catalog. A backslash escapes the next character.
struct TableArg {
    std::string table;
    bool all_records = true;
    std::vector<std::vector<std::string>> keys;
};

/// Throws BadRequest.
TableArg parse_table_arg(std::string_view arg);

/// Types the keys of `args` against `catalog` and adds them to `sel`.
/// Throws SelectionInvalid.
void add_tables(Selection& sel, const std::vector<TableArg>& args, const DatabaseSnapshot& catalog);

/// 2 for errors the caller can fix (bad input, guards), 1 for the rest.
int exit_code(ErrorCode code);

/// Runs one command line. Diagnostics go to `err` as `CODE: message`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace logibak::cli
