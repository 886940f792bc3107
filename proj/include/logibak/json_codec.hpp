// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>

#include "json.hpp"
#include "logibak/archive_format.hpp"
#include "logibak/backup_engine.hpp"
#include "logibak/core_model.hpp"
#include "logibak/restore_engine.hpp"

namespace logibak {

using json = nlohmann::json;

/// `{"Table": 2, "Record": 5, ...}` with every kind present.
json counts_json(const std::map<ArticleKind, std::size_t>& counts);

/// JSON scalar for a cell. Integers, finite floats, booleans and text map to
/// their JSON types; blobs, timestamps and non-finite floats use the archive
/// text form.
json value_json(const Value& v);

/// Accepts a JSON scalar of the matching type or the archive text form.
/// Throws SelectionInvalid when `j` is not a value of `tag`.
Value value_from_json(ValueTag tag, const json& j);

/// Selection body:
///
///     {"articles": [{"kind": "Table", "name": "users"}],
///      "records": {"users": [[19], [20]]},
///      "all_records": ["users"]}
///
/// Record keys are typed against `catalog`. Throws SelectionInvalid.
Selection selection_from_json(const json& j, const DatabaseSnapshot& catalog);
json selection_json(const Selection& sel);

/// Catalog listing grouped by kind (tables, views, procedures, functions,
/// triggers). Records are left to the rows endpoint. Empty groups carry
/// `"empty": true`.
json articles_json(const DatabaseSnapshot& catalog);

json schema_json(const TableSchema& schema);

/// File paths are left out; callers add them where appropriate.
json report_json(const BackupReport& r);
json report_json(const RestoreReport& r);
json info_json(const ArchiveInfo& info);

}  // namespace logibak
