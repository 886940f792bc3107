// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "logibak/dbms_adapter.hpp"
#include "logibak/statement_catalog.hpp"

namespace logibak {

/// Runtime configuration shared by the CLI and the service. Loaded from a
/// JSON document with nested keys, e.g. `{"sinks": {"primary_dir": "..."}}`.
/// Relative paths are resolved against the config file's directory.
struct Config {
    std::vector<std::string> refengine_roots;          // refengine.roots
    std::filesystem::path primary_dir = "archives";    // sinks.primary_dir
    std::optional<std::filesystem::path> mirror_dir;   // sinks.mirror_dir
    std::optional<std::string> remote_url;             // sinks.remote_url
    std::filesystem::path staging_dir;                 // restore.staging_dir
    std::string bind_addr = "127.0.0.1:8080";          // http.bind_addr
    std::optional<std::filesystem::path> static_dir;   // http.static_dir
    std::optional<std::filesystem::path> users_file;   // auth.users_file
    std::chrono::minutes session_idle{30};             // auth.session_idle_minutes
    std::filesystem::path catalog_file = LOGIBAK_DEFAULT_CATALOG;  // catalog.file

    /// Defaults; the staging dir is `<system temp>/Temp_Restore`.
    static Config defaults();

    /// Throws ParseError on malformed JSON, unknown keys or wrong types.
    static Config load(const std::filesystem::path& file);
    static Config parse(std::string_view json, const std::filesystem::path& base_dir = {});
};

/// RefEngine over the configured roots plus a catalog-driven adapter for
/// every other dialect in the catalog.
AdapterRegistry make_registry(const Config& config, std::shared_ptr<const StatementCatalog> catalog);

}  // namespace logibak
