// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "logibak/archive_format.hpp"
#include "logibak/core_model.hpp"
#include "logibak/dbms_adapter.hpp"

namespace logibak {

enum class RestoreMode { PartialExist, PartialNew, FullExist, FullNew, Merge };

/// `partial-exist`, `partial-new`, `full-exist`, `full-new`, `merge`.
std::string_view to_string(RestoreMode mode);
std::optional<RestoreMode> parse_restore_mode(std::string_view s);

/// True for the modes that create their target database.
bool creates_database(RestoreMode mode) noexcept;

struct RestoreReport {
    RestoreMode mode = RestoreMode::FullNew;
    Dialect dialect;
    std::string db_name;
    bool created = false;
    /// Clearing and applying committed together.
    bool atomic = true;
    std::map<ArticleKind, std::size_t> added;
    std::map<ArticleKind, std::size_t> replaced;
    std::map<ArticleKind, std::size_t> kept;
    std::map<ArticleKind, std::size_t> removed;
};

/// Server-side holding area for uploaded archives. Each upload gets its
/// own file named by a random id, so callers never see or choose paths.
class Stager {
public:
    explicit Stager(std::filesystem::path dir);

    struct Staged {
        std::string id;
        std::filesystem::path path;
    };

    /// Throws StagingWriteFailed.
    Staged stage(std::string_view bytes);

    /// Throws NotFound for ids that are malformed or not staged.
    std::filesystem::path path_of(const std::string& id) const;

    /// Deletes the staged file. Returns false if it was already gone.
    bool cleanup(const std::string& id);

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
};

class RestoreEngine {
public:
    /// Pre-flight checks (dialect, target existence) run before anything is
    /// touched. Throws DialectMismatch, DatabaseExists, UnknownDatabase,
    /// ConstraintViolation or the adapter's error.
    RestoreReport restore(Session& session, const Archive& archive, RestoreMode mode, const std::string& target_db);

    /// read_archive, then restore. Archive errors are thrown before the
    /// session is used.
    RestoreReport restore_document(Session& session, std::string_view document, RestoreMode mode,
                                   const std::string& target_db);

    /// Restores a staged upload and always removes it, pass or fail.
    RestoreReport restore_staged(Session& session, Stager& stager, const std::string& staged_id, RestoreMode mode,
                                 const std::string& target_db);

private:
    std::shared_ptr<std::mutex> lock_for(const std::string& db);

    std::mutex locks_mu_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace logibak
