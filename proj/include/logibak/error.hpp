// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace logibak {

/// Closed set of failure codes. The string form of each code is part of the
/// public API (HTTP bodies, CLI stderr) and must never change once shipped.
enum class ErrorCode {
    // core / catalog
    SelectionInvalid,
    IllegalIdentifier,
    ParseError,
    DuplicateKey,
    MissingStatement,
    MissingArgument,
    ExtraArgument,
    // adapters
    AdapterUnavailable,
    SessionClosed,
    UnknownDatabase,
    UnknownArticle,
    DatabaseExists,
    ConstraintViolation,
    StoreCorrupt,
    // archive
    MalformedHex,
    NotABackupFile,
    MalformedDocument,
    ChecksumMismatch,
    UnsupportedVersion,
    // engines
    SnapshotFailed,
    SinkWriteFailed,
    StagingWriteFailed,
    DialectMismatch,
    // service
    AuthFailed,
    AuthRequired,
    NoConnection,
    BadRequest,
    NotFound,
    Internal,
};

std::string_view code_string(ErrorCode code);

/// Every code in declaration order.
std::span<const ErrorCode> all_error_codes();

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// "CODE: message", the single-line rendering used by the CLI.
    std::string render() const;

private:
    ErrorCode code_;
};

}  // namespace logibak
