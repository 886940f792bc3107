// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/error.hpp"

#include <array>

namespace logibak {

namespace {

constexpr std::array kAllCodes = {
    ErrorCode::SelectionInvalid,   ErrorCode::IllegalIdentifier,
    ErrorCode::ParseError,         ErrorCode::DuplicateKey,
    ErrorCode::MissingStatement,   ErrorCode::MissingArgument,
    ErrorCode::ExtraArgument,      ErrorCode::AdapterUnavailable,
    ErrorCode::SessionClosed,      ErrorCode::UnknownDatabase,
    ErrorCode::UnknownArticle,     ErrorCode::DatabaseExists,
    ErrorCode::ConstraintViolation, ErrorCode::StoreCorrupt,
    ErrorCode::MalformedHex,       ErrorCode::NotABackupFile,
    ErrorCode::MalformedDocument,  ErrorCode::ChecksumMismatch,
    ErrorCode::UnsupportedVersion, ErrorCode::SnapshotFailed,
    ErrorCode::SinkWriteFailed,    ErrorCode::StagingWriteFailed,
    ErrorCode::DialectMismatch,    ErrorCode::AuthFailed,
    ErrorCode::AuthRequired,       ErrorCode::NoConnection,
    ErrorCode::BadRequest,         ErrorCode::NotFound,
    ErrorCode::Internal,
};

}  // namespace

std::string_view code_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::SelectionInvalid: return "SELECTION_INVALID";
    case ErrorCode::IllegalIdentifier: return "ILLEGAL_IDENTIFIER";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::DuplicateKey: return "DUPLICATE_KEY";
    case ErrorCode::MissingStatement: return "MISSING_STATEMENT";
    case ErrorCode::MissingArgument: return "MISSING_ARGUMENT";
    case ErrorCode::ExtraArgument: return "EXTRA_ARGUMENT";
    case ErrorCode::AdapterUnavailable: return "ADAPTER_UNAVAILABLE";
    case ErrorCode::SessionClosed: return "SESSION_CLOSED";
    case ErrorCode::UnknownDatabase: return "UNKNOWN_DATABASE";
    case ErrorCode::UnknownArticle: return "UNKNOWN_ARTICLE";
    case ErrorCode::DatabaseExists: return "DATABASE_EXISTS";
    case ErrorCode::ConstraintViolation: return "CONSTRAINT_VIOLATION";
    case ErrorCode::StoreCorrupt: return "STORE_CORRUPT";
    case ErrorCode::MalformedHex: return "MALFORMED_HEX";
    case ErrorCode::NotABackupFile: return "NOT_A_BACKUP_FILE";
    case ErrorCode::MalformedDocument: return "MALFORMED_DOCUMENT";
    case ErrorCode::ChecksumMismatch: return "CHECKSUM_MISMATCH";
    case ErrorCode::UnsupportedVersion: return "UNSUPPORTED_VERSION";
    case ErrorCode::SnapshotFailed: return "SNAPSHOT_FAILED";
    case ErrorCode::SinkWriteFailed: return "SINK_WRITE_FAILED";
    case ErrorCode::StagingWriteFailed: return "STAGING_WRITE_FAILED";
    case ErrorCode::DialectMismatch: return "DIALECT_MISMATCH";
    case ErrorCode::AuthFailed: return "AUTH_FAILED";
    case ErrorCode::AuthRequired: return "AUTH_REQUIRED";
    case ErrorCode::NoConnection: return "NO_CONNECTION";
    case ErrorCode::BadRequest: return "BAD_REQUEST";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::Internal: return "INTERNAL";
    }
    return "INTERNAL";
}

std::span<const ErrorCode> all_error_codes() { return kAllCodes; }

std::string Error::render() const {
    std::string out(code_string(code_));
    out += ": ";
    out += what();
    return out;
}

}  // namespace logibak
