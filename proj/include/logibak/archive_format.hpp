// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "logibak/core_model.hpp"

namespace logibak {

inline constexpr int kArchiveFormatVersion = 1;
inline constexpr std::string_view kArchiveRoot = "DataBase_Mangment_System";

/// `0x` followed by uppercase hex digit pairs.
std::string encode_blob(std::span<const std::uint8_t> bytes);
/// Accepts upper- or lowercase digits. Throws MalformedHex.
Blob decode_blob(std::string_view hex);

/// Archive text form of a non-null scalar: decimal integers, shortest
/// round-trip floats ("nan" for NaN), `true`/`false`, `0x` blobs and
/// ISO-8601 timestamps. Text is returned as is.
std::string encode_value(const Value& v);
/// Inverse of encode_value for a column of type `tag`. Nullopt when `text`
/// is not a valid literal of that type.
std::optional<Value> decode_value(ValueTag tag, std::string_view text);

/// 32 lowercase hex chars: BLAKE2b-128 of `bytes`.
std::string digest_hex(std::string_view bytes);

struct Archive {
    Dialect dialect;
    int format_version = kArchiveFormatVersion;
    std::string db_name;
    Attributes db_attributes;
    DatabaseSnapshot payload;
    std::string checksum;
};

/// Serialises `snapshot` to the archive XML. Byte-deterministic.
std::string write_archive(const DatabaseSnapshot& snapshot);

/// Parses and validates an archive. Throws Error with exactly one of
/// NotABackupFile, MalformedDocument, ChecksumMismatch, UnsupportedVersion.
Archive read_archive(std::string_view document);

/// What `inspect` shows: header fields, checksum status and article counts.
/// Never fails on a checksum mismatch; other read errors still throw.
struct ArchiveInfo {
    Dialect dialect;
    int format_version = 0;
    std::string db_name;
    std::string checksum;
    bool checksum_ok = false;
    std::map<ArticleKind, std::size_t> counts;
};

ArchiveInfo inspect_archive(std::string_view document);

std::map<ArticleKind, std::size_t> article_counts(const DatabaseSnapshot& snapshot);

/// Broken-down local wall-clock time, minute resolution.
struct WallClock {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
};

WallClock local_wall_clock(std::chrono::system_clock::time_point tp);

/// `{dialect}_{db}_{DD-MM-YYYY}_{HH.MM}.xml`
std::string default_archive_name(const Dialect& dialect, std::string_view db_name, const WallClock& when);

/// default_archive_name, suffixed `_2`, `_3`, ... until no file of that name
/// exists in `dir`.
std::string unique_archive_name(const std::filesystem::path& dir, const Dialect& dialect,
                                std::string_view db_name, const WallClock& when);

}  // namespace logibak
