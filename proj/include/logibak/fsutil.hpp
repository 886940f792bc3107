// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

namespace logibak {

/// Whole-file read. Throws std::system_error.
std::string read_file(const std::filesystem::path& path);

/// Writes `bytes` to a temporary sibling, fsyncs it and renames it over
/// `path`, so readers see either the old file or the complete new one.
/// Throws std::system_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// `n` random bytes from the OS CSPRNG as lowercase hex.
std::string random_hex(std::size_t n);

}  // namespace logibak
