// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Minimal non-validating XML 1.0 reader and escaping helpers.
//
// Supported: XML declaration, comments, processing instructions, elements,
// attributes, character and predefined entity references, CDATA. DOCTYPE
// declarations are rejected so no entity expansion ever happens.
namespace logibak::xml {

class ParseFailure : public std::runtime_error {
public:
    ParseFailure(std::size_t offset, const std::string& msg)
        : std::runtime_error("offset " + std::to_string(offset) + ": " + msg), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;
    /// Decoded character data directly inside this element, all runs joined.
    std::string text;
    /// Raw byte range of the character data when it is a single plain run
    /// (no entities, no CDATA); otherwise begin == end == npos.
    std::size_t raw_text_begin = std::string_view::npos;
    std::size_t raw_text_end = std::string_view::npos;

    const std::string* attribute(std::string_view name) const;
    const Element* child(std::string_view name) const;
    std::vector<const Element*> children_named(std::string_view name) const;
    /// True when the character data is empty or only XML whitespace.
    bool text_is_blank() const;
};

inline constexpr std::size_t kMaxDepth = 256;

/// Throws ParseFailure on any well-formedness error.
Element parse(std::string_view document);

/// Escapes `& < >` and CR (as `&#13;` so it survives end-of-line handling).
std::string escape_text(std::string_view s);
/// Escapes `& < > "` and TAB/LF/CR as character references.
std::string escape_attribute(std::string_view s);

/// True if every code point of UTF-8 `s` is a legal XML 1.0 character and
/// `s` has no CR (which parsers normalise away).
bool representable(std::string_view s);

}  // namespace logibak::xml
