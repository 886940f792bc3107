// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/xml.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>

namespace logibak::xml {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_start(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
    return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool legal_code_point(std::uint32_t cp) {
    return cp == 0x9 || cp == 0xA || cp == 0xD || (cp >= 0x20 && cp <= 0xD7FF) || (cp >= 0xE000 && cp <= 0xFFFD) ||
           (cp >= 0x10000 && cp <= 0x10FFFF);
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Decodes one UTF-8 sequence at `i`; returns 0 length on invalid input.
std::size_t decode_utf8(std::string_view s, std::size_t i, std::uint32_t& cp) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    if (c < 0x80) {
        cp = c;
        return 1;
    } else if ((c & 0xE0) == 0xC0) {
        len = 2;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        len = 3;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        len = 4;
        cp = c & 0x07;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        const auto cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return 0;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    return len;
}

class Parser {
public:
    explicit Parser(std::string_view doc) : doc_(doc) {}

    Element run() {
        check_characters();
        if (doc_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
        if (doc_.substr(pos_, 5) == "<?xml") parse_pi();
        skip_misc();
        if (eof() || peek() != '<') fail("expected root element");
        Element root = parse_element(1);
        skip_misc();
        if (!eof()) fail("content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseFailure(pos_, msg); }

    bool eof() const { return pos_ >= doc_.size(); }
    char peek() const { return doc_[pos_]; }
    bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

    void expect(std::string_view s) {
        if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
        pos_ += s.size();
    }

    void skip_space() {
        while (!eof() && is_space(peek())) ++pos_;
    }

    void check_characters() {
        std::size_t i = 0;
        while (i < doc_.size()) {
            std::uint32_t cp;
            const auto len = decode_utf8(doc_, i, cp);
            if (len == 0) throw ParseFailure(i, "invalid UTF-8");
            if (!legal_code_point(cp)) throw ParseFailure(i, "illegal XML character");
            i += len;
        }
    }

    void skip_misc() {
        for (;;) {
            skip_space();
            if (starts_with("<!--")) {
                parse_comment();
            } else if (starts_with("<?")) {
                parse_pi();
            } else if (starts_with("<!")) {
                fail("DOCTYPE and other declarations are not supported");
            } else {
                return;
            }
        }
    }

    void parse_comment() {
        expect("<!--");
        const auto end = doc_.find("--", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end;
        expect("-->");
    }

    void parse_pi() {
        expect("<?");
        parse_name();
        const auto end = doc_.find("?>", pos_);
        if (end == std::string_view::npos) fail("unterminated processing instruction");
        pos_ = end + 2;
    }

    std::string parse_name() {
        if (eof() || !is_name_start(static_cast<unsigned char>(peek()))) fail("expected a name");
        const auto start = pos_;
        while (!eof() && is_name_char(static_cast<unsigned char>(peek()))) ++pos_;
        return std::string(doc_.substr(start, pos_ - start));
    }

    // At '&'. Appends the decoded reference.
    void parse_reference(std::string& out) {
        expect("&");
        const auto semi = doc_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 12) fail("unterminated entity reference");
        const auto ref = doc_.substr(pos_, semi - pos_);
        if (ref == "lt") {
            out += '<';
        } else if (ref == "gt") {
            out += '>';
        } else if (ref == "amp") {
            out += '&';
        } else if (ref == "quot") {
            out += '"';
        } else if (ref == "apos") {
            out += '\'';
        } else if (ref.size() > 1 && ref[0] == '#') {
            std::uint32_t cp = 0;
            const bool hex = ref[1] == 'x';
            const auto digits = ref.substr(hex ? 2 : 1);
            if (digits.empty()) fail("empty character reference");
            auto r = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (r.ec != std::errc() || r.ptr != digits.data() + digits.size()) fail("bad character reference");
            if (!legal_code_point(cp)) fail("character reference to illegal character");
            append_utf8(out, cp);
        } else {
            fail("unknown entity '&" + std::string(ref) + ";'");
        }
        pos_ = semi + 1;
    }

    std::string parse_attribute_value() {
        if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
        const char quote = peek();
        ++pos_;
        std::string value;
        for (;;) {
            if (eof()) fail("unterminated attribute value");
            const char c = peek();
            if (c == quote) {
                ++pos_;
                return value;
            }
            if (c == '<') fail("'<' in attribute value");
            if (c == '&') {
                parse_reference(value);
            } else {
                // attribute-value normalisation for literal whitespace
                value += is_space(c) ? ' ' : c;
                ++pos_;
            }
        }
    }

    Element parse_element(std::size_t depth) {
        if (depth > kMaxDepth) fail("elements nested too deeply");
        expect("<");
        Element el;
        el.name = parse_name();
        for (;;) {
            const auto before = pos_;
            skip_space();
            if (eof()) fail("unterminated start tag");
            if (starts_with("/>")) {
                pos_ += 2;
                return el;
            }
            if (peek() == '>') {
                ++pos_;
                break;
            }
            if (pos_ == before) fail("expected whitespace before attribute");
            auto name = parse_name();
            skip_space();
            expect("=");
            skip_space();
            auto value = parse_attribute_value();
            if (el.attribute(name)) fail("duplicate attribute '" + name + "'");
            el.attributes.emplace_back(std::move(name), std::move(value));
        }
        parse_content(el, depth);
        return el;
    }

    void parse_content(Element& el, std::size_t depth) {
        bool plain = true;  // single raw run so far
        std::size_t runs = 0;
        for (;;) {
            if (eof()) fail("unterminated element '" + el.name + "'");
            if (starts_with("</")) {
                pos_ += 2;
                if (parse_name() != el.name) fail("mismatched end tag for '" + el.name + "'");
                skip_space();
                expect(">");
                if (!plain || runs != 1) {
                    el.raw_text_begin = el.raw_text_end = std::string_view::npos;
                }
                return;
            }
            if (starts_with("<!--")) {
                parse_comment();
            } else if (starts_with("<![CDATA[")) {
                pos_ += 9;
                const auto end = doc_.find("]]>", pos_);
                if (end == std::string_view::npos) fail("unterminated CDATA section");
                el.text.append(doc_.substr(pos_, end - pos_));
                pos_ = end + 3;
                plain = false;
            } else if (starts_with("<?")) {
                parse_pi();
            } else if (starts_with("<!")) {
                fail("declaration inside element");
            } else if (peek() == '<') {
                el.children.push_back(parse_element(depth + 1));
            } else {
                const auto start = pos_;
                bool had_ref = false;
                while (!eof() && peek() != '<') {
                    if (peek() == '&') {
                        parse_reference(el.text);
                        had_ref = true;
                    } else {
                        if (starts_with("]]>")) fail("']]>' in character data");
                        el.text += peek();
                        ++pos_;
                    }
                }
                if (had_ref) plain = false;
                ++runs;
                el.raw_text_begin = start;
                el.raw_text_end = pos_;
            }
        }
    }

    std::string_view doc_;
    std::size_t pos_ = 0;
};

}  // namespace

const std::string* Element::attribute(std::string_view name) const {
    for (const auto& [k, v] : attributes) {
        if (k == name) return &v;
    }
    return nullptr;
}

const Element* Element::child(std::string_view name) const {
    for (const auto& c : children) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view name) const {
    std::vector<const Element*> out;
    for (const auto& c : children) {
        if (c.name == name) out.push_back(&c);
    }
    return out;
}

bool Element::text_is_blank() const {
    return std::all_of(text.begin(), text.end(), is_space);
}

Element parse(std::string_view document) { return Parser(document).run(); }

std::string escape_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string escape_attribute(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\t': out += "&#9;"; break;
        case '\n': out += "&#10;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
    return out;
}

bool representable(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        std::uint32_t cp;
        const auto len = decode_utf8(s, i, cp);
        if (len == 0 || cp == 0xD || !legal_code_point(cp)) return false;
        i += len;
    }
    return true;
}

}  // namespace logibak::xml
