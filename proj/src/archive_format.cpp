// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/archive_format.hpp"

#include <sodium.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <mutex>
#include <set>

#include "logibak/error.hpp"
#include "logibak/xml.hpp"

namespace logibak {

namespace {

constexpr char kHexDigits[] = "0123456789ABCDEF";
constexpr std::size_t kChecksumHexLen = 32;

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw Error(ErrorCode::Internal, "libsodium failed to initialise");
    });
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::string hex_of_text(std::string_view s) {
    return encode_blob({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

// ── writer ──────────────────────────────────────────────────────────

std::string encode_real(double d) {
    if (std::isnan(d)) return "nan";
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, r.ptr);
}

class DocWriter {
public:
    void line(int indent, std::string_view s) {
        out_.append(static_cast<std::size_t>(indent) * 2, ' ');
        out_ += s;
        out_ += '\n';
    }
    std::string& raw() { return out_; }

private:
    std::string out_;
};

// Text-bearing element. Text that XML cannot carry verbatim goes as hex.
std::string text_element(std::string_view tag, std::string_view extra_attrs, std::string_view text) {
    std::string out = "<";
    out += tag;
    out += extra_attrs;
    if (xml::representable(text)) {
        out += ">";
        out += xml::escape_text(text);
    } else {
        out += " encoding=\"hex\">";
        out += hex_of_text(text);
    }
    out += "</";
    out += tag;
    out += ">";
    return out;
}

std::string cell(const ColumnDef& col, const Value& v) {
    if (v.is_null()) return "<" + col.name + " null=\"true\"/>";
    if (v.tag() == ValueTag::Text) return text_element(col.name, "", v.as_text());
    return "<" + col.name + ">" + encode_value(v) + "</" + col.name + ">";
}

std::string cdata(std::string_view body) {
    std::string out = "<![CDATA[";
    std::size_t pos = 0;
    for (;;) {
        auto hit = body.find("]]>", pos);
        if (hit == std::string_view::npos) break;
        out.append(body.substr(pos, hit + 2 - pos));
        out += "]]><![CDATA[";
        pos = hit + 2;
    }
    out.append(body.substr(pos));
    out += "]]>";
    return out;
}

std::string attr(std::string_view name, std::string_view value) {
    return " " + std::string(name) + "=\"" + xml::escape_attribute(value) + "\"";
}

// ── reader ──────────────────────────────────────────────────────────

[[noreturn]] void malformed(const std::string& msg) { throw Error(ErrorCode::MalformedDocument, msg); }

void expect_blank(const xml::Element& el) {
    if (!el.text_is_blank()) malformed("unexpected character data in <" + el.name + ">");
}

const std::string& required_attr(const xml::Element& el, std::string_view name) {
    const auto* v = el.attribute(name);
    if (!v) malformed("<" + el.name + "> lacks attribute '" + std::string(name) + "'");
    return *v;
}

bool flag_attr(const xml::Element& el, std::string_view name) {
    const auto& v = required_attr(el, name);
    if (v == "true") return true;
    if (v == "false") return false;
    malformed("attribute '" + std::string(name) + "' must be true or false");
}

std::string decoded_text(const xml::Element& el) {
    const auto* enc = el.attribute("encoding");
    if (!enc) return el.text;
    if (*enc != "hex") malformed("unknown encoding '" + *enc + "'");
    if (!el.children.empty()) malformed("hex-encoded <" + el.name + "> has child elements");
    try {
        auto bytes = decode_blob(el.text);
        return std::string(bytes.begin(), bytes.end());
    } catch (const Error& e) {
        malformed(e.what());
    }
}

Value decode_cell(const ColumnDef& col, const xml::Element& el) {
    const auto* null = el.attribute("null");
    if (null) {
        if (*null != "true") malformed("null attribute must be \"true\"");
        if (!el.text.empty() || !el.children.empty()) malformed("NULL cell '" + col.name + "' has content");
        return Value::null();
    }
    if (!el.children.empty()) malformed("cell '" + col.name + "' has child elements");
    if (col.type == ValueTag::Text) return Value::text(decoded_text(el));
    if (el.attribute("encoding")) malformed("encoding attribute on non-text cell '" + col.name + "'");

    auto v = decode_value(col.type, el.text);
    if (!v) {
        malformed("bad " + std::string(to_string(col.type)) + " value '" + el.text.substr(0, 40) + "' in '" + col.name +
                  "'");
    }
    return *std::move(v);
}

TableData decode_table(const xml::Element& el) {
    expect_blank(el);
    TableData table;
    table.schema.name = required_attr(el, "name");
    const xml::Element* schema = nullptr;
    for (const auto& child : el.children) {
        if (child.name == "Schema") {
            if (schema) malformed("table '" + table.schema.name + "' has two <Schema> elements");
            schema = &child;
        } else if (child.name != "Row") {
            malformed("unexpected <" + child.name + "> in table '" + table.schema.name + "'");
        }
    }
    if (!schema) malformed("table '" + table.schema.name + "' lacks <Schema>");
    expect_blank(*schema);
    for (const auto& c : schema->children) {
        if (c.name == "Column") {
            ColumnDef col;
            col.name = required_attr(c, "name");
            auto tag = parse_value_tag(required_attr(c, "type"));
            if (!tag || *tag == ValueTag::Null) malformed("column '" + col.name + "' has a bad type");
            col.type = *tag;
            col.nullable = flag_attr(c, "nullable");
            col.is_key = flag_attr(c, "key");
            table.schema.columns.push_back(std::move(col));
        } else if (c.name == "ForeignKey") {
            table.schema.foreign_keys.push_back(
                {required_attr(c, "column"), required_attr(c, "references_table"), required_attr(c, "references_column")});
        } else {
            malformed("unexpected <" + c.name + "> in schema of '" + table.schema.name + "'");
        }
    }

    const auto& cols = table.schema.columns;
    for (const auto& child : el.children) {
        if (child.name != "Row") continue;
        expect_blank(child);
        if (child.children.size() != cols.size()) {
            malformed("row in '" + table.schema.name + "' has " + std::to_string(child.children.size()) +
                      " cells, expected " + std::to_string(cols.size()));
        }
        Row row;
        row.values.reserve(cols.size());
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (child.children[i].name != cols[i].name) {
                malformed("row in '" + table.schema.name + "' has <" + child.children[i].name + "> where <" +
                          cols[i].name + "> was expected");
            }
            row.values.push_back(decode_cell(cols[i], child.children[i]));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

struct ParsedHeader {
    xml::Element root;
    Dialect dialect;
    int version = 0;
    const xml::Element* checksum = nullptr;
    const xml::Element* database = nullptr;
};

// Steps shared by read and inspect: well-formedness, header guard, version.
ParsedHeader parse_header(std::string_view document) {
    ParsedHeader h;
    try {
        h.root = xml::parse(document);
    } catch (const xml::ParseFailure& e) {
        malformed(std::string("not well-formed XML: ") + e.what());
    }
    const auto& root = h.root;
    const auto* dbms = root.child("DBMS_name");
    h.database = root.child("DataBase");
    if (root.name != kArchiveRoot || !dbms || !h.database || !h.database->attribute("name")) {
        throw Error(ErrorCode::NotABackupFile, "the XML is not a backup file: DBMS header or database tags missing");
    }
    if (!Dialect::is_valid_name(dbms->text) || !dbms->children.empty()) {
        throw Error(ErrorCode::NotABackupFile, "the XML is not a backup file: DBMS header is empty or invalid");
    }
    h.dialect = Dialect(dbms->text);

    if (const auto* enc = root.attribute("encrypted"); enc && *enc != "false") {
        throw Error(ErrorCode::UnsupportedVersion, "encrypted archives are not supported by format version 1");
    }
    const auto* version = root.child("Format_Version");
    if (!version) throw Error(ErrorCode::UnsupportedVersion, "archive has no format version");
    if (version->text != std::to_string(kArchiveFormatVersion)) {
        throw Error(ErrorCode::UnsupportedVersion, "unsupported archive format version '" + version->text.substr(0, 20) + "'");
    }
    h.version = kArchiveFormatVersion;

    h.checksum = root.child("Checksum");
    if (!h.checksum || h.checksum->text.size() != kChecksumHexLen ||
        h.checksum->raw_text_begin == std::string_view::npos ||
        h.checksum->raw_text_end - h.checksum->raw_text_begin != kChecksumHexLen) {
        malformed("archive checksum element is missing or malformed");
    }
    return h;
}

bool checksum_matches(std::string_view document, const ParsedHeader& h) {
    std::string covered(document.substr(0, h.checksum->raw_text_begin));
    covered.append(document.substr(h.checksum->raw_text_end));
    return digest_hex(covered) == h.checksum->text;
}

DatabaseSnapshot decode_payload(const ParsedHeader& h) {
    const auto& root = h.root;
    expect_blank(root);
    std::set<std::string> seen;
    for (const auto& c : root.children) {
        static const std::set<std::string> kKnown = {"DBMS_name", "Format_Version", "Checksum", "DataBase", "Tables",
                                                     "Definitions"};
        if (!kKnown.count(c.name)) malformed("unexpected <" + c.name + "> in archive root");
        if (!seen.insert(c.name).second) malformed("duplicate <" + c.name + "> in archive root");
    }

    DatabaseSnapshot s;
    s.dialect = h.dialect;
    s.db_name = *h.database->attribute("name");
    expect_blank(*h.database);
    for (const auto& a : h.database->children) {
        if (a.name != "Attribute") malformed("unexpected <" + a.name + "> in <DataBase>");
        if (!a.children.empty()) malformed("attribute element has children");
        s.db_attributes.emplace_back(required_attr(a, "name"), decoded_text(a));
    }

    if (const auto* tables = root.child("Tables")) {
        expect_blank(*tables);
        for (const auto& t : tables->children) {
            if (t.name != "Table") malformed("unexpected <" + t.name + "> in <Tables>");
            s.tables.push_back(decode_table(t));
        }
    }
    if (const auto* defs = root.child("Definitions")) {
        expect_blank(*defs);
        for (const auto& d : defs->children) {
            if (d.name != "Definition") malformed("unexpected <" + d.name + "> in <Definitions>");
            auto kind = parse_article_kind(required_attr(d, "kind"));
            if (!kind || !is_definition_kind(*kind)) malformed("bad definition kind");
            if (!d.children.empty()) malformed("definition has child elements");
            s.definitions.push_back({{*kind, required_attr(d, "name")}, decoded_text(d)});
        }
    }

    auto problems = check_snapshot(s);
    if (!problems.empty()) malformed("inconsistent archive payload: " + problems.front());
    return s;
}

}  // namespace

// ── blob codec ──────────────────────────────────────────────────────

std::string encode_blob(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve(2 + bytes.size() * 2);
    out += "0x";
    for (auto b : bytes) {
        out += kHexDigits[b >> 4];
        out += kHexDigits[b & 0xF];
    }
    return out;
}

Blob decode_blob(std::string_view hex) {
    if (hex.size() < 2 || hex[0] != '0' || (hex[1] != 'x' && hex[1] != 'X')) {
        throw Error(ErrorCode::MalformedHex, "hex blob must start with 0x");
    }
    hex.remove_prefix(2);
    if (hex.size() % 2 != 0) throw Error(ErrorCode::MalformedHex, "hex blob has an odd number of digits");
    Blob out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = hex_value(hex[i]), lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::MalformedHex, "bad hex digit at position " + std::to_string(i + 2));
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

std::string encode_value(const Value& v) {
    switch (v.tag()) {
    case ValueTag::Text: return v.as_text();
    case ValueTag::Bool: return v.as_bool() ? "true" : "false";
    case ValueTag::Int64: return std::to_string(v.as_int());
    case ValueTag::Float64: return encode_real(v.as_real());
    case ValueTag::Blob: return encode_blob(v.as_blob());
    case ValueTag::Timestamp: return format_timestamp(v.as_timestamp());
    case ValueTag::Null: break;
    }
    return {};
}

std::optional<Value> decode_value(ValueTag tag, std::string_view t) {
    switch (tag) {
    case ValueTag::Text: return Value::text(std::string(t));
    case ValueTag::Bool:
        if (t == "true") return Value::boolean(true);
        if (t == "false") return Value::boolean(false);
        return std::nullopt;
    case ValueTag::Int64: {
        std::int64_t i;
        auto r = std::from_chars(t.data(), t.data() + t.size(), i);
        if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) return std::nullopt;
        return Value::integer(i);
    }
    case ValueTag::Float64: {
        double d;
        auto r = std::from_chars(t.data(), t.data() + t.size(), d);
        if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) return std::nullopt;
        return Value::real(d);
    }
    case ValueTag::Blob:
        try {
            return Value::blob(decode_blob(t));
        } catch (const Error&) {
            return std::nullopt;
        }
    case ValueTag::Timestamp:
        if (auto ts = parse_timestamp(t)) return Value::timestamp(*ts);
        return std::nullopt;
    case ValueTag::Null: break;
    }
    return std::nullopt;
}

std::string digest_hex(std::string_view bytes) {
    ensure_sodium();
    unsigned char hash[kChecksumHexLen / 2];
    crypto_generichash(hash, sizeof hash, reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), nullptr, 0);
    static constexpr char kLower[] = "0123456789abcdef";
    std::string out;
    for (auto b : hash) {
        out += kLower[b >> 4];
        out += kLower[b & 0xF];
    }
    return out;
}

// ── write ───────────────────────────────────────────────────────────

std::string write_archive(const DatabaseSnapshot& s) {
    DocWriter w;
    w.line(0, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    w.line(0, "<" + std::string(kArchiveRoot) + " encrypted=\"false\">");
    w.line(1, "<DBMS_name>" + s.dialect.name() + "</DBMS_name>");
    w.line(1, "<Format_Version>" + std::to_string(kArchiveFormatVersion) + "</Format_Version>");
    w.line(1, "<Checksum></Checksum>");
    const auto checksum_at = w.raw().size() - std::string_view("</Checksum>\n").size();

    if (s.db_attributes.empty()) {
        w.line(1, "<DataBase" + attr("name", s.db_name) + "/>");
    } else {
        w.line(1, "<DataBase" + attr("name", s.db_name) + ">");
        for (const auto& [k, v] : s.db_attributes) w.line(2, text_element("Attribute", attr("name", k), v));
        w.line(1, "</DataBase>");
    }

    if (!s.tables.empty()) {
        w.line(1, "<Tables>");
        for (const auto& t : s.tables) {
            w.line(2, "<Table" + attr("name", t.schema.name) + ">");
            w.line(3, "<Schema>");
            for (const auto& c : t.schema.columns) {
                w.line(4, "<Column" + attr("name", c.name) + attr("type", to_string(c.type)) +
                              attr("nullable", c.nullable ? "true" : "false") + attr("key", c.is_key ? "true" : "false") +
                              "/>");
            }
            for (const auto& fk : t.schema.foreign_keys) {
                w.line(4, "<ForeignKey" + attr("column", fk.column) + attr("references_table", fk.ref_table) +
                              attr("references_column", fk.ref_column) + "/>");
            }
            w.line(3, "</Schema>");
            for (const auto& row : t.rows) {
                w.line(3, "<Row>");
                for (std::size_t i = 0; i < t.schema.columns.size(); ++i) {
                    w.line(4, cell(t.schema.columns[i], row.values[i]));
                }
                w.line(3, "</Row>");
            }
            w.line(2, "</Table>");
        }
        w.line(1, "</Tables>");
    }

    if (!s.definitions.empty()) {
        w.line(1, "<Definitions>");
        for (const auto& d : s.definitions) {
            const auto head = "<Definition" + attr("kind", to_string(d.ref.kind)) + attr("name", d.ref.name);
            if (xml::representable(d.body)) {
                w.line(2, head + ">" + cdata(d.body) + "</Definition>");
            } else {
                w.line(2, head + " encoding=\"hex\">" + hex_of_text(d.body) + "</Definition>");
            }
        }
        w.line(1, "</Definitions>");
    }
    w.line(0, "</" + std::string(kArchiveRoot) + ">");

    std::string doc = std::move(w.raw());
    doc.insert(checksum_at, digest_hex(doc));
    return doc;
}

// ── read ────────────────────────────────────────────────────────────

Archive read_archive(std::string_view document) {
    auto header = parse_header(document);
    if (!checksum_matches(document, header)) {
        throw Error(ErrorCode::ChecksumMismatch, "archive checksum does not match its contents (damaged file?)");
    }
    Archive a;
    a.payload = decode_payload(header);
    a.dialect = header.dialect;
    a.format_version = header.version;
    a.db_name = a.payload.db_name;
    a.db_attributes = a.payload.db_attributes;
    a.checksum = header.checksum->text;
    return a;
}

ArchiveInfo inspect_archive(std::string_view document) {
    auto header = parse_header(document);
    ArchiveInfo info;
    info.dialect = header.dialect;
    info.format_version = header.version;
    info.db_name = *header.database->attribute("name");
    info.checksum = header.checksum->text;
    info.checksum_ok = checksum_matches(document, header);
    info.counts = article_counts(decode_payload(header));
    return info;
}

std::map<ArticleKind, std::size_t> article_counts(const DatabaseSnapshot& s) {
    std::map<ArticleKind, std::size_t> counts;
    for (auto k : kAllArticleKinds) counts[k] = 0;
    counts[ArticleKind::Table] = s.tables.size();
    for (const auto& t : s.tables) counts[ArticleKind::Record] += t.rows.size();
    for (const auto& d : s.definitions) ++counts[d.ref.kind];
    return counts;
}

// ── naming ──────────────────────────────────────────────────────────

WallClock local_wall_clock(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    localtime_r(&t, &tm);
    return {tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min};
}

std::string default_archive_name(const Dialect& dialect, std::string_view db_name, const WallClock& when) {
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "%02d-%02d-%04d_%02d.%02d", when.day, when.month, when.year, when.hour,
                  when.minute);
    return dialect.name() + "_" + std::string(db_name) + "_" + stamp + ".xml";
}

std::string unique_archive_name(const std::filesystem::path& dir, const Dialect& dialect, std::string_view db_name,
                                const WallClock& when) {
    auto name = default_archive_name(dialect, db_name, when);
    if (!std::filesystem::exists(dir / name)) return name;
    const auto stem = name.substr(0, name.size() - 4);
    for (int n = 2;; ++n) {
        auto candidate = stem + "_" + std::to_string(n) + ".xml";
        if (!std::filesystem::exists(dir / candidate)) return candidate;
    }
}

}  // namespace logibak
