// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/ref_engine.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <regex>
#include <system_error>

#include "logibak/archive_format.hpp"
#include "logibak/error.hpp"
#include "logibak/fsutil.hpp"

namespace fs = std::filesystem;

namespace logibak::refengine {

namespace {

constexpr std::string_view kMagic = "RFE1";
constexpr std::uint8_t kFileVersion = 1;
constexpr std::uint8_t kKindDatabase = 1;
constexpr std::uint8_t kKindMeta = 2;
constexpr std::int64_t kFirstDbid = 5;  // ids 1..4 are reserved, as in SQL Server

[[noreturn]] void violation(const std::string& msg) { throw Error(ErrorCode::ConstraintViolation, msg); }

bool is_owned_attribute(std::string_view key) {
    return std::find(std::begin(kOwnedAttributes), std::end(kOwnedAttributes), key) != std::end(kOwnedAttributes);
}

// ── binary codec ────────────────────────────────────────────────────

class Encoder {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    void value(const Value& v) {
        u8(static_cast<std::uint8_t>(v.tag()));
        switch (v.tag()) {
        case ValueTag::Null: break;
        case ValueTag::Bool: u8(v.as_bool() ? 1 : 0); break;
        case ValueTag::Int64: u64(static_cast<std::uint64_t>(v.as_int())); break;
        case ValueTag::Float64: u64(std::bit_cast<std::uint64_t>(v.as_real())); break;
        case ValueTag::Text: str(v.as_text()); break;
        case ValueTag::Blob: {
            const auto& b = v.as_blob();
            str(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
            break;
        }
        case ValueTag::Timestamp: u64(static_cast<std::uint64_t>(v.as_timestamp().micros)); break;
        }
    }
    std::string& bytes() { return out_; }

private:
    std::string out_;
};

class Decoder {
public:
    explicit Decoder(std::string_view in) : in_(in) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(in_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    Value value() {
        const auto tag = u8();
        switch (static_cast<ValueTag>(tag)) {
        case ValueTag::Null: return Value::null();
        case ValueTag::Bool: return Value::boolean(u8() != 0);
        case ValueTag::Int64: return Value::integer(static_cast<std::int64_t>(u64()));
        case ValueTag::Float64: return Value::real(std::bit_cast<double>(u64()));
        case ValueTag::Text: return Value::text(str());
        case ValueTag::Blob: {
            auto s = str();
            return Value::blob(Blob(s.begin(), s.end()));
        }
        case ValueTag::Timestamp: return Value::timestamp({static_cast<std::int64_t>(u64())});
        }
        fail("bad value tag");
    }
    bool done() const { return pos_ == in_.size(); }

    [[noreturn]] static void fail(const std::string& why) {
        throw Error(ErrorCode::StoreCorrupt, "store file is corrupt: " + why);
    }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) fail("unexpected end of data");
    }

    std::string_view in_;
    std::size_t pos_ = 0;
};

std::string seal(std::uint8_t kind, Encoder& body) {
    std::string out(kMagic);
    out.push_back(static_cast<char>(kFileVersion));
    out.push_back(static_cast<char>(kind));
    out += body.bytes();
    out += digest_hex(out);
    return out;
}

std::string_view unseal(std::uint8_t kind, std::string_view bytes) {
    if (bytes.size() < kMagic.size() + 2 + 32 || bytes.substr(0, kMagic.size()) != kMagic) {
        Decoder::fail("missing RFE1 magic");
    }
    const auto body = bytes.substr(0, bytes.size() - 32);
    if (digest_hex(body) != bytes.substr(bytes.size() - 32)) Decoder::fail("digest mismatch");
    if (static_cast<std::uint8_t>(bytes[4]) != kFileVersion) Decoder::fail("unsupported file version");
    if (static_cast<std::uint8_t>(bytes[5]) != kind) Decoder::fail("unexpected file kind");
    return body.substr(6);
}

std::string encode_meta(std::int64_t next_dbid) {
    Encoder e;
    e.u64(static_cast<std::uint64_t>(next_dbid));
    return seal(kKindMeta, e);
}

std::int64_t decode_meta(std::string_view bytes) {
    Decoder d(unseal(kKindMeta, bytes));
    const auto next = static_cast<std::int64_t>(d.u64());
    if (!d.done()) Decoder::fail("trailing bytes");
    return next;
}

// ── integrity ───────────────────────────────────────────────────────

void check_schema(const TableSchema& schema) {
    if (!is_identifier(schema.name)) violation("table name '" + schema.name + "' is not an identifier");
    if (schema.columns.empty()) violation("table '" + schema.name + "' has no columns");
    std::set<std::string> seen;
    for (const auto& c : schema.columns) {
        if (!is_identifier(c.name)) violation("column '" + schema.name + "." + c.name + "' is not an identifier");
        if (!seen.insert(c.name).second) violation("duplicate column '" + schema.name + "." + c.name + "'");
        if (c.type == ValueTag::Null) violation("column '" + schema.name + "." + c.name + "' has type Null");
    }
    for (const auto& fk : schema.foreign_keys) {
        if (!schema.column_index(fk.column)) {
            violation("foreign key on unknown column '" + schema.name + "." + fk.column + "'");
        }
    }
}

void check_row(const TableSchema& schema, const Row& row) {
    if (row.values.size() != schema.columns.size()) violation("row arity mismatch in table '" + schema.name + "'");
    for (std::size_t i = 0; i < row.values.size(); ++i) {
        const auto& v = row.values[i];
        const auto& c = schema.columns[i];
        const auto where = "'" + schema.name + "." + c.name + "'";
        if (v.is_null()) {
            if (!c.nullable) violation("NULL in non-nullable column " + where);
            continue;
        }
        if (v.tag() != c.type) violation(std::string(to_string(v.tag())) + " value in column " + where);
        if (v.tag() == ValueTag::Text && !is_valid_utf8(v.as_text())) violation("invalid UTF-8 in column " + where);
        if (v.tag() == ValueTag::Timestamp &&
            (v.as_timestamp().micros < kMinTimestampMicros || v.as_timestamp().micros > kMaxTimestampMicros)) {
            violation("timestamp out of range in column " + where);
        }
    }
}

void insert_row(TableState& t, Row row) {
    check_row(t.schema, row);
    auto key = key_of(t.schema, row);
    std::string shown;
    if (t.rows.contains(key)) {
        for (const auto& v : key) shown += (shown.empty() ? "" : ", ") + v.debug_string();
        violation("duplicate key (" + shown + ") in table '" + t.schema.name + "'");
    }
    t.rows.emplace(std::move(key), std::move(row));
}

/// Every foreign-key value of `table` must exist in its target column.
void check_foreign_keys(const DbState& st, const TableState& table) {
    for (const auto& fk : table.schema.foreign_keys) {
        const auto where = table.schema.name + "." + fk.column;
        auto target_it = st.tables.find(fk.ref_table);
        if (target_it == st.tables.end()) {
            violation("foreign key '" + where + "' references absent table '" + fk.ref_table + "'");
        }
        const auto& target = *target_it->second;
        const auto ref_col = target.schema.column_index(fk.ref_column);
        if (!ref_col) {
            violation("foreign key '" + where + "' references absent column '" + fk.ref_table + "." + fk.ref_column +
                      "'");
        }
        std::set<Value> present;
        for (const auto& [_, row] : target.rows) present.insert(row.values[*ref_col]);
        const auto col = *table.schema.column_index(fk.column);
        for (const auto& [_, row] : table.rows) {
            const auto& v = row.values[col];
            if (!v.is_null() && !present.contains(v)) {
                violation("foreign key '" + where + "' value " + v.debug_string() + " has no match in '" +
                          fk.ref_table + "." + fk.ref_column + "'");
            }
        }
    }
}

void check_definition(const DbState& st, const ArticleRef& ref, const std::string& body) {
    if (!is_definition_kind(ref.kind)) violation("article '" + ref.name + "' is not a definition");
    if (!is_identifier(ref.name)) violation("definition name '" + ref.name + "' is not an identifier");
    if (body.empty()) violation(std::string(to_string(ref.kind)) + " '" + ref.name + "' has an empty body");
    if (!is_valid_utf8(body)) violation(std::string(to_string(ref.kind)) + " '" + ref.name + "' is not valid UTF-8");
    for (const auto& dep : definition_references({ref, body})) {
        if (st.tables.contains(dep) || st.definitions.contains({ArticleKind::View, dep})) continue;
        violation(std::string(to_string(ref.kind)) + " '" + ref.name + "' references unknown table or view '" + dep +
                  "'");
    }
}

void check_state(const DbState& st) {
    for (const auto& [_, t] : st.tables) check_foreign_keys(st, *t);
    for (const auto& [ref, body] : st.definitions) check_definition(st, ref, body);
}

std::shared_ptr<TableState> table_from(const TableData& data) {
    check_schema(data.schema);
    auto t = std::make_shared<TableState>();
    t->schema = data.schema;
    for (const auto& row : data.rows) insert_row(*t, row);
    return t;
}

/// Tables in foreign-key dependency order; ties broken by name.
std::vector<const TableData*> dependency_order(const DatabaseSnapshot& s) {
    std::map<std::string, const TableData*> by_name;
    for (const auto& t : s.tables) {
        if (!by_name.emplace(t.schema.name, &t).second) violation("duplicate table '" + t.schema.name + "'");
    }
    std::map<std::string, std::set<std::string>> depends_on;
    std::map<std::string, std::set<std::string>> dependents;
    for (const auto& [name, t] : by_name) {
        depends_on[name];
        for (const auto& fk : t->schema.foreign_keys) {
            if (fk.ref_table == name || !by_name.contains(fk.ref_table)) continue;
            depends_on[name].insert(fk.ref_table);
            dependents[fk.ref_table].insert(name);
        }
    }
    std::set<std::string> ready;
    for (const auto& [name, deps] : depends_on) {
        if (deps.empty()) ready.insert(name);
    }
    std::vector<const TableData*> order;
    while (!ready.empty()) {
        const auto name = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(by_name[name]);
        for (const auto& d : dependents[name]) {
            auto& deps = depends_on[d];
            deps.erase(name);
            if (deps.empty()) ready.insert(d);
        }
    }
    if (order.size() != by_name.size()) violation("cyclic foreign keys");
    return order;
}

void apply_attributes(DbState& st, const Attributes& attrs) {
    for (const auto& [k, v] : attrs) {
        if (is_owned_attribute(k) || !is_identifier(k)) continue;
        auto it = std::find_if(st.attributes.begin(), st.attributes.end(), [&](const auto& kv) { return kv.first == k; });
        if (it != st.attributes.end()) {
            it->second = v;
        } else {
            st.attributes.emplace_back(k, v);
        }
    }
}

constexpr ArticleKind kDefinitionApplyOrder[] = {ArticleKind::View, ArticleKind::Function,
                                                 ArticleKind::StoredProcedure, ArticleKind::Trigger};

void apply_into(DbState& st, const DatabaseSnapshot& s) {
    if (!st.tables.empty() || !st.definitions.empty()) violation("database '" + st.name + "' is not empty");
    for (const auto* data : dependency_order(s)) {
        auto t = table_from(*data);
        st.tables.emplace(data->schema.name, t);
        check_foreign_keys(st, *t);
    }
    for (auto kind : kDefinitionApplyOrder) {
        for (const auto& d : s.definitions) {
            if (d.ref.kind != kind) continue;
            if (!st.definitions.emplace(d.ref, d.body).second) {
                violation("duplicate " + std::string(to_string(kind)) + " '" + d.ref.name + "'");
            }
        }
        for (const auto& [ref, body] : st.definitions) {
            if (ref.kind == kind) check_definition(st, ref, body);
        }
    }
    for (const auto& d : s.definitions) {
        if (!is_definition_kind(d.ref.kind)) violation("article '" + d.ref.name + "' is not a definition");
    }
    apply_attributes(st, s.db_attributes);
}

MergeOutcome merge_into(DbState& st, const DatabaseSnapshot& s) {
    MergeOutcome out;
    for (auto kind : kAllArticleKinds) out.added[kind] = out.replaced[kind] = out.kept[kind] = 0;

    std::set<std::string> touched;
    for (const auto& data : s.tables) {
        if (!touched.insert(data.schema.name).second) violation("duplicate table '" + data.schema.name + "'");
        auto t = table_from(data);
        auto& bucket = st.tables.contains(data.schema.name) ? out.replaced : out.added;
        bucket[ArticleKind::Table] += 1;
        bucket[ArticleKind::Record] += t->rows.size();
        st.tables[data.schema.name] = t;
    }
    for (const auto& [name, t] : st.tables) {
        if (touched.contains(name)) continue;
        out.kept[ArticleKind::Table] += 1;
        out.kept[ArticleKind::Record] += t->rows.size();
    }

    std::set<ArticleRef> named;
    for (const auto& d : s.definitions) {
        if (!is_definition_kind(d.ref.kind)) violation("article '" + d.ref.name + "' is not a definition");
        if (!named.insert(d.ref).second) {
            violation("duplicate " + std::string(to_string(d.ref.kind)) + " '" + d.ref.name + "'");
        }
        auto& bucket = st.definitions.contains(d.ref) ? out.replaced : out.added;
        bucket[d.ref.kind] += 1;
        st.definitions[d.ref] = d.body;
    }
    for (const auto& [ref, _] : st.definitions) {
        if (!named.contains(ref)) out.kept[ref.kind] += 1;
    }
    return out;
}

// ── process-wide store registry ─────────────────────────────────────

std::mutex g_stores_mu;
std::map<std::string, std::weak_ptr<Store>> g_stores;

class RefSession : public AdapterSession {
public:
    explicit RefSession(std::shared_ptr<Store> store) : store_(std::move(store)) {}

    std::vector<std::string> list_databases() override { return store_->databases(); }
    DatabaseSnapshot describe(const std::string& db) override { return store_->describe(db); }
    DatabaseSnapshot snapshot(const std::string& db, const Selection& sel) override {
        return store_->snapshot(db, sel);
    }
    void create_database(const std::string& name) override { store_->create_database(name); }
    void drop_contents(const std::string& db) override { store_->drop_contents(db); }
    void apply_snapshot(const std::string& db, const DatabaseSnapshot& s) override { store_->apply(db, s); }
    void replace_contents(const std::string& db, const DatabaseSnapshot& s) override { store_->replace(db, s); }
    bool transactional() const override { return true; }
    MergeOutcome merge_snapshot(const std::string& db, const DatabaseSnapshot& s) override {
        return store_->merge(db, s);
    }
    void close() override { store_.reset(); }

private:
    std::shared_ptr<Store> store_;
};

}  // namespace

// ── public codec ────────────────────────────────────────────────────

std::string encode_store_file(const DbState& st) {
    Encoder e;
    e.str(st.name);
    e.u32(static_cast<std::uint32_t>(st.attributes.size()));
    for (const auto& [k, v] : st.attributes) {
        e.str(k);
        e.str(v);
    }
    e.u32(static_cast<std::uint32_t>(st.tables.size()));
    for (const auto& [name, t] : st.tables) {
        e.str(name);
        e.u32(static_cast<std::uint32_t>(t->schema.columns.size()));
        for (const auto& c : t->schema.columns) {
            e.str(c.name);
            e.u8(static_cast<std::uint8_t>(c.type));
            e.u8(c.nullable ? 1 : 0);
            e.u8(c.is_key ? 1 : 0);
        }
        e.u32(static_cast<std::uint32_t>(t->schema.foreign_keys.size()));
        for (const auto& fk : t->schema.foreign_keys) {
            e.str(fk.column);
            e.str(fk.ref_table);
            e.str(fk.ref_column);
        }
        e.u64(t->rows.size());
        for (const auto& [_, row] : t->rows) {
            for (const auto& v : row.values) e.value(v);
        }
    }
    e.u32(static_cast<std::uint32_t>(st.definitions.size()));
    for (const auto& [ref, body] : st.definitions) {
        e.u8(static_cast<std::uint8_t>(ref.kind));
        e.str(ref.name);
        e.str(body);
    }
    return seal(kKindDatabase, e);
}

DbState decode_store_file(std::string_view bytes) {
    Decoder d(unseal(kKindDatabase, bytes));
    DbState st;
    st.name = d.str();
    for (auto n = d.u32(); n > 0; --n) {
        auto k = d.str();
        st.attributes.emplace_back(std::move(k), d.str());
    }
    try {
        for (auto n = d.u32(); n > 0; --n) {
            auto t = std::make_shared<TableState>();
            t->schema.name = d.str();
            for (auto c = d.u32(); c > 0; --c) {
                ColumnDef col;
                col.name = d.str();
                const auto tag = d.u8();
                if (tag > static_cast<std::uint8_t>(ValueTag::Timestamp)) Decoder::fail("bad column type");
                col.type = static_cast<ValueTag>(tag);
                col.nullable = d.u8() != 0;
                col.is_key = d.u8() != 0;
                t->schema.columns.push_back(std::move(col));
            }
            for (auto f = d.u32(); f > 0; --f) {
                ForeignKey fk;
                fk.column = d.str();
                fk.ref_table = d.str();
                fk.ref_column = d.str();
                t->schema.foreign_keys.push_back(std::move(fk));
            }
            check_schema(t->schema);
            for (auto r = d.u64(); r > 0; --r) {
                Row row;
                for (std::size_t c = 0; c < t->schema.columns.size(); ++c) row.values.push_back(d.value());
                insert_row(*t, std::move(row));
            }
            const auto name = t->schema.name;
            if (!st.tables.emplace(name, std::move(t)).second) Decoder::fail("duplicate table");
        }
        for (auto n = d.u32(); n > 0; --n) {
            const auto kind = d.u8();
            if (kind > static_cast<std::uint8_t>(ArticleKind::Record)) Decoder::fail("bad article kind");
            ArticleRef ref{static_cast<ArticleKind>(kind), d.str()};
            st.definitions.emplace(std::move(ref), d.str());
        }
        if (!d.done()) Decoder::fail("trailing bytes");
        check_state(st);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StoreCorrupt) throw;
        Decoder::fail(e.what());
    }
    return st;
}

// ── dependency extraction ───────────────────────────────────────────

std::set<std::string> definition_references(const DefinitionArticle& def) {
    static const std::regex kPlain(R"(\b(from|join|into|update)\s+([A-Za-z_][A-Za-z0-9_]*)\b(?!\s*[.(]))",
                                   std::regex::ECMAScript | std::regex::icase);
    static const std::regex kTrigger(R"(\b(from|join|into|update|on)\s+([A-Za-z_][A-Za-z0-9_]*)\b(?!\s*[.(]))",
                                     std::regex::ECMAScript | std::regex::icase);
    const auto& re = def.ref.kind == ArticleKind::Trigger ? kTrigger : kPlain;
    std::set<std::string> out;
    for (std::sregex_iterator it(def.body.begin(), def.body.end(), re), end; it != end; ++it) {
        out.insert((*it)[2].str());
    }
    return out;
}

// ── Store ───────────────────────────────────────────────────────────

struct Store::Entry {
    std::mutex writer;           // one writer per database
    mutable std::mutex version;  // guards `current` only
    std::shared_ptr<const DbState> current;
};

Store::Store(fs::path root) : root_(std::move(root)) {}

std::shared_ptr<Store> Store::open(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(ErrorCode::AdapterUnavailable, "store not found");
    const auto key = fs::canonical(root, ec).string();
    if (ec) throw Error(ErrorCode::AdapterUnavailable, "store not found");
    std::lock_guard lock(g_stores_mu);
    if (auto existing = g_stores[key].lock()) return existing;
    auto store = std::make_shared<Store>(fs::path(key));
    g_stores[key] = store;
    return store;
}

fs::path Store::file_of(const std::string& db) const { return root_ / (db + std::string(kDatabaseExtension)); }

std::vector<std::string> Store::databases() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(root_, ec)) {
        if (!e.is_regular_file() || e.path().extension() != kDatabaseExtension) continue;
        auto stem = e.path().stem().string();
        if (is_identifier(stem)) out.push_back(std::move(stem));
    }
    if (ec) throw Error(ErrorCode::AdapterUnavailable, "cannot list store " + root_.string() + ": " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

bool Store::exists(const std::string& db) const {
    std::error_code ec;
    return is_identifier(db) && fs::is_regular_file(file_of(db), ec);
}

Store::Entry& Store::entry(const std::string& db) const {
    std::lock_guard lock(mu_);
    auto& slot = entries_[db];
    if (!slot) slot = std::make_unique<Entry>();
    return *slot;
}

std::shared_ptr<const DbState> Store::load(const std::string& db) const {
    if (!exists(db)) throw Error(ErrorCode::UnknownDatabase, "unknown database '" + db + "'");
    std::string bytes;
    try {
        bytes = read_file(file_of(db));
    } catch (const std::system_error&) {
        throw Error(ErrorCode::UnknownDatabase, "unknown database '" + db + "'");
    }
    auto st = decode_store_file(bytes);
    if (st.name != db) Decoder::fail("file " + file_of(db).string() + " holds database '" + st.name + "'");
    return std::make_shared<const DbState>(std::move(st));
}

std::shared_ptr<const DbState> Store::state(const std::string& db) const {
    if (!is_identifier(db)) throw Error(ErrorCode::UnknownDatabase, "unknown database '" + db + "'");
    auto& e = entry(db);
    std::lock_guard lock(e.version);
    if (!e.current) e.current = load(db);
    return e.current;
}

void Store::commit(const std::string& db, const std::function<void(DbState&)>& mutate) {
    if (!is_identifier(db)) throw Error(ErrorCode::UnknownDatabase, "unknown database '" + db + "'");
    auto& e = entry(db);
    std::lock_guard writer(e.writer);
    DbState next = *state(db);
    mutate(next);
    check_state(next);
    const auto bytes = encode_store_file(next);
    try {
        write_file_atomic(file_of(db), bytes);
    } catch (const std::system_error& ex) {
        throw Error(ErrorCode::AdapterUnavailable, std::string("cannot persist database: ") + ex.what());
    }
    std::lock_guard lock(e.version);
    e.current = std::make_shared<const DbState>(std::move(next));
}

void Store::create_database(const std::string& name) {
    require_identifier(name, "database name");
    std::lock_guard lock(mu_);
    if (exists(name)) throw Error(ErrorCode::DatabaseExists, "database '" + name + "' already exists");
    const auto meta_path = root_ / std::string(kMetaFileName);
    std::int64_t dbid = kFirstDbid;
    std::error_code ec;
    if (fs::exists(meta_path, ec)) dbid = decode_meta(read_file(meta_path));

    DbState st;
    st.name = name;
    st.attributes = {{"name", name}, {"dbid", std::to_string(dbid)}, {"mode", "READ_WRITE"}};
    try {
        write_file_atomic(file_of(name), encode_store_file(st));
        write_file_atomic(meta_path, encode_meta(dbid + 1));
    } catch (const std::system_error& ex) {
        throw Error(ErrorCode::AdapterUnavailable, std::string("cannot create database: ") + ex.what());
    }
    auto& slot = entries_[name];
    if (!slot) slot = std::make_unique<Entry>();
    std::lock_guard v(slot->version);
    slot->current = std::make_shared<const DbState>(std::move(st));
}

void Store::drop_contents(const std::string& db) {
    commit(db, [](DbState& st) {
        st.tables.clear();
        st.definitions.clear();
    });
}

void Store::apply(const std::string& db, const DatabaseSnapshot& s) {
    commit(db, [&](DbState& st) { apply_into(st, s); });
}

void Store::replace(const std::string& db, const DatabaseSnapshot& s) {
    commit(db, [&](DbState& st) {
        st.tables.clear();
        st.definitions.clear();
        apply_into(st, s);
    });
}

MergeOutcome Store::merge(const std::string& db, const DatabaseSnapshot& s) {
    MergeOutcome out;
    commit(db, [&](DbState& st) { out = merge_into(st, s); });
    return out;
}

void Store::create_table(const std::string& db, const TableSchema& schema) {
    commit(db, [&](DbState& st) {
        check_schema(schema);
        if (st.tables.contains(schema.name)) violation("table '" + schema.name + "' already exists");
        auto t = std::make_shared<TableState>();
        t->schema = schema;
        st.tables.emplace(schema.name, std::move(t));
    });
}

void Store::insert(const std::string& db, const std::string& table, const std::vector<Row>& rows) {
    commit(db, [&](DbState& st) {
        auto it = st.tables.find(table);
        if (it == st.tables.end()) throw Error(ErrorCode::UnknownArticle, "unknown table '" + table + "'");
        auto copy = std::make_shared<TableState>(*it->second);
        for (const auto& r : rows) insert_row(*copy, r);
        it->second = std::move(copy);
    });
}

void Store::erase(const std::string& db, const std::string& table, const KeyTuple& key) {
    commit(db, [&](DbState& st) {
        auto it = st.tables.find(table);
        if (it == st.tables.end()) throw Error(ErrorCode::UnknownArticle, "unknown table '" + table + "'");
        if (!it->second->rows.contains(key)) return;
        auto copy = std::make_shared<TableState>(*it->second);
        copy->rows.erase(key);
        it->second = std::move(copy);
    });
}

void Store::put_definition(const std::string& db, const DefinitionArticle& def) {
    commit(db, [&](DbState& st) { st.definitions[def.ref] = def.body; });
}

void Store::set_snapshot_probe(SnapshotProbe probe) {
    std::lock_guard lock(mu_);
    probe_ = std::move(probe);
}

DatabaseSnapshot Store::extract(const DbState& st, const Selection& sel, bool with_rows) const {
    SnapshotProbe probe;
    {
        std::lock_guard lock(mu_);
        probe = probe_;
    }
    DatabaseSnapshot out;
    out.dialect = Dialect(std::string(kRefEngineDialect));
    out.db_name = st.name;
    out.db_attributes = st.attributes;

    std::set<std::string> tables;
    for (const auto& ref : sel.articles) {
        if (ref.kind == ArticleKind::Record) continue;
        if (ref.kind == ArticleKind::Table) {
            if (!st.tables.contains(ref.name)) throw Error(ErrorCode::UnknownArticle, "unknown table '" + ref.name + "'");
            tables.insert(ref.name);
        } else if (!st.definitions.contains(ref)) {
            throw Error(ErrorCode::UnknownArticle,
                        "unknown " + std::string(to_string(ref.kind)) + " '" + ref.name + "'");
        }
    }
    for (const auto& name : tables) {
        const auto& t = *st.tables.at(name);
        TableData data;
        data.schema = t.schema;
        std::erase_if(data.schema.foreign_keys, [&](const ForeignKey& fk) { return !tables.contains(fk.ref_table); });
        if (with_rows) {
            std::size_t index = 0;
            if (sel.select_all_records.contains(name)) {
                data.rows.reserve(t.rows.size());
                for (const auto& [_, row] : t.rows) {
                    if (probe) probe(name, index);
                    ++index;
                    data.rows.push_back(row);
                }
            } else if (auto keys = sel.record_keys.find(name); keys != sel.record_keys.end()) {
                for (const auto& key : keys->second) {
                    auto hit = t.rows.find(key);
                    if (hit == t.rows.end()) continue;
                    if (probe) probe(name, index);
                    ++index;
                    data.rows.push_back(hit->second);
                }
            }
        }
        out.tables.push_back(std::move(data));
    }
    for (const auto& ref : sel.articles) {
        if (is_definition_kind(ref.kind)) out.definitions.push_back({ref, st.definitions.at(ref)});
    }
    return out;
}

DatabaseSnapshot Store::snapshot(const std::string& db, const Selection& sel) const {
    const auto st = state(db);  // pinned for the whole extraction
    return extract(*st, sel, true);
}

DatabaseSnapshot Store::describe(const std::string& db) const {
    const auto st = state(db);
    Selection all;
    all.db_name = db;
    for (const auto& [name, _] : st->tables) all.articles.insert({ArticleKind::Table, name});
    for (const auto& [ref, _] : st->definitions) all.articles.insert(ref);
    return extract(*st, all, false);
}

// ── adapter ─────────────────────────────────────────────────────────

RefEngineAdapter::RefEngineAdapter(std::vector<std::string> roots)
    : dialect_(std::string(kRefEngineDialect)), roots_(std::move(roots)) {}

ConnectionResult RefEngineAdapter::test_connection(const ConnectionSpec& spec) {
    try {
        auto s = open(spec);
        s->close();
        return ConnectionResult::success();
    } catch (const Error& e) {
        return ConnectionResult::failure(e.what());
    }
}

std::unique_ptr<AdapterSession> RefEngineAdapter::open(const ConnectionSpec& spec) {
    if (spec.dialect != dialect_) throw Error(ErrorCode::AdapterUnavailable, "dialect mismatch");
    if (!roots_.empty() && std::find(roots_.begin(), roots_.end(), spec.server) == roots_.end()) {
        throw Error(ErrorCode::AdapterUnavailable, "store not found");
    }
    return std::make_unique<RefSession>(Store::open(spec.server));
}

}  // namespace logibak::refengine
