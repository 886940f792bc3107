// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "logibak/core_model.hpp"
#include "logibak/error.hpp"
#include "support/generators.hpp"

using namespace logibak;

namespace {

// users(ID key, Username, Password) and orders(id key, user_id -> users.ID)
DatabaseSnapshot two_table_catalog() {
    DatabaseSnapshot s;
    s.dialect = Dialect("RefEngine");
    s.db_name = "shop";
    TableData users;
    users.schema = {"users",
                    {{"ID", ValueTag::Int64, false, true},
                     {"Username", ValueTag::Text, false, false},
                     {"Password", ValueTag::Text, false, false}},
                    {}};
    users.rows = {{{Value::integer(1), Value::text("user1"), Value::text("pswrd1")}},
                  {{Value::integer(2), Value::text("user2"), Value::text("pswrd2")}}};
    TableData orders;
    orders.schema = {"orders",
                     {{"id", ValueTag::Int64, false, true}, {"user_id", ValueTag::Int64, true, false}},
                     {{"user_id", "users", "ID"}}};
    s.tables = {users, orders};
    s.definitions = {{{ArticleKind::View, "v_users"}, "SELECT * FROM users"}};
    return s;
}

ArticleRef table_ref(std::string name) { return {ArticleKind::Table, std::move(name)}; }

}  // namespace

TEST(Identifier, Grammar) {
    EXPECT_TRUE(is_identifier("users"));
    EXPECT_TRUE(is_identifier("_x9"));
    EXPECT_FALSE(is_identifier(""));
    EXPECT_FALSE(is_identifier("9lives"));
    EXPECT_FALSE(is_identifier("users; DROP TABLE x"));
    EXPECT_FALSE(is_identifier("naïve"));
}

TEST(DialectTest, ValidationAndCaseSensitivity) {
    EXPECT_EQ(Dialect("SQL2008").name(), "SQL2008");
    EXPECT_THROW(Dialect(""), Error);
    EXPECT_THROW(Dialect("SQL 2008"), Error);
    EXPECT_THROW(Dialect("SQL-2008"), Error);
    EXPECT_NE(Dialect("sql2008"), Dialect("SQL2008"));
    EXPECT_TRUE(Dialect::is_valid_name("9"));
}

TEST(ArticleKindTest, RoundTripsNames) {
    for (auto k : kAllArticleKinds) EXPECT_EQ(parse_article_kind(to_string(k)), k);
    EXPECT_FALSE(parse_article_kind("Index"));
    EXPECT_TRUE(is_definition_kind(ArticleKind::View));
    EXPECT_FALSE(is_definition_kind(ArticleKind::Record));
}

TEST(TimestampTest, FormatAndParse) {
    EXPECT_EQ(format_timestamp({0}), "1970-01-01T00:00:00.000000Z");
    EXPECT_EQ(format_timestamp({-1}), "1969-12-31T23:59:59.999999Z");
    EXPECT_EQ(format_timestamp({kMinTimestampMicros}), "0001-01-01T00:00:00.000000Z");
    EXPECT_EQ(format_timestamp({kMaxTimestampMicros}), "9999-12-31T23:59:59.999999Z");
    // 2009-08-13 14:30 UTC
    auto t = parse_timestamp("2009-08-13T14:30:00.000001Z");
    ASSERT_TRUE(t);
    EXPECT_EQ(t->micros, 1250173800000001LL);
    EXPECT_FALSE(parse_timestamp("2009-02-29T00:00:00.000000Z"));
    EXPECT_TRUE(parse_timestamp("2008-02-29T00:00:00.000000Z"));
    EXPECT_FALSE(parse_timestamp("2009-08-13 14:30:00.000000Z"));
    EXPECT_FALSE(parse_timestamp("2009-08-13T24:00:00.000000Z"));
    EXPECT_FALSE(parse_timestamp("0000-01-01T00:00:00.000000Z"));
}

TEST(TimestampTest, RoundTripProperty) {
    testgen::SnapshotGen gen(7);
    for (int i = 0; i < 5000; ++i) {
        auto ts = gen.timestamp();
        auto back = parse_timestamp(format_timestamp(ts));
        ASSERT_TRUE(back);
        ASSERT_EQ(back->micros, ts.micros);
    }
}

TEST(ValueTest, EqualityIsReflexiveSymmetricAndBytewise) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<Value> vals = {Value::null(),        Value::boolean(true),  Value::integer(5),
                               Value::real(nan),     Value::real(-0.0),     Value::real(0.0),
                               Value::text(""),      Value::text("a"),      Value::blob({}),
                               Value::blob({0, 1}),  Value::blob({0, 2}),   Value::timestamp({3})};
    for (const auto& a : vals) {
        EXPECT_EQ(a, a);
        for (const auto& b : vals) EXPECT_EQ(a == b, b == a);
    }
    EXPECT_NE(Value::real(-0.0), Value::real(0.0));
    EXPECT_LT(Value::real(-0.0), Value::real(0.0));
    EXPECT_NE(Value::blob({0, 1}), Value::blob({0, 2}));
    EXPECT_NE(Value::text(""), Value::null());
    EXPECT_NE(Value::integer(1), Value::real(1.0));
    EXPECT_EQ(Value::blob({0xFF, 0xD8}), Value::blob({0xFF, 0xD8}));
}

TEST(SchemaTest, ImplicitKeyIsAllColumns) {
    TableSchema s{"t", {{"a", ValueTag::Int64, false, false}, {"b", ValueTag::Text, true, false}}, {}};
    EXPECT_EQ(s.key_indices(), (std::vector<std::size_t>{0, 1}));
    s.columns[1].is_key = true;
    EXPECT_EQ(s.key_indices(), (std::vector<std::size_t>{1}));
}

TEST(CheckSnapshot, AcceptsFixtureAndReportsBreaches) {
    auto s = two_table_catalog();
    EXPECT_TRUE(check_snapshot(s).empty());

    auto dangling = s;
    dangling.tables.erase(dangling.tables.begin());  // orders -> users now dangles
    EXPECT_FALSE(check_snapshot(dangling).empty());

    auto null_key = s;
    null_key.tables[0].rows[0].values[0] = Value::null();
    EXPECT_FALSE(check_snapshot(null_key).empty());

    auto wrong_type = s;
    wrong_type.tables[0].rows[0].values[1] = Value::integer(3);
    EXPECT_FALSE(check_snapshot(wrong_type).empty());

    auto empty_body = s;
    empty_body.definitions[0].body.clear();
    EXPECT_FALSE(check_snapshot(empty_body).empty());

    auto dup_col = s;
    dup_col.tables[0].schema.columns.push_back({"ID", ValueTag::Int64, true, false});
    EXPECT_FALSE(check_snapshot(dup_col).empty());
}

TEST(CheckSnapshot, GeneratedSnapshotsAreConsistent) {
    testgen::SnapshotGen gen(11);
    for (int i = 0; i < 50; ++i) {
        auto s = gen.snapshot({8, 40, 2});
        auto problems = check_snapshot(s);
        ASSERT_TRUE(problems.empty()) << problems.front();
    }
}

TEST(SameContent, IgnoresOrderAndDatabaseName) {
    auto a = two_table_catalog();
    auto b = a;
    b.db_name = "other";
    std::reverse(b.tables.begin(), b.tables.end());
    std::reverse(b.tables[1].rows.begin(), b.tables[1].rows.end());
    EXPECT_TRUE(same_content(a, b));
    b.tables[1].rows.pop_back();
    EXPECT_FALSE(same_content(a, b));
}

// ── validate_selection ──────────────────────────────────────────────

TEST(ValidateSelection, TwoSelectedUsersIsValid) {
    auto cat = two_table_catalog();
    Selection sel;
    sel.db_name = "shop";
    sel.articles = {table_ref("users")};
    sel.record_keys["users"] = {{Value::integer(1)}, {Value::integer(2)}};
    auto report = validate_selection(sel, cat);
    EXPECT_TRUE(report.ok()) << report.summary();
}

TEST(ValidateSelection, EmptySelectionWarnsOnly) {
    Selection sel;
    sel.db_name = "shop";
    auto report = validate_selection(sel, two_table_catalog());
    EXPECT_TRUE(report.ok());
    ASSERT_EQ(report.warnings.size(), 1u);
    EXPECT_NE(report.warnings[0].find("zero articles"), std::string::npos);
}

TEST(ValidateSelection, OrphanFlagsMatchEnumerationOracle) {
    const auto cat = two_table_catalog();
    const std::vector<std::string> tables = {"users", "orders"};
    // every subset of selected tables x every subset of tables carrying
    // record keys x every subset carrying select-all
    for (int art = 0; art < 4; ++art) {
        for (int keyed = 0; keyed < 4; ++keyed) {
            for (int all = 0; all < 4; ++all) {
                Selection sel;
                sel.db_name = "shop";
                std::set<std::string> expected_orphans;
                for (int t = 0; t < 2; ++t) {
                    const bool selected = art & (1 << t);
                    const bool has_keys = keyed & (1 << t);
                    const bool has_all = all & (1 << t);
                    if (selected) sel.articles.insert(table_ref(tables[t]));
                    if (has_keys) sel.record_keys[tables[t]] = {{Value::integer(1)}};
                    if (has_all) sel.select_all_records.insert(tables[t]);
                    if ((has_keys || has_all) && !selected) expected_orphans.insert(tables[t]);
                }
                auto report = validate_selection(sel, cat);
                std::set<std::string> flagged;
                for (const auto& v : report.violations) {
                    ASSERT_EQ(v.kind, ViolationKind::OrphanRecordSelection) << v.message;
                    flagged.insert(v.subject);
                }
                EXPECT_EQ(flagged, expected_orphans) << "art=" << art << " keyed=" << keyed << " all=" << all;
            }
        }
    }
}

TEST(ValidateSelection, OtherViolations) {
    auto cat = two_table_catalog();
    Selection sel;
    sel.db_name = "shop";
    sel.articles = {table_ref("users"), table_ref("ghost"), {ArticleKind::View, "v_users"},
                    {ArticleKind::Function, "nope"}, {ArticleKind::Record, "users"}};
    sel.record_keys["users"] = {{Value::text("1")}, {Value::integer(1), Value::integer(2)}};
    auto report = validate_selection(sel, cat);
    std::multiset<ViolationKind> kinds;
    for (const auto& v : report.violations) kinds.insert(v.kind);
    EXPECT_EQ(kinds.count(ViolationKind::UnknownArticle), 2u);
    EXPECT_EQ(kinds.count(ViolationKind::RecordArticle), 1u);
    EXPECT_EQ(kinds.count(ViolationKind::KeyType), 1u);
    EXPECT_EQ(kinds.count(ViolationKind::KeyArity), 1u);

    Selection wrong_db;
    wrong_db.db_name = "elsewhere";
    EXPECT_EQ(validate_selection(wrong_db, cat).violations.at(0).kind, ViolationKind::DatabaseMismatch);
}

TEST(ValidateSelection, UnselectedForeignKeyTargetIsAWarning) {
    auto cat = two_table_catalog();
    Selection sel;
    sel.db_name = "shop";
    sel.articles = {table_ref("orders")};
    auto report = validate_selection(sel, cat);
    EXPECT_TRUE(report.ok());
    ASSERT_EQ(report.warnings.size(), 1u);
    EXPECT_NE(report.warnings[0].find("orders.user_id"), std::string::npos);
}

TEST(ValidateSelection, MonotoneWhenAddingMissingTableRef) {
    testgen::SnapshotGen gen(99);
    int checked = 0;
    for (int iter = 0; iter < 300; ++iter) {
        auto cat = gen.snapshot({5, 3, 1});
        if (cat.tables.empty()) continue;
        Selection sel;
        sel.db_name = cat.db_name;
        for (const auto& t : cat.tables) {
            if (gen.coin()) sel.articles.insert(table_ref(t.schema.name));
            if (gen.coin()) sel.select_all_records.insert(t.schema.name);
            if (gen.coin(0.3)) sel.record_keys[t.schema.name] = {{Value::integer(1)}};
            if (gen.coin(0.2)) sel.record_keys[t.schema.name].insert({Value::text("bad")});
        }
        const auto before = validate_selection(sel, cat);
        for (const auto& t : cat.tables) {
            const auto ref = table_ref(t.schema.name);
            if (sel.articles.count(ref)) continue;
            auto grown = sel;
            grown.articles.insert(ref);
            const auto after = validate_selection(grown, cat);
            std::vector<Violation> expected;
            for (const auto& v : before.violations) {
                if (!(v.kind == ViolationKind::OrphanRecordSelection && v.subject == t.schema.name)) {
                    expected.push_back(v);
                }
            }
            ASSERT_EQ(after.violations, expected);
            ++checked;
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(SelectEverything, CoversCatalogAndValidates) {
    auto cat = two_table_catalog();
    auto sel = select_everything(cat);
    EXPECT_EQ(sel.articles.size(), 3u);
    EXPECT_EQ(sel.select_all_records, (std::set<std::string>{"orders", "users"}));
    EXPECT_TRUE(validate_selection(sel, cat).ok());
}
