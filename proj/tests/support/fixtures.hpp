// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Hand-built reference databases used across the suites.

#include <string>

#include "logibak/auth.hpp"
#include "logibak/ref_engine.hpp"

namespace logibak::testgen {

inline Row row(std::initializer_list<Value> values) { return Row{std::vector<Value>(values)}; }

/// The login table: ID, UserName, Password with rows 19, 20, 21.
inline TableSchema users_table_schema() {
    return {"users",
            {{"ID", ValueTag::Int64, false, true},
             {"UserName", ValueTag::Text, false, false},
             {"Password", ValueTag::Text, false, false}},
            {}};
}

/// Database `name` holding only the login table. No views, functions,
/// triggers or procedures.
inline void seed_users_db(refengine::Store& store, const std::string& name = "Users") {
    store.create_database(name);
    store.create_table(name, users_table_schema());
    store.insert(name, "users",
                 {row({Value::integer(19), Value::text("user1"), Value::text("123456")}),
                  row({Value::integer(20), Value::text("user20"), Value::text("pswrd20")}),
                  row({Value::integer(21), Value::text("user21"), Value::text("pswrd21")})});
}

/// Service administrators with the same names and passwords as the login
/// table rows, hashed at minimal cost.
inline UserStore seed_admin_users() {
    UserStore users;
    users.add_user(19, "user1", "123456", HashStrength::minimal());
    users.add_user(20, "user20", "pswrd20", HashStrength::minimal());
    users.add_user(21, "user21", "pswrd21", HashStrength::minimal());
    return users;
}

inline const Blob kJpegHeader = {0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, 0x4A, 0x46, 0x49, 0x46};

/// Three tables, one view, one trigger, one function, one procedure.
inline void seed_shop_db(refengine::Store& store, const std::string& name = "Shop") {
    store.create_database(name);
    store.create_table(name, {"users",
                              {{"ID", ValueTag::Int64, false, true},
                               {"Username", ValueTag::Text, false, false},
                               {"Password", ValueTag::Text, false, false}},
                              {}});
    store.insert(name, "users",
                 {row({Value::integer(1), Value::text("user1"), Value::text("pswrd1")}),
                  row({Value::integer(2), Value::text("user2"), Value::text("pswrd2")}),
                  row({Value::integer(3), Value::text("user3"), Value::text("pswrd3")})});
    store.create_table(name, {"products",
                              {{"ID", ValueTag::Int64, false, true},
                               {"Name", ValueTag::Text, false, false},
                               {"Price", ValueTag::Float64, false, false},
                               {"Photo", ValueTag::Blob, true, false},
                               {"Added", ValueTag::Timestamp, true, false},
                               {"Active", ValueTag::Bool, false, false}},
                              {}});
    store.insert(name, "products",
                 {row({Value::integer(10), Value::text("Lamp"), Value::real(19.5), Value::blob(kJpegHeader),
                       Value::timestamp({1250173800000000}), Value::boolean(true)}),
                  row({Value::integer(11), Value::text("Desk"), Value::real(120.0), Value::null(), Value::null(),
                       Value::boolean(false)})});
    store.create_table(name, {"orders",
                              {{"ID", ValueTag::Int64, false, true},
                               {"UserID", ValueTag::Int64, false, false},
                               {"ProductID", ValueTag::Int64, false, false},
                               {"Qty", ValueTag::Int64, false, false}},
                              {{"UserID", "users", "ID"}, {"ProductID", "products", "ID"}}});
    store.insert(name, "orders",
                 {row({Value::integer(100), Value::integer(1), Value::integer(10), Value::integer(2)}),
                  row({Value::integer(101), Value::integer(2), Value::integer(11), Value::integer(1)})});
    store.put_definition(name, {{ArticleKind::View, "order_view"},
                                "SELECT o.ID, p.Name FROM orders o JOIN products p ON o.ProductID = p.ID"});
    store.put_definition(name, {{ArticleKind::Trigger, "order_audit"},
                                "CREATE TRIGGER order_audit AFTER INSERT ON orders BEGIN SELECT 1; END"});
    store.put_definition(name, {{ArticleKind::Function, "total_price"}, "RETURN (SELECT SUM(Price) FROM products)"});
    store.put_definition(name, {{ArticleKind::StoredProcedure, "purge_orders"}, "BEGIN DELETE FROM orders; END"});
}

}  // namespace logibak::testgen
