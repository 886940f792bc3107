// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/auth.hpp"

#include <sodium.h>

#include "json.hpp"
#include "logibak/error.hpp"
#include "logibak/fsutil.hpp"

namespace logibak {

using json = nlohmann::json;

namespace {

void init_sodium() {
    static const bool ok = sodium_init() >= 0;
    if (!ok) throw Error(ErrorCode::Internal, "libsodium failed to initialise");
}

[[noreturn]] void bad_users(const std::string& msg) { throw Error(ErrorCode::ParseError, "users file: " + msg); }

}  // namespace

HashStrength HashStrength::interactive() {
    return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
}

HashStrength HashStrength::minimal() { return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN}; }

std::string hash_password(std::string_view password, HashStrength strength) {
    init_sodium();
    char out[crypto_pwhash_STRBYTES];
    if (crypto_pwhash_str(out, password.data(), password.size(), strength.ops, strength.mem) != 0) {
        throw Error(ErrorCode::Internal, "password hashing ran out of memory");
    }
    return out;
}

bool verify_password(const std::string& hash, std::string_view password) {
    init_sodium();
    return crypto_pwhash_str_verify(hash.c_str(), password.data(), password.size()) == 0;
}

UserStore UserStore::load(const std::filesystem::path& file) {
    std::string text;
    try {
        text = read_file(file);
    } catch (const std::system_error& e) {
        bad_users(file.string() + ": " + e.code().message());
    }
    return parse(text);
}

UserStore UserStore::parse(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        bad_users(e.what());
    }
    if (!root.is_object() || !root.contains("users") || !root["users"].is_array()) {
        bad_users("expected {\"users\": [...]}");
    }
    UserStore store;
    for (const auto& u : root["users"]) {
        if (!u.is_object() || !u.value("id", json()).is_number_integer() || !u.value("username", json()).is_string() ||
            !u.value("password_hash", json()).is_string()) {
            bad_users("each user needs integer id, username and password_hash");
        }
        try {
            store.add({u["id"].get<std::int64_t>(), u["username"].get<std::string>(),
                       u["password_hash"].get<std::string>()});
        } catch (const Error& e) {
            bad_users(e.what());
        }
    }
    return store;
}

std::string UserStore::to_json() const {
    json list = json::array();
    for (const auto& u : users_) {
        list.push_back({{"id", u.id}, {"username", u.username}, {"password_hash", u.password_hash}});
    }
    return json{{"users", list}}.dump(2) + "\n";
}

void UserStore::save(const std::filesystem::path& file) const { write_file_atomic(file, to_json()); }

void UserStore::add(UserRecord user) {
    for (const auto& u : users_) {
        if (u.id == user.id) throw Error(ErrorCode::DuplicateKey, "user id " + std::to_string(user.id) + " is taken");
        if (u.username == user.username) throw Error(ErrorCode::DuplicateKey, "user '" + user.username + "' exists");
    }
    users_.push_back(std::move(user));
}

void UserStore::add_user(std::int64_t id, std::string username, std::string_view password, HashStrength strength) {
    add({id, std::move(username), hash_password(password, strength)});
}

std::optional<std::int64_t> UserStore::authenticate(std::string_view username, std::string_view password) const {
    for (const auto& u : users_) {
        if (u.username == username) {
            if (verify_password(u.password_hash, password)) return u.id;
            return std::nullopt;
        }
    }
    if (!users_.empty()) (void)verify_password(users_.front().password_hash, password);
    return std::nullopt;
}

}  // namespace logibak
