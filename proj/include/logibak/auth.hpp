// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logibak {

/// Argon2id cost parameters.
struct HashStrength {
    unsigned long long ops;
    std::size_t mem;

    static HashStrength interactive();
    /// The library minimum. Only for fixtures and tests.
    static HashStrength minimal();
};

/// Salted Argon2id hash in the self-describing `$argon2id$...` form.
std::string hash_password(std::string_view password, HashStrength strength = HashStrength::interactive());
bool verify_password(const std::string& hash, std::string_view password);

struct UserRecord {
    std::int64_t id = 0;
    std::string username;
    std::string password_hash;
};

/// Administrators allowed to log in to the service. Stored as JSON:
///
///     {"users": [{"id": 19, "username": "user1", "password_hash": "$argon2id$..."}]}
class UserStore {
public:
    /// Throws ParseError.
    static UserStore load(const std::filesystem::path& file);
    static UserStore parse(std::string_view json);

    std::string to_json() const;
    void save(const std::filesystem::path& file) const;

    /// Throws DuplicateKey when the id or username is taken.
    void add(UserRecord user);
    void add_user(std::int64_t id, std::string username, std::string_view password,
                  HashStrength strength = HashStrength::interactive());

    /// The user id on a match. Unknown users cost one hash verification
    /// too, so the timing does not reveal which names exist.
    std::optional<std::int64_t> authenticate(std::string_view username, std::string_view password) const;

    const std::vector<UserRecord>& users() const noexcept { return users_; }

private:
    std::vector<UserRecord> users_;
};

}  // namespace logibak
