// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#include "logibak/config.hpp"

#include <set>

#include "json.hpp"
#include "logibak/error.hpp"
#include "logibak/fsutil.hpp"
#include "logibak/ref_engine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace logibak {

namespace {

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorCode::ParseError, "config: " + msg); }

const json& section(const json& root, const char* name, const std::set<std::string>& keys) {
    static const json kEmpty = json::object();
    if (!root.contains(name)) return kEmpty;
    const auto& s = root.at(name);
    if (!s.is_object()) bad_config(std::string(name) + " must be an object");
    for (const auto& [k, _] : s.items()) {
        if (!keys.contains(k)) bad_config("unknown key " + std::string(name) + "." + k);
    }
    return s;
}

std::optional<std::string> text(const json& s, const char* key, const char* where) {
    if (!s.contains(key) || s.at(key).is_null()) return std::nullopt;
    if (!s.at(key).is_string()) bad_config(std::string(where) + "." + key + " must be a string");
    return s.at(key).get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

Config Config::defaults() {
    Config c;
    c.staging_dir = fs::temp_directory_path() / "Temp_Restore";
    return c;
}

Config Config::parse(std::string_view text_doc, const fs::path& base) {
    json root;
    try {
        root = json::parse(text_doc);
    } catch (const json::parse_error& e) {
        bad_config(e.what());
    }
    if (!root.is_object()) bad_config("top level must be an object");
    static const std::set<std::string> kSections = {"refengine", "sinks", "restore", "http", "auth", "catalog"};
    for (const auto& [k, _] : root.items()) {
        if (!kSections.contains(k)) bad_config("unknown section " + k);
    }

    Config c = defaults();
    const auto& ref = section(root, "refengine", {"roots"});
    if (ref.contains("roots")) {
        if (!ref.at("roots").is_array()) bad_config("refengine.roots must be an array");
        for (const auto& r : ref.at("roots")) {
            if (!r.is_string()) bad_config("refengine.roots entries must be strings");
            c.refengine_roots.push_back(resolve(base, r.get<std::string>()).string());
        }
    }
    const auto& sinks = section(root, "sinks", {"primary_dir", "mirror_dir", "remote_url"});
    if (auto v = text(sinks, "primary_dir", "sinks")) c.primary_dir = resolve(base, *v);
    if (auto v = text(sinks, "mirror_dir", "sinks")) c.mirror_dir = resolve(base, *v);
    if (auto v = text(sinks, "remote_url", "sinks")) c.remote_url = *v;
    const auto& restore = section(root, "restore", {"staging_dir"});
    if (auto v = text(restore, "staging_dir", "restore")) c.staging_dir = resolve(base, *v);
    const auto& http = section(root, "http", {"bind_addr", "static_dir"});
    if (auto v = text(http, "bind_addr", "http")) c.bind_addr = *v;
    if (auto v = text(http, "static_dir", "http")) c.static_dir = resolve(base, *v);
    const auto& auth = section(root, "auth", {"users_file", "session_idle_minutes"});
    if (auto v = text(auth, "users_file", "auth")) c.users_file = resolve(base, *v);
    if (auth.contains("session_idle_minutes")) {
        const auto& m = auth.at("session_idle_minutes");
        if (!m.is_number_integer() || m.get<long>() <= 0) bad_config("auth.session_idle_minutes must be positive");
        c.session_idle = std::chrono::minutes(m.get<long>());
    }
    const auto& catalog = section(root, "catalog", {"file"});
    if (auto v = text(catalog, "file", "catalog")) c.catalog_file = resolve(base, *v);
    return c;
}

Config Config::load(const fs::path& file) {
    std::string doc;
    try {
        doc = read_file(file);
    } catch (const std::system_error& e) {
        bad_config(e.what());
    }
    return parse(doc, fs::absolute(file).parent_path());
}

AdapterRegistry make_registry(const Config& config, std::shared_ptr<const StatementCatalog> catalog) {
    AdapterRegistry reg;
    reg.add(std::make_shared<refengine::RefEngineAdapter>(config.refengine_roots));
    for (const auto& d : catalog->dialects()) {
        if (d.name() == kRefEngineDialect) continue;
        reg.add(std::make_shared<CatalogAdapter>(d, catalog));
    }
    return reg;
}

}  // namespace logibak
