// Copyright 2026 The logibak Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "logibak/auth.hpp"
#include "logibak/backup_engine.hpp"
#include "logibak/config.hpp"
#include "logibak/dbms_adapter.hpp"
#include "logibak/error.hpp"
#include "logibak/restore_engine.hpp"

namespace httplib {
class Server;
}

namespace logibak {

using SteadyClockSource = std::function<std::chrono::steady_clock::time_point()>;

/// HTTP status for each error code. Closed set: every ErrorCode maps.
int http_status(ErrorCode code);

struct Route {
    std::string method;
    std::string path;  // `{name}` marks a path parameter
};

/// JSON-over-HTTP front end. A login owns its adapter sessions; logging out
/// or idling past `auth.session_idle_minutes` closes them all.
class ApiService {
public:
    struct Options {
        Config config = Config::defaults();
        UserStore users;
        SteadyClockSource clock;       // token expiry
        WallClockSource wall_clock;    // default archive names
    };

    ApiService(Options options, AdapterRegistry registry);
    ~ApiService();
    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    static const std::vector<Route>& routes();

    /// Registers every route, plus the static console when configured.
    void mount(httplib::Server& server);

    /// Listens on `http.bind_addr` until stop(); port 0 picks a free port.
    /// Logs `listening on host:port` to stderr once bound. Throws
    /// BadRequest for a malformed address and Internal when binding fails.
    void serve();
    void stop();

    std::size_t live_logins() const;
    /// Adapter sessions still open across all logins.
    std::size_t open_sessions() const;

private:
    struct Login;

    std::shared_ptr<Login> authorize(const std::string& header);
    SinkSet sinks() const;

    Options opts_;
    AdapterRegistry registry_;
    std::shared_ptr<RemoteSink> remote_;
    BackupEngine backups_;
    RestoreEngine restores_;
    Stager stager_;

    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Login>> logins_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace logibak
