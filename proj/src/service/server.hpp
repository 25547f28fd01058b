#pragma once

#include "specsharp/specsharp.h"

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace specsharp::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;                      // 0 picks a free port
    std::vector<std::string> cache_paths; // one cache per level count
    std::string slopes_path;              // empty: built-in slope table
    std::string static_dir;               // UI assets served under /
    std::size_t max_upload_bytes = 32u << 20;
    std::chrono::milliseconds idle_timeout = std::chrono::minutes(15);
    bool auto_calibrate = true;           // calibrate level counts no cache covers
    ss_calibration_options calibration{};
    std::vector<double> calibration_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    int threads = 4;
};

ServiceConfig default_config();

class Server {
public:
    explicit Server(ServiceConfig config);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds the listening socket and returns the port, or -1.
    int bind();
    /// Serves until stop(); returns false if the socket failed.
    bool run();
    void stop();
    void wait_until_ready() const;

    std::size_t session_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace specsharp::service
