#include "server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>

namespace {

specsharp::service::Server* running = nullptr;

void on_signal(int) {
    if (running)
        running->stop();
}

}  // namespace

int main(int argc, char** argv) {
    auto config = specsharp::service::default_config();
    CLI::App app{"HTTP service for interactive viewing-distance sharpening"};
    double idle_minutes = 15.0;
    double max_upload_mb = 32.0;
    bool no_auto = false;
    app.add_option("--host", config.host, "Bind address")->capture_default_str();
    app.add_option("--port", config.port, "Port (0 picks a free one)")->capture_default_str();
    app.add_option("--cache", config.cache_paths, "Weight cache file; repeat for other level counts")
        ->check(CLI::ExistingFile);
    app.add_option("--slopes", config.slopes_path, "Slope table JSON")->check(CLI::ExistingFile);
    app.add_option("--static", config.static_dir, "Directory of UI assets served under /")
        ->check(CLI::ExistingDirectory);
    app.add_option("--idle-minutes", idle_minutes, "Session idle timeout")->capture_default_str();
    app.add_option("--max-upload-mb", max_upload_mb, "Upload size limit")->capture_default_str();
    app.add_option("--threads", config.threads, "Request handler threads")->capture_default_str();
    app.add_flag("--no-auto-calibrate", no_auto,
                 "Reject images whose level count no cache covers instead of calibrating");
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (config.cache_paths.empty()) {
        if (const char* env = std::getenv("SPECSHARP_CACHE"))
            config.cache_paths.emplace_back(env);
    }
    config.auto_calibrate = !no_auto;
    config.idle_timeout = std::chrono::milliseconds(static_cast<long long>(idle_minutes * 60000.0));
    config.max_upload_bytes = static_cast<std::size_t>(max_upload_mb * 1024.0 * 1024.0);

    try {
        specsharp::service::Server server(config);
        const int port = server.bind();
        if (port < 0) {
            std::cerr << "error: cannot bind " << config.host << ':' << config.port << '\n';
            return 1;
        }
        running = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cout << "listening on http://" << config.host << ':' << port << std::endl;
        const bool ok = server.run();
        running = nullptr;
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
