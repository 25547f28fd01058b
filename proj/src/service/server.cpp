#include "server.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace specsharp::service {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using ImagePtr = std::unique_ptr<ss_image, Deleter<ss_image, ss_image_free>>;
using CachePtr = std::shared_ptr<const ss_cache>;
using ModelPtr = std::unique_ptr<ss_model, Deleter<ss_model, ss_model_free>>;
using SessionPtr = std::unique_ptr<ss_session, Deleter<ss_session, ss_session_free>>;
using SpectraPtr = std::unique_ptr<ss_spectra, Deleter<ss_spectra, ss_spectra_free>>;

std::string format_number(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

struct Session {
    SessionPtr handle;
    CachePtr cache;
    std::atomic<Clock::rep> last_access;
};

void error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", message}}.dump(), "application/json");
}

}  // namespace

ServiceConfig default_config() {
    ServiceConfig config;
    ss_calibration_options_default(&config.calibration);
    return config;
}

struct Server::Impl {
    ServiceConfig config;
    httplib::Server http;
    ModelPtr model;

    mutable std::shared_mutex caches_mutex;
    std::map<int, CachePtr> caches;
    std::mutex calibrate_mutex;

    mutable std::shared_mutex sessions_mutex;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions;
    std::mutex rng_mutex;
    std::mt19937_64 rng{std::random_device{}()};

    explicit Impl(ServiceConfig c) : config(std::move(c)) {
        ss_model* m = nullptr;
        const ss_status status = config.slopes_path.empty()
                                     ? ss_model_reference(&m)
                                     : ss_model_load(config.slopes_path.c_str(), &m);
        if (status != SS_OK)
            throw std::runtime_error(std::string("slope table: ") + ss_last_error());
        model.reset(m);
        for (const auto& path : config.cache_paths) {
            ss_cache* cache = nullptr;
            if (ss_cache_load(path.c_str(), &cache) != SS_OK)
                throw std::runtime_error("cache " + path + ": " + ss_last_error());
            const int levels = ss_cache_levels(cache);
            if (caches.count(levels)) {
                ss_cache_free(cache);
                throw std::runtime_error("two caches for " + std::to_string(levels) + " levels");
            }
            caches.emplace(levels, CachePtr(cache, ss_cache_free));
        }
        routes();
    }

    CachePtr find_cache(int levels) const {
        std::shared_lock lock(caches_mutex);
        const auto it = caches.find(levels);
        return it == caches.end() ? nullptr : it->second;
    }

    CachePtr cache_for(int levels) {
        if (auto cache = find_cache(levels); cache || !config.auto_calibrate)
            return cache;
        std::lock_guard calibrating(calibrate_mutex);
        if (auto cache = find_cache(levels))
            return cache;
        ss_calibration_options options = config.calibration;
        options.levels = levels;
        ss_cache* raw = nullptr;
        if (ss_cache_calibrate(model.get(), config.calibration_grid.data(),
                               config.calibration_grid.size(), &options, &raw) != SS_OK)
            return nullptr;
        CachePtr cache(raw, ss_cache_free);
        std::unique_lock lock(caches_mutex);
        caches.emplace(levels, cache);
        return cache;
    }

    std::string new_id() {
        std::lock_guard lock(rng_mutex);
        char buf[33];
        std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                      static_cast<unsigned long long>(rng()));
        return buf;
    }

    void expire_idle() {
        const auto cutoff = (Clock::now() - config.idle_timeout).time_since_epoch().count();
        std::unique_lock lock(sessions_mutex);
        std::erase_if(sessions, [&](const auto& kv) { return kv.second->last_access.load() < cutoff; });
    }

    std::shared_ptr<Session> find_session(const std::string& id) {
        expire_idle();
        std::shared_lock lock(sessions_mutex);
        const auto it = sessions.find(id);
        if (it == sessions.end())
            return nullptr;
        it->second->last_access = Clock::now().time_since_epoch().count();
        return it->second;
    }

    /// Session and distance from the request, or an error already written to `res`.
    std::shared_ptr<Session> session_and_distance(const httplib::Request& req,
                                                  httplib::Response& res, double& d) {
        auto session = find_session(req.path_params.at("id"));
        if (!session) {
            error(res, 404, "unknown session");
            return nullptr;
        }
        const auto text = req.get_param_value("d");
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
        if (text.empty() || ec != std::errc{} || end != text.data() + text.size() ||
            !std::isfinite(d) || d <= 0.0) {
            error(res, 400, "query parameter d must be a positive number of centimetres");
            return nullptr;
        }
        return session;
    }

    void create_session(const httplib::Request& req, const httplib::ContentReader& reader,
                        httplib::Response& res) {
        expire_idle();
        std::string body;
        bool oversize = req.get_header_value_u64("Content-Length") > config.max_upload_bytes;
        if (!oversize)
            reader([&](const char* data, size_t length) {
                oversize = body.size() + length > config.max_upload_bytes;
                if (!oversize)
                    body.append(data, length);
                return !oversize;
            });
        if (oversize)
            return error(res, 413, "image exceeds the upload limit");
        ss_image* raw_image = nullptr;
        if (ss_image_decode_png(reinterpret_cast<const uint8_t*>(body.data()), body.size(),
                                &raw_image) != SS_OK)
            return error(res, 415, std::string("expected a PNG image: ") + ss_last_error());
        const ImagePtr image(raw_image);
        ss_session* raw_session = nullptr;
        if (ss_session_create(image.get(), 0, &raw_session) != SS_OK)
            return error(res, 422, ss_last_error());
        SessionPtr handle(raw_session);
        const int levels = ss_session_levels(handle.get());
        auto cache = cache_for(levels);
        if (!cache)
            return error(res, 409, "no weight cache for " + std::to_string(levels) + " levels");
        auto session = std::make_shared<Session>();
        session->handle = std::move(handle);
        session->cache = std::move(cache);
        session->last_access = Clock::now().time_since_epoch().count();
        const std::string id = new_id();
        const json reply{{"session_id", id},
                        {"width", ss_session_width(session->handle.get())},
                        {"height", ss_session_height(session->handle.get())},
                        {"levels", levels}};
        {
            std::unique_lock lock(sessions_mutex);
            sessions.emplace(id, std::move(session));
        }
        res.status = 201;
        res.set_content(reply.dump(), "application/json");
    }

    void sharpened(const httplib::Request& req, httplib::Response& res) {
        double d = 0.0;
        const auto session = session_and_distance(req, res, d);
        if (!session)
            return;
        ss_image* raw = nullptr;
        double clipped = 0.0;
        if (ss_session_render(session->handle.get(), session->cache.get(), d, &raw, &clipped) != SS_OK)
            return error(res, 500, ss_last_error());
        const ImagePtr image(raw);
        uint8_t* bytes = nullptr;
        size_t size = 0;
        if (ss_image_encode_png(image.get(), &bytes, &size) != SS_OK)
            return error(res, 500, ss_last_error());
        std::string body(reinterpret_cast<const char*>(bytes), size);
        ss_buffer_free(bytes);
        res.set_header("X-Clipped-Fraction", format_number(clipped));
        res.set_header("Cache-Control", "no-store");
        res.set_content(std::move(body), "image/png");
    }

    void spectrum(const httplib::Request& req, httplib::Response& res) {
        double d = 0.0;
        const auto session = session_and_distance(req, res, d);
        if (!session)
            return;
        ss_spectra* raw = nullptr;
        if (ss_session_spectra(session->handle.get(), session->cache.get(), model.get(), d, &raw) != SS_OK)
            return error(res, 500, ss_last_error());
        const SpectraPtr spectra(raw);
        json body{{"d", d}};
        const std::pair<const char*, ss_session_spectrum> kinds[] = {
            {"original", SS_SESSION_ORIGINAL},
            {"sharpened", SS_SESSION_SHARPENED},
            {"simulated", SS_SESSION_SIMULATED}};
        for (const auto& [name, kind] : kinds) {
            ss_spectrum_view view{};
            ss_spectra_get(spectra.get(), kind, &view);
            json points = json::array();
            for (size_t k = 0; k < view.count; ++k)
                points.push_back({{"nu", view.nu[k]},
                                  {"power", std::isfinite(view.values[k]) ? json(view.values[k]) : json()}});
            body[name] = std::move(points);
        }
        res.set_content(body.dump(), "application/json");
    }

    void remove(const httplib::Request& req, httplib::Response& res) {
        std::unique_lock lock(sessions_mutex);
        if (sessions.erase(req.path_params.at("id")) == 0)
            return error(res, 404, "unknown session");
        res.status = 204;
    }

    void routes() {
        const int threads = config.threads > 0 ? config.threads : 1;
        http.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<size_t>(threads)); };
        http.set_payload_max_length(config.max_upload_bytes);
        http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok", "text/plain");
        });
        http.Post("/api/session", [this](const httplib::Request& req, httplib::Response& res,
                                         const httplib::ContentReader& reader) {
            create_session(req, reader, res);
        });
        http.Get("/api/session/:id/sharpened", [this](const auto& req, auto& res) { sharpened(req, res); });
        http.Get("/api/session/:id/spectrum", [this](const auto& req, auto& res) { spectrum(req, res); });
        http.Delete("/api/session/:id", [this](const auto& req, auto& res) { remove(req, res); });
        http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.status == 413 && res.body.empty())
                error(res, 413, "image exceeds the upload limit");
        });
        if (!config.static_dir.empty() && std::filesystem::is_directory(config.static_dir))
            http.set_mount_point("/", config.static_dir);
    }
};

Server::Server(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

int Server::bind() {
    if (impl_->config.port == 0)
        return impl_->http.bind_to_any_port(impl_->config.host);
    return impl_->http.bind_to_port(impl_->config.host, impl_->config.port) ? impl_->config.port : -1;
}

bool Server::run() { return impl_->http.listen_after_bind(); }

void Server::stop() {
    if (impl_->http.is_running())
        impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

std::size_t Server::session_count() const {
    std::shared_lock lock(impl_->sessions_mutex);
    return impl_->sessions.size();
}

}  // namespace specsharp::service
