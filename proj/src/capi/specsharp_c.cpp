#include "specsharp/specsharp.h"

#include "analysis.hpp"
#include "calibration.hpp"
#include "errors.hpp"
#include "png_io.hpp"
#include "sharpen.hpp"
#include "spectral.hpp"
#include "surrogate.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>
#include <vector>

using namespace specsharp;

struct ss_image {
    PlanarImage image;
};

struct ss_model {
    TransferModel model;
    std::string hash;
};

struct ss_cache {
    WeightCache cache;
};

struct ss_analysis {
    SpectrumAnalysis analysis;
};

struct ss_session {
    PlanarImage source;
    PreparedImage prepared;
    RadialSpectrum original;
};

struct ss_spectra {
    RadialSpectrum original;
    RadialSpectrum sharpened;
    RadialSpectrum simulated;
};

namespace {

thread_local std::string last_error;

ss_status fail(ss_status status, const char* message) {
    last_error = message;
    return status;
}

template <class F>
ss_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return SS_OK;
    } catch (const Error& e) {
        switch (e.kind()) {
        case ErrorKind::contract: return fail(SS_ERR_ARGUMENT, e.what());
        case ErrorKind::decode: return fail(SS_ERR_DECODE, e.what());
        case ErrorKind::io: return fail(SS_ERR_IO, e.what());
        case ErrorKind::cache: return fail(SS_ERR_CACHE, e.what());
        }
        return fail(SS_ERR_INTERNAL, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(SS_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SS_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* what) {
    if (p == nullptr)
        throw ContractError(std::string("null argument: ") + what);
}

template <class T, class... Args>
T* make(Args&&... args) {
    return new T{std::forward<Args>(args)...};
}

void fill_view(const RadialSpectrum& s, ss_spectrum_view* view) {
    view->count = s.bin_count();
    view->nu = s.bin_centers.data();
    view->values = s.power.data();
    view->valid = s.valid.data();
}

std::vector<double> grid(const double* distances, size_t count) {
    need(distances, "distances");
    require(count > 0, "distance list is empty");
    return {distances, distances + count};
}

}  // namespace

extern "C" {

const char* ss_last_error(void) { return last_error.c_str(); }

const char* ss_version(void) { return "1.0.0"; }

ss_status ss_image_decode_png(const uint8_t* bytes, size_t size, ss_image** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        if (bytes == nullptr || size == 0)
            throw DecodeError("empty input");
        *out = make<ss_image>(decode_to_linear(decode_png({bytes, size})));
    });
}

ss_status ss_image_read_png(const char* path, ss_image** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = make<ss_image>(decode_to_linear(read_png(path)));
    });
}

ss_status ss_image_from_srgb8(int width, int height, int channels, const uint8_t* pixels,
                              ss_image** out) {
    return guarded([&] {
        need(pixels, "pixels");
        need(out, "out");
        *out = nullptr;
        require(width > 0 && height > 0, "image dimensions must be positive");
        EncodedImage encoded{width, height, channels,
                             std::vector<std::uint8_t>(
                                 pixels, pixels + static_cast<std::size_t>(width) * height *
                                                      static_cast<std::size_t>(channels > 0 ? channels : 0))};
        *out = make<ss_image>(decode_to_linear(encoded));
    });
}

ss_status ss_image_white_noise(int width, int height, uint64_t seed, ss_image** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        *out = make<ss_image>(white_noise(width, height, seed));
    });
}

ss_status ss_image_encode_png(const ss_image* image, uint8_t** bytes, size_t* size) {
    return guarded([&] {
        need(image, "image");
        need(bytes, "bytes");
        need(size, "size");
        *bytes = nullptr;
        *size = 0;
        const auto png = encode_png(encode_to_srgb(image->image));
        auto* buffer = static_cast<uint8_t*>(std::malloc(png.size()));
        if (buffer == nullptr)
            throw std::bad_alloc();
        std::memcpy(buffer, png.data(), png.size());
        *bytes = buffer;
        *size = png.size();
    });
}

ss_status ss_image_write_png(const ss_image* image, const char* path) {
    return guarded([&] {
        need(image, "image");
        need(path, "path");
        write_png(path, encode_to_srgb(image->image));
    });
}

ss_status ss_image_to_srgb8(const ss_image* image, uint8_t* pixels, size_t capacity) {
    return guarded([&] {
        need(image, "image");
        need(pixels, "pixels");
        const auto encoded = encode_to_srgb(image->image);
        require(capacity >= encoded.pixels.size(), "pixel buffer too small");
        std::memcpy(pixels, encoded.pixels.data(), encoded.pixels.size());
    });
}

int ss_image_width(const ss_image* image) { return image ? image->image.width() : 0; }
int ss_image_height(const ss_image* image) { return image ? image->image.height() : 0; }
int ss_image_channels(const ss_image* image) { return image ? image->image.channels() : 0; }
void ss_image_free(ss_image* image) { delete image; }

void ss_buffer_free(uint8_t* bytes) { std::free(bytes); }

ss_status ss_default_levels(int width, int height, int* levels) {
    return guarded([&] {
        need(levels, "levels");
        *levels = default_levels(width, height);
    });
}

ss_status ss_model_reference(ss_model** out) {
    return guarded([&] {
        need(out, "out");
        auto model = TransferModel::reference();
        auto hash = model.hash();
        *out = make<ss_model>(std::move(model), std::move(hash));
    });
}

ss_status ss_model_load(const char* path, ss_model** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        auto model = TransferModel::load(path);
        auto hash = model.hash();
        *out = make<ss_model>(std::move(model), std::move(hash));
    });
}

ss_status ss_model_transfer_at(const ss_model* model, double distance_cm, double nu, double* value) {
    return guarded([&] {
        need(model, "model");
        need(value, "value");
        *value = model->model.transfer_at(distance_cm, nu);
    });
}

ss_status ss_model_slope_at(const ss_model* model, double distance_cm, double* slope) {
    return guarded([&] {
        need(model, "model");
        need(slope, "slope");
        *slope = model->model.slope_at(distance_cm);
    });
}

const char* ss_model_hash(const ss_model* model) { return model ? model->hash.c_str() : ""; }
void ss_model_free(ss_model* model) { delete model; }

void ss_calibration_options_default(ss_calibration_options* options) {
    if (options == nullptr)
        return;
    const CalibrationConfig config;
    options->levels = config.levels;
    options->noise_size = config.noise_size;
    options->first_seed = config.seeds.front();
    options->seed_count = static_cast<int>(config.seeds.size());
    options->band_lo = config.band_lo;
    options->band_hi = config.band_hi;
    options->max_iterations = config.solver.max_iterations;
}

ss_status ss_cache_calibrate(const ss_model* model, const double* distances, size_t count,
                             const ss_calibration_options* options, ss_cache** out) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = nullptr;
        CalibrationConfig config;
        if (options != nullptr) {
            require(options->seed_count > 0, "seed count must be positive");
            config.levels = options->levels;
            config.noise_size = options->noise_size;
            config.seeds = CalibrationConfig::seed_range(options->first_seed, options->seed_count);
            config.band_lo = options->band_lo;
            config.band_hi = options->band_hi;
            require(options->max_iterations > 0, "iteration limit must be positive");
            config.solver.max_iterations = options->max_iterations;
        }
        const auto d = grid(distances, count);
        *out = make<ss_cache>(calibrate_grid(model->model, d, config));
    });
}

ss_status ss_cache_load(const char* path, ss_cache** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = make<ss_cache>(WeightCache::load(path));
    });
}

ss_status ss_cache_save(const ss_cache* cache, const char* path) {
    return guarded([&] {
        need(cache, "cache");
        need(path, "path");
        cache->cache.save(path);
    });
}

int ss_cache_levels(const ss_cache* cache) { return cache ? cache->cache.levels : 0; }

size_t ss_cache_entry_count(const ss_cache* cache) {
    return cache ? cache->cache.entries.size() : 0;
}

int ss_cache_all_converged(const ss_cache* cache) {
    return cache && cache->cache.all_converged() ? 1 : 0;
}

ss_status ss_cache_entry(const ss_cache* cache, size_t index, double* distance_cm,
                         double* objective, int* converged) {
    return guarded([&] {
        need(cache, "cache");
        require(index < cache->cache.entries.size(), "cache entry index out of range");
        const auto& e = cache->cache.entries[index];
        if (distance_cm)
            *distance_cm = e.distance_cm;
        if (objective)
            *objective = e.objective_value;
        if (converged)
            *converged = e.converged ? 1 : 0;
    });
}

ss_status ss_cache_weights_for(const ss_cache* cache, double distance_cm, double* weights,
                               size_t capacity) {
    return guarded([&] {
        need(cache, "cache");
        need(weights, "weights");
        const auto set = weights_for(cache->cache, distance_cm);
        require(capacity >= set.weights.size(), "weight buffer too small");
        std::copy(set.weights.begin(), set.weights.end(), weights);
    });
}

void ss_cache_free(ss_cache* cache) { delete cache; }

ss_status ss_sharpen(const ss_image* image, double distance_cm, const ss_cache* cache,
                     ss_image** out, double* clipped_fraction) {
    return guarded([&] {
        need(image, "image");
        need(cache, "cache");
        need(out, "out");
        *out = nullptr;
        auto result = sharpen({image->image, distance_cm, cache->cache});
        if (clipped_fraction)
            *clipped_fraction = result.clipped_fraction;
        *out = make<ss_image>(std::move(result.image));
    });
}

ss_status ss_simulate_view(const ss_image* image, double distance_cm, const ss_model* model,
                           ss_image** out) {
    return guarded([&] {
        need(image, "image");
        need(model, "model");
        need(out, "out");
        *out = nullptr;
        const SurrogateSimulator simulator(model->model);
        *out = make<ss_image>(simulate_view(image->image, distance_cm, simulator));
    });
}

ss_status ss_analyze_image(const ss_model* model, const ss_image* image, const double* distances,
                           size_t count, ss_analysis** out) {
    return guarded([&] {
        need(model, "model");
        need(image, "image");
        need(out, "out");
        *out = nullptr;
        const SurrogateSimulator simulator(model->model);
        const auto d = grid(distances, count);
        *out = make<ss_analysis>(analyze_image(simulator, luminance_of(image->image), d));
    });
}

ss_status ss_analyze_noise(const ss_model* model, int size, uint64_t first_seed, int seed_count,
                           const double* distances, size_t count, ss_analysis** out) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = nullptr;
        require(seed_count > 0, "seed count must be positive");
        const SurrogateSimulator simulator(model->model);
        const auto d = grid(distances, count);
        const auto seeds = CalibrationConfig::seed_range(first_seed, seed_count);
        *out = make<ss_analysis>(analyze_noise(simulator, size, seeds, d));
    });
}

size_t ss_analysis_distance_count(const ss_analysis* analysis) {
    return analysis ? analysis->analysis.distances.size() : 0;
}

namespace {

const RadialSpectrum& pick(const ss_analysis* analysis, ss_spectrum_kind kind, size_t index) {
    need(analysis, "analysis");
    if (kind == SS_SPECTRUM_ORIGINAL)
        return analysis->analysis.original;
    require(index < analysis->analysis.distances.size(), "distance index out of range");
    const auto& entry = analysis->analysis.distances[index];
    if (kind == SS_SPECTRUM_SIMULATED)
        return entry.simulated;
    require(kind == SS_SPECTRUM_LOG_RELATIVE, "unknown spectrum kind");
    return entry.log_relative;
}

}  // namespace

ss_status ss_analysis_spectrum(const ss_analysis* analysis, ss_spectrum_kind kind, size_t index,
                               ss_spectrum_view* view) {
    return guarded([&] {
        need(view, "view");
        fill_view(pick(analysis, kind, index), view);
    });
}

ss_status ss_analysis_slope(const ss_analysis* analysis, size_t index, double* distance_cm,
                            double* slope, int* available) {
    return guarded([&] {
        need(analysis, "analysis");
        require(index < analysis->analysis.distances.size(), "distance index out of range");
        const auto& entry = analysis->analysis.distances[index];
        if (distance_cm)
            *distance_cm = entry.distance_cm;
        if (available)
            *available = entry.fit ? 1 : 0;
        if (slope)
            *slope = entry.fit ? entry.fit->slope : 0.0;
    });
}

ss_status ss_analysis_write_csv(const ss_analysis* analysis, ss_spectrum_kind kind, size_t index,
                                const char* path) {
    return guarded([&] {
        need(path, "path");
        const auto& spectrum = pick(analysis, kind, index);
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError(std::string("cannot open ") + path + " for writing");
        write_spectrum_csv(out, spectrum, kind == SS_SPECTRUM_LOG_RELATIVE ? "log_rel" : "power");
        out.close();
        if (!out)
            throw IoError(std::string("failed writing ") + path);
    });
}

void ss_analysis_free(ss_analysis* analysis) { delete analysis; }

ss_status ss_session_create(const ss_image* image, int levels, ss_session** out) {
    return guarded([&] {
        need(image, "image");
        need(out, "out");
        *out = nullptr;
        const auto& src = image->image;
        const int l = levels > 0 ? levels : default_levels(src.width(), src.height());
        auto prepared = prepare(src, l);
        auto original = radial_power_spectrum(prepared.luma_chroma.luminance);
        *out = make<ss_session>(src, std::move(prepared), std::move(original));
    });
}

int ss_session_levels(const ss_session* session) { return session ? session->prepared.stack.levels : 0; }
int ss_session_width(const ss_session* session) { return session ? session->source.width() : 0; }
int ss_session_height(const ss_session* session) { return session ? session->source.height() : 0; }

ss_status ss_session_render(const ss_session* session, const ss_cache* cache, double distance_cm,
                            ss_image** out, double* clipped_fraction) {
    return guarded([&] {
        need(session, "session");
        need(cache, "cache");
        need(out, "out");
        *out = nullptr;
        auto result = render(session->prepared, weights_for(cache->cache, distance_cm));
        if (clipped_fraction)
            *clipped_fraction = result.clipped_fraction;
        *out = make<ss_image>(std::move(result.image));
    });
}

ss_status ss_session_spectra(const ss_session* session, const ss_cache* cache,
                             const ss_model* model, double distance_cm, ss_spectra** out) {
    return guarded([&] {
        need(session, "session");
        need(cache, "cache");
        need(model, "model");
        need(out, "out");
        *out = nullptr;
        const auto sharpened =
            render(session->prepared, weights_for(cache->cache, distance_cm)).image;
        const SurrogateSimulator simulator(model->model);
        const auto seen = simulate_view(sharpened, distance_cm, simulator);
        *out = make<ss_spectra>(session->original, radial_power_spectrum(luminance_of(sharpened)),
                                radial_power_spectrum(luminance_of(seen)));
    });
}

ss_status ss_spectra_get(const ss_spectra* spectra, ss_session_spectrum which,
                         ss_spectrum_view* view) {
    return guarded([&] {
        need(spectra, "spectra");
        need(view, "view");
        switch (which) {
        case SS_SESSION_ORIGINAL: fill_view(spectra->original, view); return;
        case SS_SESSION_SHARPENED: fill_view(spectra->sharpened, view); return;
        case SS_SESSION_SIMULATED: fill_view(spectra->simulated, view); return;
        }
        throw ContractError("unknown spectrum");
    });
}

void ss_spectra_free(ss_spectra* spectra) { delete spectra; }
void ss_session_free(ss_session* session) { delete session; }

}  // extern "C"
