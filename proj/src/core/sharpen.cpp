#include "sharpen.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace specsharp {

namespace {

constexpr double kWhiteLuminance = 1.0;

bool clamp_luminance(double& y) {
    if (y >= 0.0 && y <= kWhiteLuminance)
        return false;
    y = std::isnan(y) ? 0.0 : std::clamp(y, 0.0, kWhiteLuminance);
    return true;
}

}  // namespace

PreparedImage prepare(const PlanarImage& linear, int levels) {
    require(linear.channels() == 1 || linear.channels() == 3,
            "sharpening expects a grayscale or RGB image");
    PreparedImage out;
    out.channels = linear.channels();
    if (linear.channels() == 3)
        out.luma_chroma = split_luma_chroma(linear);
    else
        out.luma_chroma.luminance = linear;
    out.stack = decompose(out.luma_chroma.luminance, levels);
    return out;
}

SharpenResult render(const PreparedImage& prepared, const WeightSet& weights) {
    if (weights.weights.size() != prepared.stack.bands.size())
        throw CacheError("weight set has " + std::to_string(weights.weights.size()) +
                         " bands but the image was decomposed into " +
                         std::to_string(prepared.stack.bands.size()));
    PlanarImage luminance = recombine_weighted(prepared.stack, weights);

    SharpenResult result;
    const std::size_t n = luminance.pixel_count();
    std::vector<std::uint8_t> lum_clipped(n, 0);
    auto lum = luminance.plane(0);
    for (std::size_t p = 0; p < n; ++p)
        lum_clipped[p] = clamp_luminance(lum[p]) ? 1 : 0;

    if (prepared.channels == 3) {
        result.image = recombine(prepared.luma_chroma, luminance, &result.clipped);
        for (std::size_t p = 0; p < n; ++p)
            result.clipped[p] |= lum_clipped[p];
    } else {
        result.image = std::move(luminance);
        result.clipped = std::move(lum_clipped);
    }
    const auto count = std::count(result.clipped.begin(), result.clipped.end(), 1);
    result.clipped_fraction = static_cast<double>(count) / static_cast<double>(n);
    return result;
}

SharpenResult sharpen(const SharpenRequest& request) {
    require(request.virtual_distance_cm > 0.0, "virtual viewing distance must be positive");
    if (request.levels != 0 && request.levels != request.cache.levels)
        throw CacheError("requested " + std::to_string(request.levels) +
                         " levels but the weight cache was calibrated for " +
                         std::to_string(request.cache.levels));
    const PreparedImage prepared = prepare(request.image, request.cache.levels);
    return render(prepared, weights_for(request.cache, request.virtual_distance_cm));
}

PlanarImage luminance_of(const PlanarImage& linear) {
    if (linear.channels() == 1)
        return linear;
    return split_luma_chroma(linear).luminance;
}

PlanarImage simulate_view(const PlanarImage& linear, double distance_cm,
                          const Simulator& simulator) {
    require(linear.channels() == 1 || linear.channels() == 3,
            "simulate_view expects a grayscale or RGB image");
    if (linear.channels() == 1) {
        PlanarImage out = simulator.simulate(linear, distance_cm);
        for (double& y : out.plane(0))
            clamp_luminance(y);
        return out;
    }
    const LumaChroma split = split_luma_chroma(linear);
    PlanarImage luminance = simulator.simulate(split.luminance, distance_cm);
    for (double& y : luminance.plane(0))
        clamp_luminance(y);
    return recombine(split, luminance);
}

}  // namespace specsharp
