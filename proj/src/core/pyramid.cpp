#include "pyramid.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace specsharp {

namespace {

// Reflects an out-of-range index about the edges without repeating the edge
// sample (d c b | a b c d | c b a); periodic for offsets beyond one width.
int mirror_index(int i, int n) {
    if (n == 1)
        return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0)
        i += period;
    return i < n ? i : period - i;
}

// Per-output-position source indices for every kernel tap along one axis.
std::vector<int> tap_table(int n, int radius, int dilation) {
    const int taps = 2 * radius + 1;
    std::vector<int> table(static_cast<std::size_t>(n) * taps);
    for (int i = 0; i < n; ++i)
        for (int t = 0; t < taps; ++t)
            table[static_cast<std::size_t>(i) * taps + t] =
                mirror_index(i + (t - radius) * dilation, n);
    return table;
}

PlanarImage smooth(const PlanarImage& src, std::span<const double> kernel, int dilation) {
    const int w = src.width(), h = src.height();
    const int radius = static_cast<int>(kernel.size() / 2);
    const int taps = static_cast<int>(kernel.size());
    const auto cols = tap_table(w, radius, dilation);
    const auto rows = tap_table(h, radius, dilation);

    PlanarImage tmp(w, h, 1);
    auto in = src.plane(0);
    auto mid = tmp.plane(0);
    for (int y = 0; y < h; ++y) {
        const double* row = in.data() + static_cast<std::size_t>(y) * w;
        double* dst = mid.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const int* idx = cols.data() + static_cast<std::size_t>(x) * taps;
            double acc = 0.0;
            for (int t = 0; t < taps; ++t)
                acc += kernel[t] * row[idx[t]];
            dst[x] = acc;
        }
    }

    PlanarImage out(w, h, 1);
    auto dst = out.plane(0);
    std::vector<double> acc(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const int* idx = rows.data() + static_cast<std::size_t>(y) * taps;
        for (int t = 0; t < taps; ++t) {
            const double k = kernel[t];
            const double* row = mid.data() + static_cast<std::size_t>(idx[t]) * w;
            for (int x = 0; x < w; ++x)
                acc[x] += k * row[x];
        }
        std::copy(acc.begin(), acc.end(), dst.begin() + static_cast<std::ptrdiff_t>(y) * w);
    }
    return out;
}

}  // namespace

double FrequencyInterval::geometric_midpoint() const {
    return lo > 0.0 ? std::sqrt(lo * hi) : hi / 2.0;
}

std::vector<FrequencyInterval> band_intervals(int levels) {
    std::vector<FrequencyInterval> out;
    for (int i = 1; i < levels; ++i)
        out.push_back({std::ldexp(1.0, -i), std::ldexp(1.0, -i + 1)});
    return out;
}

int max_levels(int width, int height) {
    const int side = std::min(width, height);
    int levels = 1;
    while ((1L << levels) <= side)
        ++levels;
    return levels;
}

int default_levels(int width, int height) {
    require(width >= 16 && height >= 16, "default_levels requires an image of at least 16x16");
    const int log2_side = static_cast<int>(std::floor(std::log2(std::min(width, height))));
    return std::clamp(log2_side - 3, 3, 7);
}

BandStack decompose(const PlanarImage& luminance, int levels, const PyramidOptions& options) {
    require(luminance.channels() == 1, "decompose expects a single-channel image");
    require(levels >= 2, "decompose needs at least 2 levels, got " + std::to_string(levels));
    require(options.kernel.size() % 2 == 1, "pyramid kernel must have odd length");
    const int feasible = max_levels(luminance.width(), luminance.height());
    if (levels > feasible)
        throw ContractError("image " + std::to_string(luminance.width()) + "x" +
                            std::to_string(luminance.height()) + " is too small for " +
                            std::to_string(levels) + " levels; maximum feasible is " +
                            std::to_string(feasible));

    BandStack stack;
    stack.levels = levels;
    stack.band_intervals = band_intervals(levels);
    PlanarImage current = luminance;
    for (int k = 1; k < levels; ++k) {
        PlanarImage next = smooth(current, options.kernel, 1 << (k - 1));
        auto band = current.plane(0);
        auto lower = next.plane(0);
        for (std::size_t p = 0; p < band.size(); ++p)
            band[p] -= lower[p];
        stack.bands.push_back(std::move(current));
        current = std::move(next);
    }
    stack.lowpass = std::move(current);
    return stack;
}

PlanarImage recombine_weighted(const BandStack& stack, std::span<const double> weights) {
    require(weights.size() == stack.bands.size(),
            "expected " + std::to_string(stack.bands.size()) + " band weights, got " +
                std::to_string(weights.size()));
    for (double w : weights)
        require(w >= 0.0 && std::isfinite(w), "band weights must be finite and nonnegative");

    PlanarImage out = stack.lowpass;
    auto dst = out.plane(0);
    for (std::size_t i = 0; i < stack.bands.size(); ++i) {
        const double w = weights[i];
        auto band = stack.bands[i].plane(0);
        for (std::size_t p = 0; p < dst.size(); ++p)
            dst[p] += w * band[p];
    }
    return out;
}

}  // namespace specsharp
