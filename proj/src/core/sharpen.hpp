#pragma once

#include "calibration.hpp"
#include "color.hpp"
#include "pyramid.hpp"
#include "surrogate.hpp"

#include <cstdint>
#include <vector>

namespace specsharp {

/// Luminance decomposition of one image, reusable across viewing distances.
struct PreparedImage {
    int channels = 0;       // 1 for grayscale input, 3 for linear RGB
    LumaChroma luma_chroma; // chromaticity is empty for grayscale input
    BandStack stack;
};

PreparedImage prepare(const PlanarImage& linear, int levels);

struct SharpenResult {
    PlanarImage image;                  // linear, clamped to [0, 1]
    std::vector<std::uint8_t> clipped;  // one flag per pixel
    double clipped_fraction = 0.0;
};

/// New luminance = lowpass + sum_i w_i f_i, clamped to [0, 1], recombined with
/// the original chromaticity.
SharpenResult render(const PreparedImage& prepared, const WeightSet& weights);

struct SharpenRequest {
    const PlanarImage& image;  // linear RGB or grayscale
    double virtual_distance_cm;
    const WeightCache& cache;
    int levels = 0;            // 0: take the cache's level count
};

SharpenResult sharpen(const SharpenRequest& request);

/// Luminance seen at `distance_cm`, chromaticity kept.
PlanarImage simulate_view(const PlanarImage& linear, double distance_cm,
                          const Simulator& simulator);

/// CIE Y of a linear image (the image itself when single-channel).
PlanarImage luminance_of(const PlanarImage& linear);

}  // namespace specsharp
