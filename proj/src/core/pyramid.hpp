#pragma once

#include "image.hpp"

#include <span>
#include <vector>

namespace specsharp {

/// Half-open normalized-frequency interval (lo, hi]; 1.0 is the Nyquist frequency.
struct FrequencyInterval {
    double lo = 0.0;
    double hi = 0.0;

    double geometric_midpoint() const;
    friend bool operator==(const FrequencyInterval&, const FrequencyInterval&) = default;
};

/// Nominal octave of band i (1 = finest): (2^-i, 2^-i+1].
std::vector<FrequencyInterval> band_intervals(int levels);

struct PyramidOptions {
    /// Symmetric odd-length smoothing kernel; binomial (1,4,6,4,1)/16 by default.
    std::vector<double> kernel{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
};

/// Full-resolution band decomposition: lowpass + sum(bands) == input.
struct BandStack {
    std::vector<PlanarImage> bands;  // finest first
    PlanarImage lowpass;
    int levels = 0;                  // bands.size() + 1
    std::vector<FrequencyInterval> band_intervals;
};

/// Largest L such that the image has at least 2^(L-1) pixels on its short side.
int max_levels(int width, int height);

int default_levels(int width, int height);

/// Gaussian stack decomposition. Level k is level k-1 smoothed with the kernel
/// dilated by 2^(k-1) (the undecimated equivalent of blur-and-downsample), with
/// mirror boundaries; band i is level i-1 minus level i, all at full resolution.
BandStack decompose(const PlanarImage& luminance, int levels, const PyramidOptions& options = {});

/// lowpass + sum_i weights[i] * bands[i]; the lowpass weight is fixed at 1.
PlanarImage recombine_weighted(const BandStack& stack, std::span<const double> weights);

}  // namespace specsharp
