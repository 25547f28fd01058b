#pragma once

#include "spectral.hpp"
#include "surrogate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace specsharp {

struct DistanceAnalysis {
    double distance_cm = 0.0;
    RadialSpectrum simulated;
    RadialSpectrum log_relative;
    std::optional<RegressionFit> fit;  // empty when too few valid bins
};

struct SpectrumAnalysis {
    RadialSpectrum original;
    std::vector<DistanceAnalysis> distances;
};

struct AnalysisOptions {
    double fit_lo = 0.1;
    double fit_hi = 0.6;
};

/// Radial spectra of the luminance and of its simulations at each distance,
/// with log relative amplitudes and their regression slopes.
SpectrumAnalysis analyze_image(const Simulator& simulator, const PlanarImage& luminance,
                               std::span<const double> distances,
                               const AnalysisOptions& options = {});

/// Same, averaged over normalized white-noise realizations (one per seed);
/// simulated and original spectra are averaged before taking the ratio.
SpectrumAnalysis analyze_noise(const Simulator& simulator, int size,
                               std::span<const std::uint64_t> seeds,
                               std::span<const double> distances,
                               const AnalysisOptions& options = {});

}  // namespace specsharp
