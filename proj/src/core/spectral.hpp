#pragma once

#include "fft.hpp"
#include "image.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace specsharp {

/// Binned radial spectrum. Bin k (0-based) is centered at (k+1)/bin_count in
/// normalized frequency; `valid` marks bins that may enter a fit.
struct RadialSpectrum {
    std::vector<double> bin_centers;
    std::vector<double> power;
    std::vector<std::uint8_t> valid;

    std::size_t bin_count() const noexcept { return power.size(); }
    bool same_grid(const RadialSpectrum& other) const noexcept {
        return bin_centers == other.bin_centers;
    }
};

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t bins_used = 0;
};

/// floor(min(width, height) / 2).
int default_bin_count(int width, int height);

/// Per-annulus mean of |F|^2 / (width*height) over the DFT of the
/// mean-subtracted image; unit-variance white noise therefore averages 1.
/// `bin_count` 0 selects default_bin_count.
RadialSpectrum radial_power_spectrum(const PlanarImage& image, int bin_count = 0);

/// Same binning applied to an existing transform (no mean subtraction).
RadialSpectrum radial_power_spectrum(const FourierImage& spectrum, int bin_count = 0);

/// log10(sim / original) per bin; bins where original <= 1e-12 or the ratio
/// is not finite are marked invalid.
RadialSpectrum log_relative_amplitude(const RadialSpectrum& sim, const RadialSpectrum& original);

/// Ordinary least squares of value against bin center over valid bins in [lo, hi].
RegressionFit fit_log_slope(const RadialSpectrum& spectrum, double lo = 0.1, double hi = 0.6);

/// Bin-wise mean of spectra sharing one grid; a bin is valid if valid in all.
RadialSpectrum average_spectra(std::span<const RadialSpectrum> spectra);

/// Bin-wise square root of the power: the radial amplitude spectrum.
RadialSpectrum amplitude_spectrum(const RadialSpectrum& power);

/// CSV with header `nu,<value_column>` at full double precision.
void write_spectrum_csv(std::ostream& out, const RadialSpectrum& spectrum,
                        std::string_view value_column = "power");

}  // namespace specsharp
