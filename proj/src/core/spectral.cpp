#include "spectral.hpp"

#include "errors.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

namespace specsharp {

namespace {

constexpr double kInvalidFloor = 1e-12;

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace

int default_bin_count(int width, int height) { return std::min(width, height) / 2; }

RadialSpectrum radial_power_spectrum(const FourierImage& spectrum, int bin_count) {
    if (bin_count <= 0)
        bin_count = default_bin_count(spectrum.width(), spectrum.height());
    require(bin_count >= 1, "radial spectrum needs at least one bin");

    std::vector<double> sum(static_cast<std::size_t>(bin_count), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(bin_count), 0);
    const double norm = 1.0 / static_cast<double>(spectrum.size());
    auto coeffs = spectrum.coefficients();
    for (int v = 0; v < spectrum.height(); ++v) {
        for (int u = 0; u < spectrum.width(); ++u) {
            const long r = std::lround(spectrum.normalized_radius(u, v) * bin_count);
            if (r < 1 || r > bin_count)
                continue;
            const auto c = coeffs[static_cast<std::size_t>(v) * spectrum.width() + u];
            sum[r - 1] += std::norm(c) * norm;
            ++count[r - 1];
        }
    }

    RadialSpectrum out;
    out.bin_centers.resize(sum.size());
    out.power.resize(sum.size());
    out.valid.assign(sum.size(), 1);
    for (std::size_t k = 0; k < sum.size(); ++k) {
        out.bin_centers[k] = static_cast<double>(k + 1) / bin_count;
        out.power[k] = count[k] ? sum[k] / static_cast<double>(count[k]) : 0.0;
        if (!count[k])
            out.valid[k] = 0;
    }
    return out;
}

RadialSpectrum radial_power_spectrum(const PlanarImage& image, int bin_count) {
    require(image.channels() == 1, "radial_power_spectrum expects a single-channel image");
    require(image.width() >= 8 && image.height() >= 8,
            "radial_power_spectrum requires an image of at least 8x8");
    return radial_power_spectrum(forward_dft(image, /*subtract_mean=*/true), bin_count);
}

RadialSpectrum log_relative_amplitude(const RadialSpectrum& sim, const RadialSpectrum& original) {
    require(sim.same_grid(original), "log_relative_amplitude: spectra use different bin grids");
    RadialSpectrum out;
    out.bin_centers = original.bin_centers;
    out.power.assign(original.bin_count(), 0.0);
    out.valid.assign(original.bin_count(), 0);
    for (std::size_t k = 0; k < original.bin_count(); ++k) {
        if (!(original.power[k] > kInvalidFloor) || !sim.valid[k] || !original.valid[k])
            continue;
        const double ratio = std::log10(sim.power[k] / original.power[k]);
        if (!std::isfinite(ratio))
            continue;
        out.power[k] = ratio;
        out.valid[k] = 1;
    }
    return out;
}

RegressionFit fit_log_slope(const RadialSpectrum& spectrum, double lo, double hi) {
    require(lo < hi, "fit domain must satisfy lo < hi");
    // Centered two-pass sums keep the normal equations well conditioned.
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    auto in_domain = [&](std::size_t k) {
        const double nu = spectrum.bin_centers[k];
        return spectrum.valid[k] && nu >= lo && nu <= hi;
    };
    for (std::size_t k = 0; k < spectrum.bin_count(); ++k) {
        if (!in_domain(k))
            continue;
        sx += spectrum.bin_centers[k];
        sy += spectrum.power[k];
        ++n;
    }
    if (n < 4)
        throw ContractError("fit_log_slope needs at least 4 valid bins in [" + format_double(lo) +
                            ", " + format_double(hi) + "], found " + std::to_string(n));
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < spectrum.bin_count(); ++k) {
        if (!in_domain(k))
            continue;
        const double dx = spectrum.bin_centers[k] - mx;
        sxx += dx * dx;
        sxy += dx * (spectrum.power[k] - my);
    }
    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.lo = lo;
    fit.hi = hi;
    fit.bins_used = n;
    return fit;
}

RadialSpectrum average_spectra(std::span<const RadialSpectrum> spectra) {
    require(!spectra.empty(), "average_spectra needs at least one spectrum");
    RadialSpectrum out = spectra.front();
    for (std::size_t s = 1; s < spectra.size(); ++s) {
        require(spectra[s].same_grid(out), "average_spectra: spectra use different bin grids");
        for (std::size_t k = 0; k < out.bin_count(); ++k) {
            out.power[k] += spectra[s].power[k];
            out.valid[k] = out.valid[k] && spectra[s].valid[k];
        }
    }
    for (double& p : out.power)
        p /= static_cast<double>(spectra.size());
    return out;
}

RadialSpectrum amplitude_spectrum(const RadialSpectrum& power) {
    RadialSpectrum out = power;
    for (double& p : out.power)
        p = std::sqrt(std::max(p, 0.0));
    return out;
}

void write_spectrum_csv(std::ostream& out, const RadialSpectrum& spectrum,
                        std::string_view value_column) {
    out << "nu," << value_column << '\n';
    for (std::size_t k = 0; k < spectrum.bin_count(); ++k) {
        out << format_double(spectrum.bin_centers[k]) << ',';
        if (spectrum.valid[k])
            out << format_double(spectrum.power[k]);
        else
            out << "nan";
        out << '\n';
    }
}

}  // namespace specsharp
