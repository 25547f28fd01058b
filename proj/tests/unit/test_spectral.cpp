#include "errors.hpp"
#include "spectral.hpp"
#include "surrogate.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace specsharp {
namespace {

using testing::gaussian_image;

// Direct O(N^2)-per-coefficient DFT followed by a plain annulus average.
std::vector<double> brute_force_radial(const PlanarImage& img, int bins) {
    const int w = img.width(), h = img.height();
    double mean = 0.0;
    for (double v : img.samples())
        mean += v;
    mean /= static_cast<double>(img.pixel_count());
    std::vector<double> sum(bins, 0.0), count(bins, 0.0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            std::complex<double> acc = 0.0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double phase =
                        -2.0 * std::numbers::pi * (double(u) * x / w + double(v) * y / h);
                    acc += (img.at(0, x, y) - mean) * std::polar(1.0, phase);
                }
            const double fu = (u <= w / 2 ? u : u - w) / (w / 2.0);
            const double fv = (v <= h / 2 ? v : v - h) / (h / 2.0);
            const long r = std::lround(std::sqrt(fu * fu + fv * fv) * bins);
            if (r < 1 || r > bins)
                continue;
            sum[r - 1] += std::norm(acc) / (w * h);
            count[r - 1] += 1.0;
        }
    for (int k = 0; k < bins; ++k)
        sum[k] = count[k] > 0 ? sum[k] / count[k] : 0.0;
    return sum;
}

TEST(RadialSpectrum, MatchesBruteForceAnnulusAverage) {
    for (auto [w, h] : {std::pair{32, 32}, std::pair{40, 28}}) {
        const auto img = gaussian_image(w, h, 5);
        const auto fast = radial_power_spectrum(img);
        const auto slow = brute_force_radial(img, default_bin_count(w, h));
        ASSERT_EQ(fast.bin_count(), slow.size());
        for (std::size_t k = 0; k < slow.size(); ++k)
            EXPECT_NEAR(fast.power[k], slow[k], 1e-9 * (1.0 + slow[k])) << k;
    }
}

TEST(RadialSpectrum, HalfNyquistCosineLandsInOneBin) {
    const int n = 64;
    PlanarImage img(n, n, 1);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            img.at(0, x, y) = std::cos(2.0 * std::numbers::pi * (n / 4) * x / n);
    const auto spec = radial_power_spectrum(img);
    ASSERT_EQ(spec.bin_count(), 32u);
    std::size_t peak = 0;
    for (std::size_t k = 0; k < spec.bin_count(); ++k)
        if (spec.power[k] > spec.power[peak])
            peak = k;
    EXPECT_DOUBLE_EQ(spec.bin_centers[peak], 0.5);
    for (std::size_t k = 0; k < spec.bin_count(); ++k)
        if (k != peak)
            EXPECT_LT(spec.power[k], 1e-9 * spec.power[peak]) << k;
}

TEST(RadialSpectrum, ConstantImageIsZero) {
    const auto spec = radial_power_spectrum(PlanarImage(32, 24, 1, 0.8));
    for (double p : spec.power)
        EXPECT_NEAR(p, 0.0, 1e-25);
}

TEST(RadialSpectrum, UnitNoiseIsFlatOnAverage) {
    const auto spec = radial_power_spectrum(gaussian_image(256, 256, 12));
    double mean = 0.0;
    for (double p : spec.power)
        mean += p;
    mean /= static_cast<double>(spec.bin_count());
    EXPECT_NEAR(mean, 1.0, 0.1);
    for (std::size_t k = 1; k < spec.bin_count(); ++k)
        EXPECT_GT(spec.bin_centers[k], spec.bin_centers[k - 1]);
}

TEST(RadialSpectrum, ParsevalAgainstVariance) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto img = testing::random_image(37 + static_cast<int>(seed), 29, 1, seed, -2.0, 3.0);
        const auto dft = forward_dft(img, true);
        double total = 0.0;
        for (auto c : dft.coefficients())
            total += std::norm(c) / static_cast<double>(dft.size());
        total /= static_cast<double>(dft.size());
        double mean = 0.0, var = 0.0;
        for (double v : img.samples())
            mean += v;
        mean /= static_cast<double>(img.pixel_count());
        for (double v : img.samples())
            var += (v - mean) * (v - mean);
        var /= static_cast<double>(img.pixel_count());
        EXPECT_NEAR(total, var, 1e-6 * var);
    }
}

TEST(RadialSpectrum, InvariantUnderTransposition) {
    const auto img = gaussian_image(48, 48, 31);
    PlanarImage t(48, 48, 1);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
            t.at(0, y, x) = img.at(0, x, y);
    const auto a = radial_power_spectrum(img);
    const auto b = radial_power_spectrum(t);
    for (std::size_t k = 0; k < a.bin_count(); ++k)
        EXPECT_LT(std::abs(a.power[k] - b.power[k]), 1e-9 * a.power[k]) << k;
}

TEST(RadialSpectrum, WhiteNoiseFlatnessOverEightRealizations) {
    std::vector<RadialSpectrum> runs;
    for (std::uint64_t seed = 0; seed < 8; ++seed)
        runs.push_back(radial_power_spectrum(white_noise(512, 512, 100 + seed)));
    const auto avg = average_spectra(runs);
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 0; k < avg.bin_count(); ++k) {
        if (avg.bin_centers[k] < 0.1 || avg.bin_centers[k] > 0.9)
            continue;
        lo = std::min(lo, avg.power[k]);
        hi = std::max(hi, avg.power[k]);
    }
    EXPECT_LT(std::log10(hi / lo), 0.35);
}

TEST(LogRelativeAmplitude, IdentityAndDecade) {
    const auto spec = radial_power_spectrum(gaussian_image(64, 64, 3));
    const auto same = log_relative_amplitude(spec, spec);
    RadialSpectrum ten = spec;
    for (double& p : ten.power)
        p *= 10.0;
    const auto decade = log_relative_amplitude(ten, spec);
    for (std::size_t k = 0; k < spec.bin_count(); ++k) {
        ASSERT_TRUE(same.valid[k]);
        EXPECT_EQ(same.power[k], 0.0);
        EXPECT_NEAR(decade.power[k], 1.0, 1e-12);
    }
}

TEST(LogRelativeAmplitude, MarksEmptyOriginalBinsInvalid) {
    const auto flat = radial_power_spectrum(PlanarImage(32, 32, 1, 1.0));
    const auto noise = radial_power_spectrum(gaussian_image(32, 32, 1));
    const auto rel = log_relative_amplitude(noise, flat);
    for (auto v : rel.valid)
        EXPECT_EQ(v, 0);
    EXPECT_THROW(fit_log_slope(rel, 0.1, 0.6), ContractError);
}

TEST(LogRelativeAmplitude, GridMismatchIsContractError) {
    const auto a = radial_power_spectrum(gaussian_image(32, 32, 1));
    const auto b = radial_power_spectrum(gaussian_image(64, 64, 1));
    EXPECT_THROW(log_relative_amplitude(a, b), ContractError);
}

RadialSpectrum line_spectrum(int bins, double slope, double intercept) {
    RadialSpectrum s;
    for (int k = 1; k <= bins; ++k) {
        s.bin_centers.push_back(double(k) / bins);
        s.power.push_back(slope * k / bins + intercept);
        s.valid.push_back(1);
    }
    return s;
}

TEST(FitLogSlope, RecoversExactLine) {
    const auto fit = fit_log_slope(line_spectrum(128, -3.0, 0.2), 0.1, 0.6);
    EXPECT_NEAR(fit.slope, -3.0, 1e-9);
    EXPECT_NEAR(fit.intercept, 0.2, 1e-9);
}

TEST(FitLogSlope, NoisyLineMatchesNormalEquations) {
    auto s = line_spectrum(256, -2.5, 0.1);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (double& p : s.power)
        p += noise(rng);

    // Normal equations from raw sums.
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < s.bin_count(); ++k) {
        const double x = s.bin_centers[k];
        if (x < 0.1 || x > 0.6)
            continue;
        n += 1;
        sx += x;
        sy += s.power[k];
        sxx += x * x;
        sxy += x * s.power[k];
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double intercept = (sxx * sy - sx * sxy) / det;
    const double slope_sigma = 0.01 * std::sqrt(n / det);

    const auto fit = fit_log_slope(s, 0.1, 0.6);
    EXPECT_NEAR(fit.slope, slope, 1e-9);
    EXPECT_NEAR(fit.intercept, intercept, 1e-9);
    EXPECT_NEAR(fit.slope, -2.5, 3.0 * slope_sigma);
}

TEST(FitLogSlope, TooFewBinsIsContractError) {
    const auto s = line_spectrum(16, -1.0, 0.0);
    EXPECT_THROW(fit_log_slope(s, 0.5, 0.6), ContractError);
}

TEST(SpectrumCsv, HeaderAndRoundTripPrecision) {
    RadialSpectrum s;
    s.bin_centers = {0.25, 0.5};
    s.power = {1.0 / 3.0, 2.0};
    s.valid = {1, 0};
    std::ostringstream out;
    write_spectrum_csv(out, s, "log_rel");
    std::istringstream in(out.str());
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    EXPECT_EQ(header, "nu,log_rel");
    EXPECT_EQ(std::stod(row1.substr(row1.find(',') + 1)), 1.0 / 3.0);
    EXPECT_EQ(row2, "0.5,nan");
}

}  // namespace
}  // namespace specsharp
