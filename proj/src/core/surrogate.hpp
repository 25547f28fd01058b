#pragma once

#include "image.hpp"
#include "pyramid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace specsharp {

/// Log-linear perceptual transfer model. For viewing distance d (cm) the
/// power transfer is H_d(nu) = 10^(s(d) * nu), with s(d) interpolated
/// piecewise-linearly between anchors, s(0) = 0, and held constant beyond the
/// last anchor.
class TransferModel {
public:
    using Anchor = std::pair<double, double>;  // (distance_cm, log10 slope)

    explicit TransferModel(std::vector<Anchor> anchors);

    /// White-noise slopes for 10..100 cm measured through the reference
    /// perceptual pipeline.
    static TransferModel reference();

    static TransferModel from_json(const std::string& text);
    static TransferModel load(const std::filesystem::path& path);
    std::string to_json() const;

    const std::vector<Anchor>& anchors() const noexcept { return anchors_; }

    double slope_at(double distance_cm) const;

    /// Power-domain transfer; requires nu in [0, 1] and d > 0.
    double transfer_at(double distance_cm, double nu) const;

    /// Hex content hash of the anchor table.
    std::string hash() const;

private:
    std::vector<Anchor> anchors_;
};

/// H_d at the geometric midpoint of the interval (hi/2 when lo is 0).
double band_transfer_constant(const TransferModel& model, double distance_cm,
                              const FrequencyInterval& interval);

/// Image-in, image-out perceptual simulation at a viewing distance.
class Simulator {
public:
    virtual ~Simulator() = default;
    virtual PlanarImage simulate(const PlanarImage& luminance, double distance_cm) const = 0;
};

/// Frequency-domain realization of the transfer model. Each DFT coefficient
/// is scaled by H_d(nu)^gain_exponent; 0.5 makes the simulated power spectrum
/// follow H_d.
class SurrogateSimulator final : public Simulator {
public:
    explicit SurrogateSimulator(TransferModel model, double gain_exponent = 0.5);

    PlanarImage simulate(const PlanarImage& luminance, double distance_cm) const override;

    const TransferModel& model() const noexcept { return model_; }
    double gain_exponent() const noexcept { return gain_exponent_; }

private:
    TransferModel model_;
    double gain_exponent_;
};

/// Zero-mean Gaussian white noise scaled so its radial power spectrum
/// averages exactly one. Deterministic per seed.
PlanarImage white_noise(int width, int height, std::uint64_t seed);

struct ViewingGeometry {
    double distance_cm = 0.0;
    double pixels_per_cm = 0.0;
    int width_px = 0;
    int height_px = 0;
};

double pixels_per_degree(const ViewingGeometry& geometry);

/// Highest representable spatial frequency in cycles per degree.
double nyquist_cpd(const ViewingGeometry& geometry);

}  // namespace specsharp
