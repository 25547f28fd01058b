#pragma once

#include "pyramid.hpp"
#include "spectral.hpp"
#include "surrogate.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace specsharp {

/// Which radial spectrum enters the objective. Band weights scale band
/// images, so the amplitude spectrum (square root of the annulus power) is
/// the one whose linear combination the weights control.
enum class SpectrumDomain { amplitude, power };

struct SolverOptions {
    int max_iterations = 500;
    double armijo = 1e-4;
    double objective_tolerance = 1e-10;  // relative to 1 + p
    double gradient_tolerance = 1e-8;    // infinity norm of the projected gradient
    double difference_step = 1e-4;       // scaled by max(1, |w_i|)
};

struct CalibrationConfig {
    int levels = 6;
    int noise_size = 512;
    std::vector<std::uint64_t> seeds = seed_range(1, 8);
    double band_lo = 0.05;  // a
    double band_hi = 0.6;   // b
    SpectrumDomain domain = SpectrumDomain::amplitude;
    SolverOptions solver;
    PyramidOptions pyramid;

    static std::vector<std::uint64_t> seed_range(std::uint64_t first, int count);
};

/// Band images of normalized white noise for every seed; independent of the
/// viewing distance, so one set serves a whole calibration grid.
struct BandNoise {
    int levels = 0;
    int size = 0;
    std::vector<std::vector<PlanarImage>> bands;  // [seed][band]
};

BandNoise make_band_noise(int levels, int size, std::span<const std::uint64_t> seeds,
                          const PyramidOptions& pyramid = {});

/// Discretized objective data restricted to bins with a <= nu <= b.
struct CalibrationProblem {
    double distance_cm = 0.0;
    int levels = 0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    double bin_width = 0.0;                // delta nu
    std::vector<double> nu;                // bin centers inside the domain
    std::vector<std::vector<double>> simulated;  // A_i per bin
    std::vector<std::vector<double>> original;   // B_i per bin

    std::size_t band_count() const noexcept { return simulated.size(); }
};

CalibrationProblem build_problem(const Simulator& simulator, double distance_cm,
                                 const BandNoise& noise, const CalibrationConfig& config);

CalibrationProblem build_problem(const TransferModel& model, double distance_cm,
                                 const CalibrationConfig& config);

/// p = delta_nu * sum_bins sum_i (w_i A_i - B_i)^2. Throws on negative weights.
double objective(const CalibrationProblem& problem, std::span<const double> weights);

/// Central-difference gradient of the objective with step
/// `step * max(1, |w_i|)`; used by the solver. Weights may be zero.
std::vector<double> objective_gradient(const CalibrationProblem& problem,
                                       std::span<const double> weights, double step = 1e-4);

struct WeightSet {
    double distance_cm = 0.0;
    int levels = 0;
    std::vector<double> weights;  // finest band first; lowpass weight is 1
    double objective_value = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<FrequencyInterval> band_intervals;
};

/// Projected Polak-Ribiere conjugate gradient with central-difference
/// gradients. An empty `init` starts from all ones.
WeightSet solve_weights(const CalibrationProblem& problem, std::span<const double> init = {},
                        const SolverOptions& options = {});

struct WeightCache {
    int levels = 0;
    double band_lo = 0.05;
    double band_hi = 0.6;
    std::string model_hash;
    std::vector<WeightSet> entries;  // ascending distance

    bool all_converged() const;

    std::string to_json() const;
    static WeightCache from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static WeightCache load(const std::filesystem::path& path);
};

WeightCache calibrate_grid(const Simulator& simulator, const std::string& model_hash,
                           std::span<const double> distances, const CalibrationConfig& config);

WeightCache calibrate_grid(const TransferModel& model, std::span<const double> distances,
                           const CalibrationConfig& config);

/// Per-band linear interpolation between bracketing grid distances. Below the
/// first entry the weights blend toward the identity (all ones) at d = 0;
/// above the last entry they clamp.
WeightSet weights_for(const WeightCache& cache, double distance_cm);

PlanarImage recombine_weighted(const BandStack& stack, const WeightSet& weights);

}  // namespace specsharp
