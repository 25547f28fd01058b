#include "calibration.hpp"

#include "errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace specsharp {

namespace {

double evaluate(const CalibrationProblem& problem, std::span<const double> weights) {
    double total = 0.0;
    for (std::size_t i = 0; i < problem.band_count(); ++i) {
        const auto& a = problem.simulated[i];
        const auto& b = problem.original[i];
        double band = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double r = weights[i] * a[k] - b[k];
            band += r * r;
        }
        total += band;
    }
    return problem.bin_width * total;
}

std::vector<double> central_gradient(const CalibrationProblem& problem, std::vector<double> w,
                                     double step) {
    std::vector<double> grad(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double wi = w[i];
        const double h = step * std::max(1.0, std::abs(wi));
        w[i] = wi + h;
        const double up = evaluate(problem, w);
        w[i] = wi - h;
        const double down = evaluate(problem, w);
        w[i] = wi;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

// Gradient with components that would push a zero weight negative removed.
double projected_gradient_norm(const std::vector<double>& w, const std::vector<double>& g) {
    double norm = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0 && g[i] > 0.0)
            continue;
        norm = std::max(norm, std::abs(g[i]));
    }
    return norm;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

struct Step {
    std::vector<double> point;
    double value = 0.0;
    double length = 0.0;
    bool projected = false;
    bool accepted = false;
};

Step project_step(const CalibrationProblem& problem, const std::vector<double>& w,
                  const std::vector<double>& dir, double alpha) {
    Step s;
    s.length = alpha;
    s.point.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        double v = w[i] + alpha * dir[i];
        if (v < 0.0) {
            v = 0.0;
            s.projected = true;
        }
        s.point[i] = v;
    }
    s.value = evaluate(problem, s.point);
    return s;
}

// Backtracking Armijo search along the projected path. The first trial is the
// minimizer of the quadratic through f(0), f'(0) and f(alpha0).
Step line_search(const CalibrationProblem& problem, const std::vector<double>& w, double f0,
                 const std::vector<double>& grad, const std::vector<double>& dir, double alpha0,
                 double armijo) {
    const double slope = dot(grad, dir);
    auto sufficient = [&](const Step& s) {
        std::vector<double> delta(w.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            delta[i] = s.point[i] - w[i];
        return s.value <= f0 + armijo * dot(grad, delta);
    };

    Step probe = project_step(problem, w, dir, alpha0);
    double alpha = alpha0;
    const double curvature = probe.value - f0 - slope * alpha0;
    if (curvature > 0.0)
        alpha = std::min(-slope * alpha0 * alpha0 / (2.0 * curvature), 1e3 * alpha0);

    Step trial = alpha == alpha0 ? probe : project_step(problem, w, dir, alpha);
    if (probe.value < trial.value && sufficient(probe))
        trial = std::move(probe);
    for (int k = 0; k < 60; ++k) {
        if (sufficient(trial) && trial.value <= f0) {
            trial.accepted = true;
            return trial;
        }
        alpha *= 0.5;
        trial = project_step(problem, w, dir, alpha);
    }
    return trial;
}

std::vector<double> interpolate(const std::vector<double>& lo, const std::vector<double>& hi,
                                double t) {
    std::vector<double> out(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i)
        out[i] = (1.0 - t) * lo[i] + t * hi[i];
    return out;
}

}  // namespace

std::vector<std::uint64_t> CalibrationConfig::seed_range(std::uint64_t first, int count) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i)
        seeds.push_back(first + static_cast<std::uint64_t>(i));
    return seeds;
}

BandNoise make_band_noise(int levels, int size, std::span<const std::uint64_t> seeds,
                          const PyramidOptions& pyramid) {
    require(size >= 64, "calibration noise must be at least 64x64");
    require(levels >= 2, "calibration needs at least 2 levels");
    require(!seeds.empty(), "calibration needs at least one noise seed");
    BandNoise out;
    out.levels = levels;
    out.size = size;
    for (std::uint64_t seed : seeds)
        out.bands.push_back(decompose(white_noise(size, size, seed), levels, pyramid).bands);
    return out;
}

CalibrationProblem build_problem(const Simulator& simulator, double distance_cm,
                                 const BandNoise& noise, const CalibrationConfig& config) {
    require(distance_cm > 0.0, "viewing distance must be positive");
    require(config.band_lo > 0.0 && config.band_lo < config.band_hi && config.band_hi < 1.0,
            "objective domain must satisfy 0 < a < b < 1");
    require(!noise.bands.empty(), "band noise set is empty");

    const std::size_t band_count = static_cast<std::size_t>(noise.levels - 1);
    std::vector<RadialSpectrum> simulated(band_count), original(band_count);
    for (std::size_t i = 0; i < band_count; ++i) {
        std::vector<RadialSpectrum> sim_runs, orig_runs;
        for (const auto& seed_bands : noise.bands) {
            orig_runs.push_back(radial_power_spectrum(seed_bands[i]));
            sim_runs.push_back(radial_power_spectrum(simulator.simulate(seed_bands[i], distance_cm)));
        }
        simulated[i] = average_spectra(sim_runs);
        original[i] = average_spectra(orig_runs);
        if (config.domain == SpectrumDomain::amplitude) {
            simulated[i] = amplitude_spectrum(simulated[i]);
            original[i] = amplitude_spectrum(original[i]);
        }
    }

    CalibrationProblem problem;
    problem.distance_cm = distance_cm;
    problem.levels = noise.levels;
    problem.band_lo = config.band_lo;
    problem.band_hi = config.band_hi;
    problem.bin_width = 1.0 / static_cast<double>(original.front().bin_count());
    problem.simulated.resize(band_count);
    problem.original.resize(band_count);
    const auto& centers = original.front().bin_centers;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        if (centers[k] < config.band_lo || centers[k] > config.band_hi)
            continue;
        problem.nu.push_back(centers[k]);
        for (std::size_t i = 0; i < band_count; ++i) {
            problem.simulated[i].push_back(simulated[i].power[k]);
            problem.original[i].push_back(original[i].power[k]);
        }
    }
    require(!problem.nu.empty(), "no spectrum bins fall inside the objective domain");
    return problem;
}

CalibrationProblem build_problem(const TransferModel& model, double distance_cm,
                                 const CalibrationConfig& config) {
    const SurrogateSimulator simulator(model);
    const BandNoise noise =
        make_band_noise(config.levels, config.noise_size, config.seeds, config.pyramid);
    return build_problem(simulator, distance_cm, noise, config);
}

std::vector<double> objective_gradient(const CalibrationProblem& problem,
                                       std::span<const double> weights, double step) {
    require(weights.size() == problem.band_count(),
            "expected " + std::to_string(problem.band_count()) + " weights, got " +
                std::to_string(weights.size()));
    return central_gradient(problem, std::vector<double>(weights.begin(), weights.end()), step);
}

double objective(const CalibrationProblem& problem, std::span<const double> weights) {
    require(weights.size() == problem.band_count(),
            "expected " + std::to_string(problem.band_count()) + " weights, got " +
                std::to_string(weights.size()));
    for (double w : weights)
        require(w >= 0.0, "band weights must be nonnegative");
    return evaluate(problem, weights);
}

WeightSet solve_weights(const CalibrationProblem& problem, std::span<const double> init,
                        const SolverOptions& options) {
    const std::size_t n = problem.band_count();
    std::vector<double> w(n, 1.0);
    if (!init.empty()) {
        require(init.size() == n, "initial weight count does not match the band count");
        for (std::size_t i = 0; i < n; ++i) {
            require(init[i] >= 0.0, "initial weights must be nonnegative");
            w[i] = init[i];
        }
    }

    WeightSet result;
    result.distance_cm = problem.distance_cm;
    result.levels = problem.levels;
    result.band_intervals = band_intervals(problem.levels);

    double f = evaluate(problem, w);
    std::vector<double> grad = central_gradient(problem, w, options.difference_step);
    std::vector<double> dir(n);
    for (std::size_t i = 0; i < n; ++i)
        dir[i] = -grad[i];
    double alpha = 1.0;
    bool converged = false;
    int iteration = 0;
    for (; iteration < options.max_iterations; ++iteration) {
        if (projected_gradient_norm(w, grad) < options.gradient_tolerance) {
            converged = true;
            break;
        }
        // Zero weights cannot move further down; restart if not a descent direction.
        for (std::size_t i = 0; i < n; ++i)
            if (w[i] <= 0.0 && dir[i] < 0.0)
                dir[i] = 0.0;
        if (dot(grad, dir) >= 0.0)
            for (std::size_t i = 0; i < n; ++i)
                dir[i] = (w[i] <= 0.0 && grad[i] > 0.0) ? 0.0 : -grad[i];

        Step step = line_search(problem, w, f, grad, dir, alpha, options.armijo);
        if (!step.accepted)
            break;

        const double change = f - step.value;
        const std::vector<double> previous_grad = grad;
        w = std::move(step.point);
        f = step.value;
        alpha = step.length;
        grad = central_gradient(problem, w, options.difference_step);

        if (change < options.objective_tolerance * (1.0 + f)) {
            ++iteration;
            converged = true;
            break;
        }

        if (step.projected) {
            for (std::size_t i = 0; i < n; ++i)
                dir[i] = -grad[i];
            continue;
        }
        // Polak-Ribiere with restart on negative beta.
        const double denom = dot(previous_grad, previous_grad);
        double beta = 0.0;
        if (denom > 0.0) {
            double num = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                num += grad[i] * (grad[i] - previous_grad[i]);
            beta = std::max(0.0, num / denom);
        }
        for (std::size_t i = 0; i < n; ++i)
            dir[i] = -grad[i] + beta * dir[i];
    }

    result.weights = std::move(w);
    result.objective_value = f;
    result.converged = converged;
    result.iterations = iteration;
    return result;
}

bool WeightCache::all_converged() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const WeightSet& e) { return e.converged; });
}

std::string WeightCache::to_json() const {
    nlohmann::json doc;
    doc["levels"] = levels;
    doc["a"] = band_lo;
    doc["b"] = band_hi;
    doc["model_hash"] = model_hash;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries)
        list.push_back({{"d_cm", e.distance_cm},
                        {"weights", e.weights},
                        {"objective", e.objective_value},
                        {"converged", e.converged}});
    doc["entries"] = std::move(list);
    return doc.dump(2) + "\n";
}

WeightCache WeightCache::from_json(const std::string& text) {
    WeightCache cache;
    try {
        const auto doc = nlohmann::json::parse(text);
        cache.levels = doc.at("levels").get<int>();
        cache.band_lo = doc.at("a").get<double>();
        cache.band_hi = doc.at("b").get<double>();
        cache.model_hash = doc.at("model_hash").get<std::string>();
        for (const auto& item : doc.at("entries")) {
            WeightSet e;
            e.distance_cm = item.at("d_cm").get<double>();
            e.weights = item.at("weights").get<std::vector<double>>();
            e.objective_value = item.at("objective").get<double>();
            e.converged = item.at("converged").get<bool>();
            e.levels = cache.levels;
            cache.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CacheError(std::string("weight cache is corrupt: ") + e.what());
    }
    if (cache.levels < 2)
        throw CacheError("weight cache is corrupt: levels must be at least 2");
    if (cache.entries.empty())
        throw CacheError("weight cache has no entries");
    for (std::size_t k = 0; k < cache.entries.size(); ++k) {
        auto& e = cache.entries[k];
        if (e.weights.size() != static_cast<std::size_t>(cache.levels - 1))
            throw CacheError("weight cache is corrupt: entry at d = " +
                             std::to_string(e.distance_cm) + " has " +
                             std::to_string(e.weights.size()) + " weights but levels = " +
                             std::to_string(cache.levels));
        for (double w : e.weights)
            if (!(w >= 0.0) || !std::isfinite(w))
                throw CacheError("weight cache is corrupt: negative or non-finite weight");
        if (!(e.distance_cm > 0.0) || (k > 0 && e.distance_cm <= cache.entries[k - 1].distance_cm))
            throw CacheError("weight cache is corrupt: distances must be positive and ascending");
        e.band_intervals = band_intervals(cache.levels);
    }
    return cache;
}

void WeightCache::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write weight cache " + path.string());
    out << to_json();
    if (!out)
        throw IoError("failed writing weight cache " + path.string());
}

WeightCache WeightCache::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CacheError("cannot open weight cache " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return from_json(text.str());
}

WeightCache calibrate_grid(const Simulator& simulator, const std::string& model_hash,
                           std::span<const double> distances, const CalibrationConfig& config) {
    require(!distances.empty(), "calibration grid is empty");
    for (std::size_t k = 0; k < distances.size(); ++k) {
        require(distances[k] > 0.0, "calibration distances must be positive");
        require(k == 0 || distances[k] > distances[k - 1],
                "calibration distances must be strictly ascending");
    }
    const BandNoise noise =
        make_band_noise(config.levels, config.noise_size, config.seeds, config.pyramid);

    WeightCache cache;
    cache.levels = config.levels;
    cache.band_lo = config.band_lo;
    cache.band_hi = config.band_hi;
    cache.model_hash = model_hash;
    for (double d : distances)
        cache.entries.push_back(
            solve_weights(build_problem(simulator, d, noise, config), {}, config.solver));
    return cache;
}

WeightCache calibrate_grid(const TransferModel& model, std::span<const double> distances,
                           const CalibrationConfig& config) {
    return calibrate_grid(SurrogateSimulator(model), model.hash(), distances, config);
}

WeightSet weights_for(const WeightCache& cache, double distance_cm) {
    require(!cache.entries.empty(), "weight cache is empty");
    require(distance_cm > 0.0, "viewing distance must be positive");
    const std::size_t bands = static_cast<std::size_t>(cache.levels - 1);
    for (const auto& e : cache.entries)
        if (e.weights.size() != bands)
            throw CacheError("weight cache entries disagree on the number of levels");

    WeightSet out;
    out.distance_cm = distance_cm;
    out.levels = cache.levels;
    out.band_intervals = band_intervals(cache.levels);
    out.converged = cache.all_converged();

    const auto& first = cache.entries.front();
    const auto& last = cache.entries.back();
    if (distance_cm >= last.distance_cm) {
        out.weights = last.weights;
    } else if (distance_cm < first.distance_cm) {
        out.weights = interpolate(std::vector<double>(bands, 1.0), first.weights,
                                  distance_cm / first.distance_cm);
    } else {
        auto upper = std::upper_bound(
            cache.entries.begin(), cache.entries.end(), distance_cm,
            [](double d, const WeightSet& e) { return d < e.distance_cm; });
        const auto& hi = *upper;
        const auto& lo = *(upper - 1);
        if (distance_cm == lo.distance_cm)
            out.weights = lo.weights;
        else
            out.weights = interpolate(lo.weights, hi.weights,
                                      (distance_cm - lo.distance_cm) /
                                          (hi.distance_cm - lo.distance_cm));
    }
    return out;
}

PlanarImage recombine_weighted(const BandStack& stack, const WeightSet& weights) {
    return recombine_weighted(stack, std::span<const double>(weights.weights));
}

}  // namespace specsharp
