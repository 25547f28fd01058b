#include "analysis.hpp"

#include "errors.hpp"

namespace specsharp {

namespace {

SpectrumAnalysis finish(RadialSpectrum original, std::vector<RadialSpectrum> simulated,
                        std::span<const double> distances, const AnalysisOptions& options) {
    SpectrumAnalysis out;
    out.original = std::move(original);
    for (std::size_t k = 0; k < distances.size(); ++k) {
        DistanceAnalysis entry;
        entry.distance_cm = distances[k];
        entry.simulated = std::move(simulated[k]);
        entry.log_relative = log_relative_amplitude(entry.simulated, out.original);
        try {
            entry.fit = fit_log_slope(entry.log_relative, options.fit_lo, options.fit_hi);
        } catch (const ContractError&) {
            entry.fit.reset();
        }
        out.distances.push_back(std::move(entry));
    }
    return out;
}

void check_distances(std::span<const double> distances) {
    require(!distances.empty(), "analysis needs at least one viewing distance");
    for (double d : distances)
        require(d > 0.0, "viewing distances must be positive");
}

}  // namespace

SpectrumAnalysis analyze_image(const Simulator& simulator, const PlanarImage& luminance,
                               std::span<const double> distances, const AnalysisOptions& options) {
    check_distances(distances);
    std::vector<RadialSpectrum> simulated;
    for (double d : distances)
        simulated.push_back(radial_power_spectrum(simulator.simulate(luminance, d)));
    return finish(radial_power_spectrum(luminance), std::move(simulated), distances, options);
}

SpectrumAnalysis analyze_noise(const Simulator& simulator, int size,
                               std::span<const std::uint64_t> seeds,
                               std::span<const double> distances, const AnalysisOptions& options) {
    check_distances(distances);
    require(!seeds.empty(), "noise analysis needs at least one seed");
    std::vector<RadialSpectrum> originals;
    std::vector<std::vector<RadialSpectrum>> per_distance(distances.size());
    for (std::uint64_t seed : seeds) {
        const PlanarImage noise = white_noise(size, size, seed);
        originals.push_back(radial_power_spectrum(noise));
        for (std::size_t k = 0; k < distances.size(); ++k)
            per_distance[k].push_back(radial_power_spectrum(simulator.simulate(noise, distances[k])));
    }
    std::vector<RadialSpectrum> simulated;
    for (const auto& runs : per_distance)
        simulated.push_back(average_spectra(runs));
    return finish(average_spectra(originals), std::move(simulated), distances, options);
}

}  // namespace specsharp
