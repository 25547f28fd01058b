#include "surrogate.hpp"

#include "errors.hpp"
#include "fft.hpp"
#include "spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace specsharp {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace

TransferModel::TransferModel(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
    std::sort(anchors_.begin(), anchors_.end());
    if (anchors_.empty() || anchors_.front().first > 0.0)
        anchors_.insert(anchors_.begin(), {0.0, 0.0});
    require(anchors_.front().first == 0.0 && anchors_.front().second == 0.0,
            "slope table must have s(0) = 0");
    require(anchors_.size() >= 2, "slope table needs at least one anchor beyond d = 0");
    for (std::size_t i = 1; i < anchors_.size(); ++i) {
        const auto& [d0, s0] = anchors_[i - 1];
        const auto& [d1, s1] = anchors_[i];
        require(std::isfinite(d1) && std::isfinite(s1), "slope table entries must be finite");
        require(d1 > d0, "slope table distances must be distinct and nonnegative");
        require(s1 <= s0, "slope table must be non-increasing in distance (at d = " +
                              shortest(d1) + ")");
    }
}

TransferModel TransferModel::reference() {
    return TransferModel({{10, -0.44},
                          {20, -1.02},
                          {30, -1.59},
                          {40, -2.20},
                          {50, -2.80},
                          {60, -3.37},
                          {70, -3.88},
                          {80, -4.36},
                          {90, -4.78},
                          {100, -5.14}});
}

TransferModel TransferModel::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("slope table is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("anchors") || !doc["anchors"].is_array())
        throw ContractError("slope table must be an object with an \"anchors\" array");
    std::vector<Anchor> anchors;
    for (const auto& entry : doc["anchors"]) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
            !entry[1].is_number())
            throw ContractError("each slope table anchor must be [d_cm, slope]");
        anchors.emplace_back(entry[0].get<double>(), entry[1].get<double>());
    }
    return TransferModel(std::move(anchors));
}

TransferModel TransferModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open slope table " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return from_json(text.str());
}

std::string TransferModel::to_json() const {
    nlohmann::json anchors = nlohmann::json::array();
    for (const auto& [d, s] : anchors_)
        anchors.push_back({d, s});
    return nlohmann::json{{"anchors", anchors}}.dump(2);
}

double TransferModel::slope_at(double distance_cm) const {
    if (distance_cm <= 0.0)
        return 0.0;
    if (distance_cm >= anchors_.back().first)
        return anchors_.back().second;
    auto upper = std::upper_bound(anchors_.begin(), anchors_.end(), distance_cm,
                                  [](double d, const Anchor& a) { return d < a.first; });
    const auto& [d1, s1] = *upper;
    const auto& [d0, s0] = *(upper - 1);
    const double t = (distance_cm - d0) / (d1 - d0);
    return s0 + t * (s1 - s0);
}

double TransferModel::transfer_at(double distance_cm, double nu) const {
    require(distance_cm > 0.0, "viewing distance must be positive");
    require(nu >= 0.0 && nu <= 1.0, "normalized frequency must lie in [0, 1]");
    return std::pow(10.0, slope_at(distance_cm) * nu);
}

std::string TransferModel::hash() const {
    // FNV-1a over the canonical "d:s;" rendering of the table.
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [d, s] : anchors_)
        mix(shortest(d) + ":" + shortest(s) + ";");
    std::ostringstream hex;
    hex << std::hex;
    hex.width(16);
    hex.fill('0');
    hex << h;
    return hex.str();
}

double band_transfer_constant(const TransferModel& model, double distance_cm,
                              const FrequencyInterval& interval) {
    require(interval.lo >= 0.0 && interval.lo < interval.hi && interval.hi <= 1.0,
            "band interval must satisfy 0 <= lo < hi <= 1");
    return model.transfer_at(distance_cm, interval.geometric_midpoint());
}

SurrogateSimulator::SurrogateSimulator(TransferModel model, double gain_exponent)
    : model_(std::move(model)), gain_exponent_(gain_exponent) {
    require(gain_exponent > 0.0, "gain exponent must be positive");
}

PlanarImage SurrogateSimulator::simulate(const PlanarImage& luminance, double distance_cm) const {
    require(luminance.channels() == 1, "simulate expects a single-channel image");
    require(luminance.width() >= 8 && luminance.height() >= 8,
            "simulate requires an image of at least 8x8");
    require(distance_cm > 0.0, "viewing distance must be positive");

    const double log_gain = model_.slope_at(distance_cm) * gain_exponent_;
    FourierImage spectrum = forward_dft(luminance);
    auto coeffs = spectrum.coefficients();
    for (int v = 0; v < spectrum.height(); ++v)
        for (int u = 0; u < spectrum.width(); ++u)
            coeffs[static_cast<std::size_t>(v) * spectrum.width() + u] *=
                std::pow(10.0, log_gain * spectrum.normalized_radius(u, v));
    return inverse_dft_real(std::move(spectrum));
}

PlanarImage white_noise(int width, int height, std::uint64_t seed) {
    require(width >= 8 && height >= 8, "white_noise requires at least 8x8");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PlanarImage noise(width, height, 1);
    auto samples = noise.plane(0);
    for (double& s : samples)
        s = gauss(rng);
    double mean = 0.0;
    for (double s : samples)
        mean += s;
    mean /= static_cast<double>(samples.size());
    for (double& s : samples)
        s -= mean;

    const RadialSpectrum spectrum = radial_power_spectrum(noise);
    double level = 0.0;
    for (double p : spectrum.power)
        level += p;
    level /= static_cast<double>(spectrum.bin_count());
    const double scale = 1.0 / std::sqrt(level);
    for (double& s : samples)
        s *= scale;
    return noise;
}

double pixels_per_degree(const ViewingGeometry& geometry) {
    require(geometry.distance_cm > 0.0 && geometry.pixels_per_cm > 0.0,
            "viewing geometry needs positive distance and pixel density");
    constexpr double half_degree = 0.5 * std::numbers::pi / 180.0;
    return geometry.pixels_per_cm * 2.0 * geometry.distance_cm * std::tan(half_degree);
}

double nyquist_cpd(const ViewingGeometry& geometry) { return pixels_per_degree(geometry) / 2.0; }

}  // namespace specsharp
