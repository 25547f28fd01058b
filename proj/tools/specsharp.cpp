#include "specsharp/specsharp.h"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUnconverged = 2;

struct Failure {
    std::string message;
};

void check(ss_status status, const std::string& context) {
    if (status != SS_OK)
        throw Failure{context + ": " + ss_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Image = std::unique_ptr<ss_image, Deleter<ss_image, ss_image_free>>;
using Model = std::unique_ptr<ss_model, Deleter<ss_model, ss_model_free>>;
using Cache = std::unique_ptr<ss_cache, Deleter<ss_cache, ss_cache_free>>;
using Analysis = std::unique_ptr<ss_analysis, Deleter<ss_analysis, ss_analysis_free>>;

std::string format_number(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

/// "A..B:S", "A..B" (step 10) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    auto number = [&](std::string_view s) {
        double v = 0.0;
        auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
            throw Failure{"bad number '" + std::string(s) + "' in grid '" + text + "'"};
        return v;
    };
    std::vector<double> grid;
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        std::string_view rest = text;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            grid.push_back(number(rest.substr(0, comma)));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
    } else {
        const auto colon = text.find(':', dots);
        const double a = number(std::string_view(text).substr(0, dots));
        const double b = number(std::string_view(text).substr(
            dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
        const double step =
            colon == std::string::npos ? 10.0 : number(std::string_view(text).substr(colon + 1));
        if (!(step > 0.0) || b < a)
            throw Failure{"grid '" + text + "' needs A <= B and a positive step"};
        const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
        for (long k = 0; k < count; ++k)
            grid.push_back(a + static_cast<double>(k) * step);
    }
    if (grid.empty())
        throw Failure{"grid '" + text + "' is empty"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0))
            throw Failure{"grid distances must be positive, got " + format_number(grid[i])};
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw Failure{"grid distances must be strictly ascending"};
    }
    return grid;
}

Model load_model(const std::string& slopes) {
    ss_model* m = nullptr;
    if (slopes.empty())
        check(ss_model_reference(&m), "model");
    else
        check(ss_model_load(slopes.c_str(), &m), "loading slopes " + slopes);
    return Model(m);
}

void require_output_dir(const fs::path& file) {
    const auto parent = file.parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
        throw Failure{"output directory " + parent.string() + " does not exist"};
}

void require_positive(double d) {
    if (!(d > 0.0) || !std::isfinite(d))
        throw Failure{"--distance must be positive, got " + format_number(d)};
}

Image read_image(const std::string& path) {
    ss_image* img = nullptr;
    check(ss_image_read_png(path.c_str(), &img), "reading " + path);
    return Image(img);
}

struct CalibrateArgs {
    std::string grid = "10..100:10";
    int levels = 6;
    std::uint64_t seed = 1;
    int seeds = 8;
    int size = 512;
    int max_iterations = 500;
    std::string slopes;
    std::string out;
};

int cmd_calibrate(const CalibrateArgs& args) {
    const auto grid = parse_grid(args.grid);
    require_output_dir(args.out);
    const auto model = load_model(args.slopes);
    ss_calibration_options options;
    ss_calibration_options_default(&options);
    options.levels = args.levels;
    options.first_seed = args.seed;
    options.seed_count = args.seeds;
    options.noise_size = args.size;
    options.max_iterations = args.max_iterations;
    ss_cache* raw = nullptr;
    check(ss_cache_calibrate(model.get(), grid.data(), grid.size(), &options, &raw), "calibrate");
    const Cache cache(raw);
    check(ss_cache_save(cache.get(), args.out.c_str()), "writing " + args.out);
    for (std::size_t i = 0; i < ss_cache_entry_count(cache.get()); ++i) {
        double d = 0.0, p = 0.0;
        int converged = 0;
        check(ss_cache_entry(cache.get(), i, &d, &p, &converged), "cache");
        std::vector<double> w(static_cast<std::size_t>(args.levels - 1));
        check(ss_cache_weights_for(cache.get(), d, w.data(), w.size()), "cache");
        std::cout << "d=" << format_number(d) << " objective=" << format_number(p)
                  << (converged ? "" : " (not converged)") << " weights=";
        for (std::size_t k = 0; k < w.size(); ++k)
            std::cout << (k ? "," : "") << format_number(w[k]);
        std::cout << '\n';
    }
    if (!ss_cache_all_converged(cache.get())) {
        std::cerr << "warning: some distances did not converge; cache written with flags\n";
        return kExitUnconverged;
    }
    return kExitOk;
}

struct SharpenArgs {
    std::string in, out, cache;
    double distance = 0.0;
};

int cmd_sharpen(SharpenArgs args) {
    require_positive(args.distance);
    if (args.cache.empty()) {
        if (const char* env = std::getenv("SPECSHARP_CACHE"))
            args.cache = env;
    }
    if (args.cache.empty() || !fs::exists(args.cache))
        throw Failure{"no weight cache" + (args.cache.empty() ? std::string() : " at " + args.cache) +
                      "; run `specsharp calibrate --out FILE` first and pass --cache FILE "
                      "or set SPECSHARP_CACHE"};
    require_output_dir(args.out);
    ss_cache* raw_cache = nullptr;
    check(ss_cache_load(args.cache.c_str(), &raw_cache), "loading cache " + args.cache);
    const Cache cache(raw_cache);
    const auto image = read_image(args.in);
    ss_image* raw = nullptr;
    double clipped = 0.0;
    check(ss_sharpen(image.get(), args.distance, cache.get(), &raw, &clipped), "sharpen");
    const Image sharpened(raw);
    check(ss_image_write_png(sharpened.get(), args.out.c_str()), "writing " + args.out);
    std::cerr << "clipped fraction: " << format_number(clipped) << '\n';
    return kExitOk;
}

struct SimulateArgs {
    std::string in, out, slopes;
    double distance = 0.0;
};

int cmd_simulate(const SimulateArgs& args) {
    require_positive(args.distance);
    require_output_dir(args.out);
    const auto model = load_model(args.slopes);
    const auto image = read_image(args.in);
    ss_image* raw = nullptr;
    check(ss_simulate_view(image.get(), args.distance, model.get(), &raw), "simulate");
    const Image seen(raw);
    check(ss_image_write_png(seen.get(), args.out.c_str()), "writing " + args.out);
    return kExitOk;
}

struct AnalyzeArgs {
    std::string in;
    bool noise = false;
    std::string grid = "10..100:10";
    std::string out;
    std::string slopes;
    std::uint64_t seed = 1;
    int seeds = 8;
    int size = 512;
};

int cmd_analyze(const AnalyzeArgs& args) {
    if (args.noise == !args.in.empty())
        throw Failure{"analyze needs exactly one of --in FILE or --noise"};
    const auto grid = parse_grid(args.grid);
    const fs::path dir = args.out;
    fs::create_directories(dir);
    const auto model = load_model(args.slopes);
    ss_analysis* raw = nullptr;
    if (args.noise) {
        check(ss_analyze_noise(model.get(), args.size, args.seed, args.seeds, grid.data(),
                               grid.size(), &raw),
              "analyze");
    } else {
        const auto image = read_image(args.in);
        check(ss_analyze_image(model.get(), image.get(), grid.data(), grid.size(), &raw), "analyze");
    }
    const Analysis analysis(raw);
    auto write = [&](ss_spectrum_kind kind, std::size_t index, const fs::path& file) {
        check(ss_analysis_write_csv(analysis.get(), kind, index, file.string().c_str()),
              "writing " + file.string());
    };
    write(SS_SPECTRUM_ORIGINAL, 0, dir / "original.csv");
    std::ofstream slopes(dir / "slopes.csv", std::ios::binary);
    slopes << "d_cm,slope\n";
    std::cout << "d_cm  slope\n";
    for (std::size_t i = 0; i < ss_analysis_distance_count(analysis.get()); ++i) {
        double d = 0.0, slope = 0.0;
        int available = 0;
        check(ss_analysis_slope(analysis.get(), i, &d, &slope, &available), "analyze");
        const auto tag = format_number(d);
        write(SS_SPECTRUM_SIMULATED, i, dir / ("sim_d" + tag + ".csv"));
        write(SS_SPECTRUM_LOG_RELATIVE, i, dir / ("logrel_d" + tag + ".csv"));
        const auto value = available ? format_number(slope) : std::string("NA");
        slopes << tag << ',' << value << '\n';
        std::cout << tag << "  " << value << '\n';
    }
    slopes.close();
    if (!slopes)
        throw Failure{"writing " + (dir / "slopes.csv").string()};
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Viewing-distance dependent image sharpening"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ss_version());

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Precompute band weights over a distance grid");
    calibrate->add_option("--grid", cal.grid, "Distances in cm: A..B:S or a comma list")
        ->capture_default_str();
    calibrate->add_option("--levels", cal.levels, "Pyramid levels")->capture_default_str();
    calibrate->add_option("--seed", cal.seed, "First noise seed")->capture_default_str();
    calibrate->add_option("--seeds", cal.seeds, "Number of noise realizations")->capture_default_str();
    calibrate->add_option("--size", cal.size, "Noise image side in pixels")->capture_default_str();
    calibrate->add_option("--max-iterations", cal.max_iterations, "Solver iteration limit per distance")
        ->capture_default_str();
    calibrate->add_option("--slopes", cal.slopes, "Slope table JSON (default: built-in)")
        ->check(CLI::ExistingFile);
    calibrate->add_option("--out", cal.out, "Cache file to write")->required();

    SharpenArgs sh;
    auto* sharpen = app.add_subcommand("sharpen", "Sharpen a PNG for a viewing distance");
    sharpen->add_option("--in", sh.in, "Input PNG")->required()->check(CLI::ExistingFile);
    sharpen->add_option("--out", sh.out, "Output PNG")->required();
    sharpen->add_option("--distance", sh.distance, "Viewing distance in cm")->required();
    sharpen->add_option("--cache", sh.cache, "Weight cache (default: $SPECSHARP_CACHE)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Render how a PNG looks from a distance");
    simulate->add_option("--in", sim.in, "Input PNG")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", sim.out, "Output PNG")->required();
    simulate->add_option("--distance", sim.distance, "Viewing distance in cm")->required();
    simulate->add_option("--slopes", sim.slopes, "Slope table JSON (default: built-in)")
        ->check(CLI::ExistingFile);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Radial spectra and log-slope fits per distance");
    auto* in_opt = analyze->add_option("--in", an.in, "Input PNG")->check(CLI::ExistingFile);
    auto* noise_opt = analyze->add_flag("--noise", an.noise, "Use white noise realizations");
    in_opt->excludes(noise_opt);
    analyze->add_option("--grid", an.grid, "Distances in cm")->capture_default_str();
    analyze->add_option("--out", an.out, "Output directory")->required();
    analyze->add_option("--slopes", an.slopes, "Slope table JSON (default: built-in)")
        ->check(CLI::ExistingFile);
    analyze->add_option("--seed", an.seed, "First noise seed")->capture_default_str();
    analyze->add_option("--seeds", an.seeds, "Number of noise realizations")->capture_default_str();
    analyze->add_option("--size", an.size, "Noise image side in pixels")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitFailure;
    }

    try {
        if (calibrate->parsed())
            return cmd_calibrate(cal);
        if (sharpen->parsed())
            return cmd_sharpen(sh);
        if (simulate->parsed())
            return cmd_simulate(sim);
        return cmd_analyze(an);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kExitFailure;
}
