#include "specsharp/specsharp.h"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int exit_code;
    std::string output;
};

CliRun run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" SPECSHARP_CLI "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr)
        return {-1, "popen failed"};
    std::string out;
    std::array<char, 4096> buf{};
    while (size_t n = fread(buf.data(), 1, buf.size(), pipe))
        out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string sha256(const fs::path& file) {
    const std::string cmd = "'" CMAKE_COMMAND "' -E sha256sum '" + file.string() + "'";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::array<char, 65> hash{};
    if (pipe == nullptr || fread(hash.data(), 1, 64, pipe) != 64)
        hash[0] = '\0';
    if (pipe)
        pclose(pipe);
    return hash.data();
}

std::vector<uint8_t> pixels(const fs::path& file, int* channels = nullptr) {
    ss_image* img = nullptr;
    if (ss_image_read_png(file.c_str(), &img) != SS_OK)
        return {};
    std::vector<uint8_t> px(static_cast<size_t>(ss_image_width(img)) * ss_image_height(img) *
                            ss_image_channels(img));
    ss_image_to_srgb8(img, px.data(), px.size());
    if (channels)
        *channels = ss_image_channels(img);
    ss_image_free(img);
    return px;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path kData = DATA_DIR;
const fs::path kGolden = GOLDEN_DIR;

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        work_ = fs::temp_directory_path() / "specsharp_cli_test";
        fs::remove_all(work_);
        fs::create_directories(work_);
        calibrate_ = run("calibrate --out '" + (work_ / "cache.json").string() + "'");
    }
    static fs::path cache() { return work_ / "cache.json"; }
    static fs::path work_;
    static CliRun calibrate_;
};

fs::path Cli::work_;
CliRun Cli::calibrate_;

TEST_F(Cli, DefaultCalibrationHasTenConvergedEntries) {
    ASSERT_EQ(calibrate_.exit_code, 0) << calibrate_.output;
    const auto cache_json = nlohmann::json::parse(slurp(cache()));
    EXPECT_EQ(cache_json["levels"], 6);
    ASSERT_EQ(cache_json["entries"].size(), 10u);
    for (const auto& e : cache_json["entries"])
        EXPECT_TRUE(e["converged"].get<bool>());
}

TEST_F(Cli, CalibrationIsDeterministic) {
    const std::string args = "calibrate --grid 10..30:10 --levels 4 --size 128 --seeds 2 --seed 7 ";
    ASSERT_EQ(run(args + "--out '" + (work_ / "a.json").string() + "'").exit_code, 0);
    ASSERT_EQ(run(args + "--out '" + (work_ / "b.json").string() + "'").exit_code, 0);
    EXPECT_EQ(sha256(work_ / "a.json"), sha256(work_ / "b.json"));
    ASSERT_EQ(run("calibrate --grid 10..30:10 --levels 4 --size 128 --seeds 2 --seed 8 --out '" +
                  (work_ / "c.json").string() + "'")
                  .exit_code,
              0);
    EXPECT_NE(sha256(work_ / "a.json"), sha256(work_ / "c.json"));
}

TEST_F(Cli, UsageErrorsExitOne) {
    const auto out = (work_ / "x.json").string();
    EXPECT_EQ(run("calibrate --grid 0..20:10 --out " + out).exit_code, 1);
    EXPECT_EQ(run("calibrate --grid 0,10 --out " + out).exit_code, 1);
    EXPECT_EQ(run("calibrate --grid 30,20 --out " + out).exit_code, 1);
    EXPECT_EQ(run("calibrate --grid ten --out " + out).exit_code, 1);
    EXPECT_EQ(run("calibrate").exit_code, 1);
    EXPECT_EQ(run("").exit_code, 1);
    EXPECT_EQ(run("frobnicate").exit_code, 1);
    EXPECT_EQ(run("calibrate --grid 10 --out /nonexistent/dir/x.json").exit_code, 1);
    EXPECT_FALSE(fs::exists(out));
    const auto in = (kData / "test_card.png").string();
    EXPECT_EQ(run("sharpen --in " + in + " --out x.png --distance 0 --cache " + cache().string()).exit_code, 1);
    EXPECT_EQ(run("simulate --in " + in + " --out x.png --distance -3").exit_code, 1);
    EXPECT_EQ(run("analyze --noise --in " + in + " --out " + work_.string()).exit_code, 1);
    EXPECT_EQ(run("analyze --out " + work_.string()).exit_code, 1);
    EXPECT_EQ(run("--help").exit_code, 0);
}

TEST_F(Cli, UnconvergedCalibrationExitsTwoAndStillWrites) {
    const auto out = work_ / "starved.json";
    const auto r = run("calibrate --grid 60,90 --levels 5 --size 128 --seeds 1 --max-iterations 1 --out '" +
                       out.string() + "'");
    EXPECT_EQ(r.exit_code, 2) << r.output;
    EXPECT_NE(r.output.find("not converge"), std::string::npos);
    const auto written = nlohmann::json::parse(slurp(out));
    ASSERT_EQ(written["entries"].size(), 2u);
    EXPECT_FALSE(written["entries"][0]["converged"].get<bool>());
}

TEST_F(Cli, SharpenGoldenOnTestCard) {
    ASSERT_EQ(calibrate_.exit_code, 0);
    const auto out = work_ / "card_d80.png";
    const auto r = run("sharpen --in '" + (kData / "test_card.png").string() + "' --out '" +
                       out.string() + "' --distance 80 --cache '" + cache().string() + "'");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("clipped fraction:"), std::string::npos);
    const std::string golden = slurp(kGolden / "test_card_d80.sha256").substr(0, 64);
    EXPECT_EQ(sha256(out), golden);
}

TEST_F(Cli, SharpenNearZeroKeepsPixels) {
    ASSERT_EQ(calibrate_.exit_code, 0);
    for (const char* name : {"test_card.png", "step_card.png"}) {
        const auto out = work_ / (std::string("near_zero_") + name);
        ASSERT_EQ(run("sharpen --in '" + (kData / name).string() + "' --out '" + out.string() +
                      "' --distance 0.001 --cache '" + cache().string() + "'")
                      .exit_code,
                  0);
        const auto a = pixels(kData / name), b = pixels(out);
        ASSERT_EQ(a.size(), b.size());
        int worst = 0;
        for (size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(int(a[i]) - int(b[i])));
        EXPECT_LE(worst, 1) << name;
    }
}

TEST_F(Cli, SharpenUsesEnvironmentCache) {
    ASSERT_EQ(calibrate_.exit_code, 0);
    const auto a = work_ / "env_a.png", b = work_ / "env_b.png";
    const auto in = (kData / "step_card.png").string();
    ASSERT_EQ(run("sharpen --in '" + in + "' --out '" + a.string() + "' --distance 35 --cache '" +
                  cache().string() + "'")
                  .exit_code,
              0);
    ASSERT_EQ(run("sharpen --in '" + in + "' --out '" + b.string() + "' --distance 35",
                  "SPECSHARP_CACHE='" + cache().string() + "'")
                  .exit_code,
              0);
    EXPECT_EQ(sha256(a), sha256(b));
}

TEST_F(Cli, SharpenErrors) {
    const auto in = (kData / "test_card.png").string();
    const auto out = (work_ / "err.png").string();
    auto r = run("sharpen --in " + in + " --out " + out + " --distance 30 --cache /nonexistent.json");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("calibrate"), std::string::npos) << r.output;
    r = run("sharpen --in " + in + " --out " + out + " --distance 30", "SPECSHARP_CACHE=");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("calibrate"), std::string::npos) << r.output;

    const auto text = work_ / "notes.png";
    std::ofstream(text) << "just some text";
    r = run("sharpen --in '" + text.string() + "' --out " + out + " --distance 30 --cache '" +
            cache().string() + "'");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("PNG"), std::string::npos) << r.output;

    const auto corrupt = work_ / "corrupt.json";
    std::ofstream(corrupt) << "{\"levels\": 6";
    r = run("sharpen --in " + in + " --out " + out + " --distance 30 --cache '" + corrupt.string() + "'");
    EXPECT_EQ(r.exit_code, 1);
}

TEST_F(Cli, SimulateWritesSameShape) {
    const auto out = work_ / "sim.png";
    ASSERT_EQ(run("simulate --in '" + (kData / "test_card.png").string() + "' --out '" +
                  out.string() + "' --distance 60")
                  .exit_code,
              0);
    int channels = 0;
    EXPECT_EQ(pixels(out, &channels).size(), 512u * 512u * 3u);
    EXPECT_EQ(channels, 3);
}

TEST_F(Cli, AnalyzeNoiseReproducesSlopeTable) {
    const auto dir = work_ / "noise";
    const auto r = run("analyze --noise --grid 10..100:10 --out '" + dir.string() + "'");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const double expected[] = {-0.44, -1.02, -1.59, -2.20, -2.80, -3.37, -3.88, -4.36, -4.78, -5.14};
    std::ifstream in(dir / "slopes.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "d_cm,slope");
    for (double want : expected) {
        ASSERT_TRUE(std::getline(in, line));
        const auto comma = line.find(',');
        EXPECT_NEAR(std::stod(line.substr(comma + 1)), want, 0.15) << line;
    }
    EXPECT_EQ(slurp(dir / "original.csv").substr(0, 9), "nu,power\n");
    EXPECT_EQ(slurp(dir / "logrel_d40.csv").substr(0, 11), "nu,log_rel\n");
    EXPECT_TRUE(fs::exists(dir / "sim_d100.csv"));
}

TEST_F(Cli, AnalyzeConstantImageReportsNotApplicable) {
    const auto flat = work_ / "flat.png";
    const std::vector<uint8_t> px(64 * 64, 90);
    ss_image* img = nullptr;
    ASSERT_EQ(ss_image_from_srgb8(64, 64, 1, px.data(), &img), SS_OK);
    ASSERT_EQ(ss_image_write_png(img, flat.c_str()), SS_OK);
    ss_image_free(img);
    const auto dir = work_ / "flat";
    ASSERT_EQ(run("analyze --in '" + flat.string() + "' --grid 20,40 --out '" + dir.string() + "'").exit_code, 0);
    EXPECT_EQ(slurp(dir / "slopes.csv"), "d_cm,slope\n20,NA\n40,NA\n");
    std::ifstream in(dir / "original.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
        EXPECT_EQ(line.substr(line.find(',') + 1), "0") << line;
}

}  // namespace
