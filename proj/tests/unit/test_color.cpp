#include "color.hpp"
#include "errors.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace specsharp {
namespace {

using testing::random_image;

// Direct evaluation of the IEC 61966-2-1 decoding curve.
double iec_decode(int code) {
    const double v = code / 255.0;
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

EncodedImage single_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return EncodedImage{1, 1, 3, {r, g, b}};
}

Vec3 chromaticity_of(const Vec3& rgb) {
    const Vec3 xyz = linear_rgb_to_xyz(rgb);
    const double sum = xyz[0] + xyz[1] + xyz[2];
    return {xyz[0] / sum, xyz[1] / sum, xyz[1]};
}

TEST(ColorDecode, FixedPointsAndMidCode) {
    const auto black = decode_to_linear(single_pixel(0, 0, 0));
    const auto white = decode_to_linear(single_pixel(255, 255, 255));
    const auto mid = decode_to_linear(single_pixel(128, 128, 128));
    EXPECT_EQ(black.at(0, 0, 0), 0.0);
    EXPECT_EQ(white.at(1, 0, 0), 1.0);
    EXPECT_NEAR(mid.at(2, 0, 0), 0.21586, 5e-6);
    EXPECT_NEAR(mid.at(2, 0, 0), iec_decode(128), 1e-15);
}

TEST(ColorDecode, MatchesFormulaForEveryCode) {
    for (int code = 0; code < 256; ++code)
        EXPECT_NEAR(srgb_to_linear(code / 255.0), iec_decode(code), 1e-15) << code;
}

TEST(ColorDecode, EncodeOfDecodeIsExactForAllCodes) {
    EncodedImage ramp{256, 1, 1, {}};
    for (int code = 0; code < 256; ++code)
        ramp.pixels.push_back(static_cast<std::uint8_t>(code));
    const EncodedImage back = encode_to_srgb(decode_to_linear(ramp));
    EXPECT_EQ(back.pixels, ramp.pixels);
}

TEST(ColorEncode, ImageEncodeMatchesPerSampleRounding) {
    PlanarImage img(4096, 1, 1);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(-0.05, 1.05);
    auto plane = img.plane(0);
    for (std::size_t i = 0; i < plane.size(); ++i)
        plane[i] = unit(rng);
    // Values straddling the code boundaries.
    for (int c = 0; c < 255; ++c) {
        const double t = srgb_to_linear((c + 0.5) / 255.0);
        plane[static_cast<std::size_t>(c) * 4] = std::nextafter(t, 0.0);
        plane[static_cast<std::size_t>(c) * 4 + 1] = t;
        plane[static_cast<std::size_t>(c) * 4 + 2] = std::nextafter(t, 1.0);
    }
    const auto encoded = encode_to_srgb(img);
    for (std::size_t i = 0; i < plane.size(); ++i)
        ASSERT_EQ(encoded.pixels[i], encode_srgb_code(plane[i])) << plane[i];
}

TEST(ColorDecode, RejectsUnsupportedChannelCount) {
    EncodedImage rgba{1, 1, 4, {1, 2, 3, 4}};
    EXPECT_THROW(decode_to_linear(rgba), DecodeError);
    EncodedImage short_buffer{2, 2, 3, {1, 2, 3}};
    EXPECT_THROW(decode_to_linear(short_buffer), DecodeError);
}

TEST(LumaChroma, WhiteBlackGreen) {
    PlanarImage img(3, 1, 3);
    for (int c = 0; c < 3; ++c)
        img.at(c, 0, 0) = 1.0;        // white
    img.at(1, 2, 0) = 1.0;            // pure green; pixel 1 stays black
    const LumaChroma lc = split_luma_chroma(img);

    EXPECT_NEAR(lc.luminance.at(0, 0, 0), 1.0, 1e-12);
    EXPECT_NEAR(lc.chromaticity.at(0, 0, 0), 0.3127, 1e-4);
    EXPECT_NEAR(lc.chromaticity.at(1, 0, 0), 0.3290, 1e-4);

    EXPECT_EQ(lc.luminance.at(0, 1, 0), 0.0);
    EXPECT_EQ(lc.chromaticity.at(0, 1, 0), kD65x);
    EXPECT_EQ(lc.chromaticity.at(1, 1, 0), kD65y);

    EXPECT_NEAR(lc.luminance.at(0, 2, 0), 0.7152, 1e-12);
}

TEST(LumaChroma, ChromaticityInsideSpectralTriangle) {
    const auto img = random_image(32, 32, 3, 7);
    const auto lc = split_luma_chroma(img);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const double x = lc.chromaticity.plane(0)[p];
        const double y = lc.chromaticity.plane(1)[p];
        EXPECT_GT(x, 0.0);
        EXPECT_GT(y, 0.0);
        EXPECT_LE(x + y, 1.0);
        EXPECT_GE(lc.luminance.plane(0)[p], 0.0);
    }
}

TEST(Recombine, UnchangedLuminanceReproducesInput) {
    const auto img = random_image(64, 48, 3, 11, 0.02, 0.98);
    const auto lc = split_luma_chroma(img);
    std::vector<std::uint8_t> clipped;
    const auto out = recombine(lc, lc.luminance, &clipped);
    EXPECT_LT(testing::max_abs_diff(out, img), 1e-6);
    EXPECT_EQ(std::count(clipped.begin(), clipped.end(), 1), 0);
}

TEST(Recombine, ZeroLuminanceIsBlack) {
    const auto img = random_image(16, 16, 3, 3);
    const auto lc = split_luma_chroma(img);
    const auto out = recombine(lc, PlanarImage(16, 16, 1, 0.0));
    for (double v : out.samples())
        EXPECT_EQ(v, 0.0);
}

TEST(Recombine, DoubledGrayRampKeepsChromaticity) {
    PlanarImage ramp(64, 1, 3);
    for (int x = 0; x < 64; ++x)
        for (int c = 0; c < 3; ++c)
            ramp.at(c, x, 0) = 0.005 + 0.4 * x / 63.0 * (1.0 + 0.1 * c);
    const auto lc = split_luma_chroma(ramp);
    PlanarImage doubled = lc.luminance;
    for (double& y : doubled.samples())
        y *= 2.0;
    std::vector<std::uint8_t> clipped;
    const auto out = recombine(lc, doubled, &clipped);
    for (int x = 0; x < 64; ++x) {
        ASSERT_EQ(clipped[x], 0) << x;
        const Vec3 in_xy = chromaticity_of({ramp.at(0, x, 0), ramp.at(1, x, 0), ramp.at(2, x, 0)});
        const Vec3 out_xy = chromaticity_of({out.at(0, x, 0), out.at(1, x, 0), out.at(2, x, 0)});
        EXPECT_NEAR(out_xy[0], in_xy[0], 1e-6);
        EXPECT_NEAR(out_xy[1], in_xy[1], 1e-6);
        EXPECT_NEAR(out_xy[2], 2.0 * in_xy[2], 1e-9);
    }
}

TEST(Recombine, OutputAlwaysFiniteAndInRange) {
    const auto img = random_image(40, 40, 3, 5);
    const auto lc = split_luma_chroma(img);
    auto wild = testing::random_image(40, 40, 1, 9, -3.0, 6.0);
    wild.at(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
    wild.at(0, 1, 0) = std::numeric_limits<double>::infinity();
    std::vector<std::uint8_t> clipped;
    const auto out = recombine(lc, wild, &clipped);
    EXPECT_TRUE(out.all_finite());
    for (double v : out.samples()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(clipped[0], 1);
}

TEST(Recombine, DimensionMismatchIsContractError) {
    const auto lc = split_luma_chroma(random_image(8, 8, 3, 1));
    EXPECT_THROW(recombine(lc, PlanarImage(8, 9, 1)), ContractError);
}

}  // namespace
}  // namespace specsharp
