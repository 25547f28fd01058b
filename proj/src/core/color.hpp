#pragma once

#include "image.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace specsharp {

/// Interleaved 8-bit raster as stored in PNG files (1 or 3 channels).
struct EncodedImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;
};

using Vec3 = std::array<double, 3>;

/// CIE chromaticity of the D65 white point, used for zero-energy pixels.
inline constexpr double kD65x = 0.3127;
inline constexpr double kD65y = 0.3290;

double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);
std::uint8_t encode_srgb_code(double linear);

Vec3 linear_rgb_to_xyz(const Vec3& rgb);
Vec3 xyz_to_linear_rgb(const Vec3& xyz);

PlanarImage decode_to_linear(const EncodedImage& encoded);
EncodedImage encode_to_srgb(const PlanarImage& linear);

struct LumaChroma {
    PlanarImage luminance;     // CIE Y, one channel
    PlanarImage chromaticity;  // CIE x and y, two channels
};

LumaChroma split_luma_chroma(const PlanarImage& rgb);

/// Rebuilds linear sRGB from the chromaticity of `chroma_source` and a new
/// luminance. Output channels are clamped to [0,1]; if `clipped` is given it
/// receives one flag per pixel marking clamped pixels (negative luminance
/// included).
PlanarImage recombine(const LumaChroma& chroma_source, const PlanarImage& new_luminance,
                      std::vector<std::uint8_t>* clipped = nullptr);

}  // namespace specsharp
