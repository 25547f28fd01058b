#include "color.hpp"

#include "errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace specsharp {

namespace {

using Mat3 = std::array<Vec3, 3>;

// IEC 61966-2-1 linear sRGB -> XYZ (D65).
constexpr Mat3 kRgbToXyz = {{
    {0.4124, 0.3576, 0.1805},
    {0.2126, 0.7152, 0.0722},
    {0.0193, 0.1192, 0.9505},
}};

constexpr Mat3 invert(const Mat3& m) {
    const double a = m[0][0], b = m[0][1], c = m[0][2];
    const double d = m[1][0], e = m[1][1], f = m[1][2];
    const double g = m[2][0], h = m[2][1], i = m[2][2];
    const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    return {{
        {(e * i - f * h) / det, (c * h - b * i) / det, (b * f - c * e) / det},
        {(f * g - d * i) / det, (a * i - c * g) / det, (c * d - a * f) / det},
        {(d * h - e * g) / det, (b * g - a * h) / det, (a * e - b * d) / det},
    }};
}

constexpr Mat3 kXyzToRgb = invert(kRgbToXyz);

constexpr double kGamutSlack = 1e-9;

constexpr Vec3 mul(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

}  // namespace

double srgb_to_linear(double encoded) {
    if (encoded <= 0.04045)
        return encoded / 12.92;
    return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) {
    if (linear <= 0.0031308)
        return linear * 12.92;
    return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

std::uint8_t encode_srgb_code(double linear) {
    const double v = std::clamp(linear, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(linear_to_srgb(v) * 255.0));
}

Vec3 linear_rgb_to_xyz(const Vec3& rgb) { return mul(kRgbToXyz, rgb); }

Vec3 xyz_to_linear_rgb(const Vec3& xyz) { return mul(kXyzToRgb, xyz); }

PlanarImage decode_to_linear(const EncodedImage& encoded) {
    if (encoded.channels != 1 && encoded.channels != 3)
        throw DecodeError("unsupported channel count " + std::to_string(encoded.channels) +
                          " (expected 1 or 3)");
    const std::size_t n =
        static_cast<std::size_t>(encoded.width) * static_cast<std::size_t>(encoded.height);
    if (encoded.width <= 0 || encoded.height <= 0 ||
        encoded.pixels.size() != n * static_cast<std::size_t>(encoded.channels))
        throw DecodeError("pixel buffer does not match image dimensions");

    std::array<double, 256> lut{};
    for (int v = 0; v < 256; ++v)
        lut[v] = srgb_to_linear(v / 255.0);

    PlanarImage out(encoded.width, encoded.height, encoded.channels);
    for (int c = 0; c < encoded.channels; ++c) {
        auto plane = out.plane(c);
        for (std::size_t p = 0; p < n; ++p)
            plane[p] = lut[encoded.pixels[p * encoded.channels + c]];
    }
    return out;
}

namespace {

// Linear values at which the 8-bit code steps up, and the code at the start
// of each cell of a uniform grid over [0, 1]. Cells are narrower than the
// closest pair of steps, so each holds at most one step.
struct CodeTable {
    static constexpr int kCells = 1 << 16;
    std::array<double, 256> steps{};
    std::vector<std::uint8_t> cell_code;

    CodeTable() : cell_code(kCells + 1) {
        for (int c = 0; c < 255; ++c)
            steps[static_cast<std::size_t>(c)] = srgb_to_linear((c + 0.5) / 255.0);
        steps[255] = 2.0;
        std::size_t code = 0;
        for (int i = 0; i <= kCells; ++i) {
            const double v = static_cast<double>(i) / kCells;
            while (v >= steps[code])
                ++code;
            cell_code[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(code);
        }
    }

    std::uint8_t code(double linear) const {
        if (!(linear > 0.0))
            return 0;
        if (linear >= 1.0)
            return 255;
        std::size_t c = cell_code[static_cast<std::size_t>(linear * kCells)];
        c += linear >= steps[c] ? 1 : 0;
        constexpr double kGuard = 1e-9;
        if ((c > 0 && linear - steps[c - 1] < kGuard) || steps[c] - linear < kGuard)
            return encode_srgb_code(linear);
        return static_cast<std::uint8_t>(c);
    }
};

const CodeTable& code_table() {
    static const CodeTable table;
    return table;
}

}  // namespace

EncodedImage encode_to_srgb(const PlanarImage& linear) {
    EncodedImage out;
    out.width = linear.width();
    out.height = linear.height();
    out.channels = linear.channels();
    require(out.channels == 1 || out.channels == 3, "only 1- or 3-channel images can be encoded");
    const std::size_t n = linear.pixel_count();
    out.pixels.resize(n * out.channels);
    const auto& table = code_table();
    for (int c = 0; c < out.channels; ++c) {
        auto plane = linear.plane(c);
        for (std::size_t p = 0; p < n; ++p)
            out.pixels[p * out.channels + c] = table.code(plane[p]);
    }
    return out;
}

LumaChroma split_luma_chroma(const PlanarImage& rgb) {
    require(rgb.channels() == 3, "split_luma_chroma expects a 3-channel linear RGB image");
    const std::size_t n = rgb.pixel_count();
    LumaChroma out{PlanarImage(rgb.width(), rgb.height(), 1),
                   PlanarImage(rgb.width(), rgb.height(), 2)};
    auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
    auto lum = out.luminance.plane(0);
    auto cx = out.chromaticity.plane(0), cy = out.chromaticity.plane(1);
    for (std::size_t p = 0; p < n; ++p) {
        const Vec3 xyz = linear_rgb_to_xyz({r[p], g[p], b[p]});
        const double sum = xyz[0] + xyz[1] + xyz[2];
        lum[p] = std::max(xyz[1], 0.0);
        if (sum > 0.0) {
            cx[p] = xyz[0] / sum;
            cy[p] = xyz[1] / sum;
        } else {
            cx[p] = kD65x;
            cy[p] = kD65y;
        }
    }
    return out;
}

PlanarImage recombine(const LumaChroma& chroma_source, const PlanarImage& new_luminance,
                      std::vector<std::uint8_t>* clipped) {
    require(new_luminance.channels() == 1, "recombine expects a single-channel luminance");
    require(chroma_source.chromaticity.same_shape(new_luminance),
            "recombine: luminance is " + std::to_string(new_luminance.width()) + "x" +
                std::to_string(new_luminance.height()) + " but chromaticity is " +
                std::to_string(chroma_source.chromaticity.width()) + "x" +
                std::to_string(chroma_source.chromaticity.height()));

    const std::size_t n = new_luminance.pixel_count();
    PlanarImage out(new_luminance.width(), new_luminance.height(), 3);
    if (clipped)
        clipped->assign(n, 0);
    auto lum = new_luminance.plane(0);
    auto cx = chroma_source.chromaticity.plane(0), cy = chroma_source.chromaticity.plane(1);
    auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
    for (std::size_t p = 0; p < n; ++p) {
        bool clamped = !(lum[p] >= 0.0);
        const double y_lum = clamped ? 0.0 : lum[p];
        const double x = cx[p], y = cy[p];
        Vec3 rgb{0.0, 0.0, 0.0};
        if (y > 0.0 && y_lum > 0.0)
            rgb = xyz_to_linear_rgb({x * y_lum / y, y_lum, (1.0 - x - y) * y_lum / y});
        for (double& v : rgb) {
            // Round-off at the gamut boundary is not reported as clipping.
            if (!(v >= -kGamutSlack && v <= 1.0 + kGamutSlack))
                clamped = true;
            v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        }
        r[p] = rgb[0];
        g[p] = rgb[1];
        b[p] = rgb[2];
        if (clipped && clamped)
            (*clipped)[p] = 1;
    }
    return out;
}

}  // namespace specsharp
