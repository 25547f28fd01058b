#pragma once

#include "color.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace specsharp {

/// Accepts 8-bit grayscale, RGB and palette PNGs; alpha and 16-bit data are
/// rejected with DecodeError.
EncodedImage decode_png(std::span<const std::uint8_t> bytes);
EncodedImage read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const EncodedImage& image);
void write_png(const std::filesystem::path& path, const EncodedImage& image);

}  // namespace specsharp
