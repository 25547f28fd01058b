#include "image.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace specsharp {

namespace {

void check_shape(int width, int height, int channels) {
    require(width > 0 && height > 0,
            "image dimensions must be positive, got " + std::to_string(width) + "x" +
                std::to_string(height));
    require(channels >= 1 && channels <= 3,
            "image channel count must be 1..3, got " + std::to_string(channels));
}

}  // namespace

PlanarImage::PlanarImage(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    check_shape(width, height, channels);
    data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

PlanarImage::PlanarImage(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_shape(width, height, channels);
    require(data_.size() == pixel_count() * static_cast<std::size_t>(channels),
            "sample count does not match width*height*channels");
}

std::span<double> PlanarImage::plane(int c) {
    return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * pixel_count(),
                                            pixel_count());
}

std::span<const double> PlanarImage::plane(int c) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * pixel_count(),
                                                  pixel_count());
}

bool PlanarImage::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

PlanarImage PlanarImage::channel(int c) const {
    require(c >= 0 && c < channels_, "channel index out of range");
    auto src = plane(c);
    return PlanarImage(width_, height_, 1, std::vector<double>(src.begin(), src.end()));
}

}  // namespace specsharp
