#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace specsharp {

/// Planar floating-point raster. Channel c occupies samples
/// [c*width*height, (c+1)*width*height), each plane row-major.
class PlanarImage {
public:
    PlanarImage() = default;
    PlanarImage(int width, int height, int channels, double fill = 0.0);
    PlanarImage(int width, int height, int channels, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> plane(int c);
    std::span<const double> plane(int c) const;

    double& at(int c, int x, int y) { return data_[index(c, x, y)]; }
    double at(int c, int x, int y) const { return data_[index(c, x, y)]; }

    std::span<double> samples() noexcept { return data_; }
    std::span<const double> samples() const noexcept { return data_; }

    bool same_shape(const PlanarImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool all_finite() const noexcept;

    /// Copy of one channel as a single-channel image.
    PlanarImage channel(int c) const;

    friend bool operator==(const PlanarImage&, const PlanarImage&) = default;

private:
    std::size_t index(int c, int x, int y) const noexcept {
        return static_cast<std::size_t>(c) * pixel_count() +
               static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

}  // namespace specsharp
