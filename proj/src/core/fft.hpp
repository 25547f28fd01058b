#pragma once

#include "image.hpp"

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace specsharp {

/// Full complex 2D DFT of a single-channel image, row-major, unnormalized
/// forward transform. Storage is FFTW-aligned so plans can be reused.
class FourierImage {
public:
    FourierImage(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    std::span<std::complex<double>> coefficients() noexcept { return {data_.get(), size()}; }
    std::span<const std::complex<double>> coefficients() const noexcept {
        return {data_.get(), size()};
    }

    /// Normalized radial frequency of coefficient (u, v): 1.0 on each axis at
    /// the Nyquist index, up to sqrt(2) in the corners.
    double normalized_radius(int u, int v) const noexcept;

private:
    struct Free {
        void operator()(std::complex<double>* p) const noexcept;
    };

    int width_;
    int height_;
    std::unique_ptr<std::complex<double>[], Free> data_;
};

FourierImage forward_dft(const PlanarImage& image, bool subtract_mean = false);

/// Inverse transform (scaled by 1/N) keeping the real part. Writes the largest
/// absolute imaginary residue to `max_imaginary` when given.
PlanarImage inverse_dft_real(FourierImage spectrum, double* max_imaginary = nullptr);

}  // namespace specsharp
