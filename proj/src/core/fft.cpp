#include "fft.hpp"

#include "errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <new>
#include <numeric>
#include <tuple>

namespace specsharp {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans live for the life of the process.
std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plan_cache;

fftw_plan plan_for(int width, int height, int sign) {
    std::lock_guard lock(plan_mutex);
    auto key = std::make_tuple(width, height, sign);
    if (auto it = plan_cache.find(key); it != plan_cache.end())
        return it->second;
    // FFTW_ESTIMATE does not touch the scratch array.
    auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(width) * height);
    if (!scratch)
        throw std::bad_alloc();
    fftw_plan plan = fftw_plan_dft_2d(height, width, scratch, scratch, sign, FFTW_ESTIMATE);
    fftw_free(scratch);
    if (!plan)
        throw ContractError("FFTW could not plan a " + std::to_string(width) + "x" +
                            std::to_string(height) + " transform");
    plan_cache.emplace(key, plan);
    return plan;
}

void execute(FourierImage& image, int sign) {
    auto* data = reinterpret_cast<fftw_complex*>(image.coefficients().data());
    fftw_execute_dft(plan_for(image.width(), image.height(), sign), data, data);
}

double signed_frequency(int index, int n) { return index <= n / 2 ? index : index - n; }

}  // namespace

void FourierImage::Free::operator()(std::complex<double>* p) const noexcept {
    fftw_free(p);
}

FourierImage::FourierImage(int width, int height) : width_(width), height_(height) {
    require(width > 0 && height > 0, "transform dimensions must be positive");
    auto* raw = fftw_alloc_complex(size());
    if (!raw)
        throw std::bad_alloc();
    data_.reset(reinterpret_cast<std::complex<double>*>(raw));
}

double FourierImage::normalized_radius(int u, int v) const noexcept {
    const double fu = signed_frequency(u, width_) / (width_ / 2.0);
    const double fv = signed_frequency(v, height_) / (height_ / 2.0);
    return std::sqrt(fu * fu + fv * fv);
}

FourierImage forward_dft(const PlanarImage& image, bool subtract_mean) {
    require(image.channels() == 1, "forward_dft expects a single-channel image");
    FourierImage out(image.width(), image.height());
    auto src = image.plane(0);
    const double mean =
        subtract_mean ? std::accumulate(src.begin(), src.end(), 0.0) / src.size() : 0.0;
    auto coeffs = out.coefficients();
    for (std::size_t p = 0; p < src.size(); ++p)
        coeffs[p] = {src[p] - mean, 0.0};
    execute(out, FFTW_FORWARD);
    return out;
}

PlanarImage inverse_dft_real(FourierImage spectrum, double* max_imaginary) {
    execute(spectrum, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(spectrum.size());
    PlanarImage out(spectrum.width(), spectrum.height(), 1);
    auto dst = out.plane(0);
    auto coeffs = spectrum.coefficients();
    double worst = 0.0;
    for (std::size_t p = 0; p < dst.size(); ++p) {
        dst[p] = coeffs[p].real() * scale;
        worst = std::max(worst, std::abs(coeffs[p].imag() * scale));
    }
    if (max_imaginary)
        *max_imaginary = worst;
    return out;
}

}  // namespace specsharp
