#include "svsnltv/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace svsnltv {
namespace {

// FFTW's planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fourier2d::Fourier2d(int height, int width) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw DimensionError("Fourier2d: dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  complex_ = fftw_alloc_complex(spectrum_size());
  auto* cplx = static_cast<fftw_complex*>(complex_);
  plan_forward_ = fftw_plan_dft_r2c_2d(height, width, real_, cplx, FFTW_ESTIMATE);
  plan_inverse_ = fftw_plan_dft_c2r_2d(height, width, cplx, real_, FFTW_ESTIMATE);
  if (!plan_forward_ || !plan_inverse_) throw std::runtime_error("FFTW planning failed");
}

Fourier2d::~Fourier2d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
  fftw_free(real_);
  fftw_free(complex_);
}

Fourier2d::Spectrum Fourier2d::forward(std::span<const double> plane) {
  const std::size_t n = static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  if (plane.size() != n) throw DimensionError("Fourier2d::forward: plane size mismatch");
  std::copy(plane.begin(), plane.end(), real_);
  fftw_execute(static_cast<fftw_plan>(plan_forward_));
  const auto* cplx = static_cast<const fftw_complex*>(complex_);
  Spectrum out(spectrum_size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {cplx[k][0], cplx[k][1]};
  return out;
}

std::vector<double> Fourier2d::inverse(const Spectrum& spectrum) {
  if (spectrum.size() != spectrum_size()) throw DimensionError("Fourier2d::inverse: spectrum size mismatch");
  auto* cplx = static_cast<fftw_complex*>(complex_);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    cplx[k][0] = spectrum[k].real();
    cplx[k][1] = spectrum[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(plan_inverse_));
  const std::size_t n = static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = real_[i] * scale;
  return out;
}

Fourier2d::Spectrum transfer_function(const BlurKernel& k, int height, int width) {
  const int sw = width / 2 + 1;
  Fourier2d::Spectrum out(static_cast<std::size_t>(height) * static_cast<std::size_t>(sw));
  const double two_pi = 2.0 * std::numbers::pi;
  for (int ky = 0; ky < height; ++ky) {
    for (int kx = 0; kx < sw; ++kx) {
      std::complex<double> acc = 0.0;
      for (int dy = -k.radius_y(); dy <= k.radius_y(); ++dy) {
        for (int dx = -k.radius_x(); dx <= k.radius_x(); ++dx) {
          const double tap = k.at(dy, dx);
          if (tap == 0.0) continue;
          // Reduce the phase with integer arithmetic to keep it exact.
          const long py = ((static_cast<long>(ky) * dy) % height + height) % height;
          const long px = ((static_cast<long>(kx) * dx) % width + width) % width;
          const double phase = -two_pi * (static_cast<double>(py) / height + static_cast<double>(px) / width);
          acc += tap * std::complex<double>(std::cos(phase), std::sin(phase));
        }
      }
      out[static_cast<std::size_t>(ky * sw + kx)] = acc;
    }
  }
  return out;
}

}  // namespace svsnltv
