#pragma once

#include <complex>
#include <span>
#include <vector>

#include "svsnltv/image.hpp"
#include "svsnltv/kernel.hpp"

namespace svsnltv {

/// Real 2-D DFT of an H x W plane backed by FFTW. Only the non-redundant
/// half spectrum (H x (W/2+1)) is stored. Plans use FFTW_ESTIMATE so results
/// are reproducible from run to run.
class Fourier2d {
public:
  using Spectrum = std::vector<std::complex<double>>;

  Fourier2d(int height, int width);
  ~Fourier2d();
  Fourier2d(const Fourier2d&) = delete;
  Fourier2d& operator=(const Fourier2d&) = delete;

  int height() const { return height_; }
  int width() const { return width_; }
  int spectrum_width() const { return width_ / 2 + 1; }
  std::size_t spectrum_size() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(spectrum_width());
  }

  Spectrum forward(std::span<const double> plane);
  /// Inverse transform including the 1/(H W) normalization.
  std::vector<double> inverse(const Spectrum& spectrum);

private:
  int height_;
  int width_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
};

/// Transfer function of the kernel on an H x W periodic grid (half spectrum,
/// same layout as Fourier2d), evaluated by direct summation over the taps.
Fourier2d::Spectrum transfer_function(const BlurKernel& k, int height, int width);

}  // namespace svsnltv
