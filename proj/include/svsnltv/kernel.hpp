#pragma once

#include <vector>

#include "svsnltv/image.hpp"

namespace svsnltv {

/// Centered convolution kernel with odd dimensions whose taps sum to 1.
class BlurKernel {
public:
  /// Taps are row-major; throws if a dimension is even or the sum is not 1
  /// within 1e-12.
  BlurKernel(int rows, int cols, std::vector<double> taps);

  static BlurKernel identity();

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int radius_y() const { return rows_ / 2; }
  int radius_x() const { return cols_ / 2; }

  /// Tap at offset (dy, dx) from the center.
  double at(int dy, int dx) const {
    return taps_[static_cast<std::size_t>((dy + radius_y()) * cols_ + dx + radius_x())];
  }
  const std::vector<double>& taps() const { return taps_; }

  bool is_identity() const { return rows_ == 1 && cols_ == 1; }

private:
  int rows_;
  int cols_;
  std::vector<double> taps_;
};

/// taps ∝ exp(-(dx²+dy²)/(2σ²)) on a (2r+1)² support; radius < 0 selects ceil(3σ).
BlurKernel gaussian_kernel(double sigma, int radius = -1);

/// Equal-weight Bresenham segment of `length` pixels through the center,
/// at `angle_deg` counter-clockwise from the +x axis (image rows grow downward).
BlurKernel motion_kernel(int length, double angle_deg);

enum class ConvolutionMethod { spatial, frequency };

/// Circular convolution (K*u)(y,x) = Σ k(dy,dx) u(y-dy, x-dx), per channel.
ColorImage convolve_periodic(const ColorImage& img, const BlurKernel& k,
                             ConvolutionMethod method = ConvolutionMethod::frequency);

/// Same on a single plane.
Raster convolve_periodic(const Raster& plane, const BlurKernel& k,
                         ConvolutionMethod method = ConvolutionMethod::frequency);

/// Circular correlation, the adjoint K^T of convolve_periodic.
Raster correlate_periodic(const Raster& plane, const BlurKernel& k);

void require_kernel_fits(const BlurKernel& k, int height, int width);

}  // namespace svsnltv
