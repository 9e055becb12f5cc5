#pragma once

#include <array>
#include <cstddef>

#include "svsnltv/image.hpp"

namespace svsnltv {

/// 10·log10(1/MSE) over all samples with peak 1. Identical images give +inf.
double psnr(const ColorImage& a, const ColorImage& b);

/// Mean SSIM (11x11 Gaussian window, σ = 1.5, K1 = 0.01, K2 = 0.03, dynamic
/// range 1) over all fully contained windows, averaged over the three
/// channels.
double ssim(const ColorImage& a, const ColorImage& b);

/// SSIM of two single planes.
double ssim(const Raster& a, const Raster& b);

/// Quaternion SSIM. Pixels are pure quaternions (r i + g j + b k)/√3 so that
/// a gray pixel (c,c,c) has modulus c. The luminance term uses the moduli of
/// the local quaternion means; the structure term uses the modulus of the
/// quaternion cross-covariance E[(a−μa)(b−μb)*], signed by its real part.
double qssim(const ColorImage& a, const ColorImage& b);

struct ScielabParams {
  double samples_per_degree = 23.0;
  double threshold = 15.0;
};

/// Per-pixel S-CIELAB ΔE*ab after opponent-space spatial filtering.
Raster scielab_delta_e(const ColorImage& a, const ColorImage& b, double samples_per_degree = 23.0);

/// Number of pixels whose S-CIELAB ΔE exceeds the threshold.
std::size_t scielab_count(const ColorImage& a, const ColorImage& b, const ScielabParams& params = {});

/// CIELAB (D65) of one sRGB pixel with components in [0,1].
std::array<double, 3> srgb_to_lab(double r, double g, double b);

struct MetricsReport {
  double psnr;
  double ssim;
  double qssim;
  std::size_t scielab_count;
};

MetricsReport evaluate(const ColorImage& restored, const ColorImage& reference, const ScielabParams& params = {});

}  // namespace svsnltv
