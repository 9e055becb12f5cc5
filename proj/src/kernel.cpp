#include "svsnltv/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "svsnltv/fourier.hpp"

namespace svsnltv {

BlurKernel::BlurKernel(int rows, int cols, std::vector<double> taps)
    : rows_(rows), cols_(cols), taps_(std::move(taps)) {
  if (rows < 1 || cols < 1 || rows % 2 == 0 || cols % 2 == 0) {
    throw std::invalid_argument("kernel dimensions must be odd and positive");
  }
  if (taps_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("kernel tap count does not match its dimensions");
  }
  const double sum = std::accumulate(taps_.begin(), taps_.end(), 0.0);
  if (!(std::abs(sum - 1.0) <= 1e-12)) {
    throw std::invalid_argument("kernel taps must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

BlurKernel BlurKernel::identity() { return BlurKernel(1, 1, {1.0}); }

BlurKernel gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
  if (radius < 0) radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int side = 2 * radius + 1;
  std::vector<double> taps(static_cast<std::size_t>(side * side));
  double sum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      taps[static_cast<std::size_t>((dy + radius) * side + dx + radius)] = v;
      sum += v;
    }
  }
  for (double& t : taps) t /= sum;
  return BlurKernel(side, side, std::move(taps));
}

BlurKernel motion_kernel(int length, double angle_deg) {
  if (length < 1) throw std::invalid_argument("motion_kernel: length must be >= 1");
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double cx = std::cos(theta);
  const double cy = -std::sin(theta);  // rows grow downward
  const int back = (length - 1) / 2;
  const int ahead = length - 1 - back;
  const int x0 = static_cast<int>(std::lround(-back * cx));
  const int y0 = static_cast<int>(std::lround(-back * cy));
  const int x1 = static_cast<int>(std::lround(ahead * cx));
  const int y1 = static_cast<int>(std::lround(ahead * cy));

  std::vector<std::pair<int, int>> pixels;
  int x = x0, y = y0;
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  const int ex = std::abs(x1 - x0);
  const int ey = -std::abs(y1 - y0);
  int err = ex + ey;
  while (true) {
    pixels.emplace_back(y, x);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= ey) {
      err += ey;
      x += sx;
    }
    if (e2 <= ex) {
      err += ex;
      y += sy;
    }
  }

  int r = 0;
  for (const auto& [py, px] : pixels) r = std::max({r, std::abs(py), std::abs(px)});
  const int side = 2 * r + 1;
  std::vector<double> taps(static_cast<std::size_t>(side * side), 0.0);
  const double w = 1.0 / static_cast<double>(pixels.size());
  for (const auto& [py, px] : pixels) taps[static_cast<std::size_t>((py + r) * side + px + r)] = w;
  return BlurKernel(side, side, std::move(taps));
}

void require_kernel_fits(const BlurKernel& k, int height, int width) {
  if (k.rows() > height || k.cols() > width) {
    throw DimensionError("kernel (" + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                         ") is larger than the image (" + std::to_string(height) + "x" +
                         std::to_string(width) + ")");
  }
}

namespace {

int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

// sign = +1 convolves, -1 correlates.
Raster apply_spatial(const Raster& in, const BlurKernel& k, int sign) {
  const int h = in.height(), w = in.width();
  Raster out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -k.radius_y(); dy <= k.radius_y(); ++dy) {
        for (int dx = -k.radius_x(); dx <= k.radius_x(); ++dx) {
          const double tap = k.at(dy, dx);
          if (tap == 0.0) continue;
          acc += tap * in(wrap(y - sign * dy, h), wrap(x - sign * dx, w));
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

Raster convolve_periodic(const Raster& plane, const BlurKernel& k, ConvolutionMethod method) {
  require_kernel_fits(k, plane.height(), plane.width());
  if (method == ConvolutionMethod::spatial) return apply_spatial(plane, k, +1);

  Fourier2d fft(plane.height(), plane.width());
  const auto kh = transfer_function(k, plane.height(), plane.width());
  auto spec = fft.forward(plane.values());
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kh[i];
  return Raster(plane.height(), plane.width(), fft.inverse(spec));
}

Raster correlate_periodic(const Raster& plane, const BlurKernel& k) {
  require_kernel_fits(k, plane.height(), plane.width());
  return apply_spatial(plane, k, -1);
}

ColorImage convolve_periodic(const ColorImage& img, const BlurKernel& k, ConvolutionMethod method) {
  require_kernel_fits(k, img.height(), img.width());
  if (method == ConvolutionMethod::spatial) {
    return ColorImage({apply_spatial(img.plane(0), k, +1), apply_spatial(img.plane(1), k, +1),
                       apply_spatial(img.plane(2), k, +1)});
  }
  Fourier2d fft(img.height(), img.width());
  const auto kh = transfer_function(k, img.height(), img.width());
  ColorImage out(img.height(), img.width());
  for (int c = 0; c < 3; ++c) {
    auto spec = fft.forward(img.plane(c).values());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kh[i];
    out.plane(c) = Raster(img.height(), img.width(), fft.inverse(spec));
  }
  return out;
}

}  // namespace svsnltv
