#include "svsnltv/image.hpp"

#include <algorithm>
#include <cmath>

namespace svsnltv {

Raster::Raster(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw DimensionError("raster dimensions must be nonnegative");
  values_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

Raster::Raster(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height < 0 || width < 0 ||
      values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw DimensionError("raster value count does not match its dimensions");
  }
}

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const double kInvSqrt6 = 1.0 / std::sqrt(6.0);
const double kInvSqrt3 = 1.0 / std::sqrt(3.0);

}  // namespace

const std::array<std::array<double, 3>, 3>& TransformMatrix::rows() {
  static const std::array<std::array<double, 3>, 3> p{{
      {kInvSqrt2, -kInvSqrt2, 0.0},
      {kInvSqrt6, kInvSqrt6, -2.0 * kInvSqrt6},
      {kInvSqrt3, kInvSqrt3, kInvSqrt3},
  }};
  return p;
}

std::array<double, 3> TransformMatrix::forward(double r, double g, double b) {
  return {(r - g) * kInvSqrt2, (r + g - 2.0 * b) * kInvSqrt6, (r + g + b) * kInvSqrt3};
}

std::array<double, 3> TransformMatrix::inverse(double q1, double q2, double q3) {
  return {q1 * kInvSqrt2 + q2 * kInvSqrt6 + q3 * kInvSqrt3,
          -q1 * kInvSqrt2 + q2 * kInvSqrt6 + q3 * kInvSqrt3,
          -2.0 * q2 * kInvSqrt6 + q3 * kInvSqrt3};
}

SVImage rgb_to_sv(const ColorImage& img) {
  SVImage sv(img.height(), img.width());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto q = TransformMatrix::forward(img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]);
    for (int c = 0; c < 3; ++c) sv.plane(c)[i] = q[static_cast<std::size_t>(c)];
  }
  return sv;
}

ColorImage sv_to_rgb(const SVImage& sv) {
  ColorImage img(sv.height(), sv.width());
  for (std::size_t i = 0; i < sv.pixel_count(); ++i) {
    const auto u = TransformMatrix::inverse(sv.plane(0)[i], sv.plane(1)[i], sv.plane(2)[i]);
    for (int c = 0; c < 3; ++c) img.plane(c)[i] = u[static_cast<std::size_t>(c)];
  }
  return img;
}

ColorImage clamp(const ColorImage& img, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lower bound exceeds upper bound");
  ColorImage out = img;
  for (int c = 0; c < 3; ++c) {
    for (double& v : out.plane(c).values()) v = std::clamp(v, lo, hi);
  }
  return out;
}

bool is_finite(const ColorImage& img) {
  for (int c = 0; c < 3; ++c) {
    for (double v : img.plane(c).values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void require_same_shape(const ColorImage& a, const ColorImage& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw DimensionError(what + ": image dimensions differ (" + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                         std::to_string(b.width()) + ")");
  }
}

double l2_norm(const ColorImage& img) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (double v : img.plane(c).values()) s += v * v;
  }
  return std::sqrt(s);
}

}  // namespace svsnltv
