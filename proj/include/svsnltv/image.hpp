#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svsnltv {

/// Raised when two rasters, images or graphs disagree on their dimensions.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A single real-valued plane stored row-major.
class Raster {
public:
  Raster() = default;
  Raster(int height, int width, double fill = 0.0);
  Raster(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int y, int x) { return values_[index(y, x)]; }
  double operator()(int y, int x) const { return values_[index(y, x)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

namespace detail {

// Three equally sized planes. The tag keeps RGB and SV coefficients apart in
// the type system even though the storage is identical.
template <typename Tag>
class ThreePlaneImage {
public:
  ThreePlaneImage() = default;

  ThreePlaneImage(int height, int width, double fill = 0.0)
      : planes_{Raster(height, width, fill), Raster(height, width, fill),
                Raster(height, width, fill)} {
    if (height < 1 || width < 1) throw DimensionError("image must be at least 1x1");
  }

  explicit ThreePlaneImage(std::array<Raster, 3> planes) : planes_(std::move(planes)) {
    for (const auto& p : planes_) {
      if (p.height() != planes_[0].height() || p.width() != planes_[0].width()) {
        throw DimensionError("image planes must share identical dimensions");
      }
    }
    if (planes_[0].height() < 1 || planes_[0].width() < 1) {
      throw DimensionError("image must be at least 1x1");
    }
  }

  int height() const { return planes_[0].height(); }
  int width() const { return planes_[0].width(); }
  std::size_t pixel_count() const { return planes_[0].size(); }

  Raster& plane(int c) { return planes_[static_cast<std::size_t>(c)]; }
  const Raster& plane(int c) const { return planes_[static_cast<std::size_t>(c)]; }

  bool same_shape(const ThreePlaneImage& other) const {
    return height() == other.height() && width() == other.width();
  }

private:
  std::array<Raster, 3> planes_;
};

struct RgbTag {};
struct SvTag {};

}  // namespace detail

/// RGB image with intensities nominally in [0,1].
using ColorImage = detail::ThreePlaneImage<detail::RgbTag>;

/// Coefficients q = P * (r,g,b): plane 0 and 1 hold the saturation pair,
/// plane 2 the value channel.
using SVImage = detail::ThreePlaneImage<detail::SvTag>;

/// The orthogonal matrix P that diagonalizes the chroma operator
/// C = P^T diag(3,3,0) P.
struct TransformMatrix {
  static const std::array<std::array<double, 3>, 3>& rows();

  /// Applies P to one pixel.
  static std::array<double, 3> forward(double r, double g, double b);
  /// Applies P^T to one pixel.
  static std::array<double, 3> inverse(double q1, double q2, double q3);
};

SVImage rgb_to_sv(const ColorImage& img);
ColorImage sv_to_rgb(const SVImage& sv);

/// Clamps every sample to [lo, hi]. Throws std::invalid_argument if lo > hi.
ColorImage clamp(const ColorImage& img, double lo, double hi);

/// True when every stored sample is finite.
bool is_finite(const ColorImage& img);

void require_same_shape(const ColorImage& a, const ColorImage& b, const std::string& what);

/// Euclidean norm over all samples of all planes.
double l2_norm(const ColorImage& img);

}  // namespace svsnltv
