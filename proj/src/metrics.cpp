#include "svsnltv/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace svsnltv {

double psnr(const ColorImage& a, const ColorImage& b) {
  require_same_shape(a, b, "psnr");
  double sse = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      const double d = a.plane(c)[i] - b.plane(c)[i];
      sse += d * d;
    }
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / (3.0 * static_cast<double>(a.pixel_count()));
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& ssim_taps() {
  static const std::vector<double> taps = [] {
    std::vector<double> t(kWindow);
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double x = i - kWindow / 2;
      t[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * kWindowSigma * kWindowSigma));
      sum += t[static_cast<std::size_t>(i)];
    }
    for (double& v : t) v /= sum;
    return t;
  }();
  return taps;
}

// Separable Gaussian filtering keeping only fully contained windows.
Raster filter_valid(const Raster& in) {
  const auto& t = ssim_taps();
  const int h = in.height(), w = in.width();
  const int oh = h - kWindow + 1, ow = w - kWindow + 1;
  Raster rows(h, ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += t[static_cast<std::size_t>(k)] * in(y, x + k);
      rows(y, x) = acc;
    }
  }
  Raster out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += t[static_cast<std::size_t>(k)] * rows(y + k, x);
      out(y, x) = acc;
    }
  }
  return out;
}

Raster product(const Raster& a, const Raster& b) {
  Raster out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void require_window_fits(int height, int width) {
  if (height < kWindow || width < kWindow) {
    throw DimensionError("SSIM/QSSIM need images of at least 11x11 pixels");
  }
}

}  // namespace

double ssim(const Raster& a, const Raster& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw DimensionError("ssim: plane dimensions differ");
  require_window_fits(a.height(), a.width());
  const Raster mu_a = filter_valid(a);
  const Raster mu_b = filter_valid(b);
  const Raster e_aa = filter_valid(product(a, a));
  const Raster e_bb = filter_valid(product(b, b));
  const Raster e_ab = filter_valid(product(a, b));
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    sum += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
  }
  return sum / static_cast<double>(mu_a.size());
}

double ssim(const ColorImage& a, const ColorImage& b) {
  require_same_shape(a, b, "ssim");
  return (ssim(a.plane(0), b.plane(0)) + ssim(a.plane(1), b.plane(1)) + ssim(a.plane(2), b.plane(2))) / 3.0;
}

double qssim(const ColorImage& a, const ColorImage& b) {
  require_same_shape(a, b, "qssim");
  require_window_fits(a.height(), a.width());
  const double s = 1.0 / std::sqrt(3.0);
  std::array<Raster, 3> x, y;
  for (int c = 0; c < 3; ++c) {
    x[static_cast<std::size_t>(c)] = a.plane(c);
    y[static_cast<std::size_t>(c)] = b.plane(c);
    for (double& v : x[static_cast<std::size_t>(c)].values()) v *= s;
    for (double& v : y[static_cast<std::size_t>(c)].values()) v *= s;
  }
  std::array<Raster, 3> mx, my;
  for (std::size_t c = 0; c < 3; ++c) {
    mx[c] = filter_valid(x[c]);
    my[c] = filter_valid(y[c]);
  }
  // Second moments: E|x|², E|y|², E[x·y] and E[x×y].
  Raster exx = filter_valid(product(x[0], x[0]));
  Raster eyy = filter_valid(product(y[0], y[0]));
  Raster exy = filter_valid(product(x[0], y[0]));
  for (std::size_t c = 1; c < 3; ++c) {
    const Raster fxx = filter_valid(product(x[c], x[c]));
    const Raster fyy = filter_valid(product(y[c], y[c]));
    const Raster fxy = filter_valid(product(x[c], y[c]));
    for (std::size_t i = 0; i < exx.size(); ++i) {
      exx[i] += fxx[i];
      eyy[i] += fyy[i];
      exy[i] += fxy[i];
    }
  }
  std::array<Raster, 3> cross;
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t j = (c + 1) % 3, k = (c + 2) % 3;
    const Raster p1 = filter_valid(product(x[j], y[k]));
    const Raster p2 = filter_valid(product(x[k], y[j]));
    cross[c] = Raster(p1.height(), p1.width());
    for (std::size_t i = 0; i < p1.size(); ++i) cross[c][i] = p1[i] - p2[i];
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < exx.size(); ++i) {
    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      mxx += mx[c][i] * mx[c][i];
      myy += my[c][i] * my[c][i];
      mxy += mx[c][i] * my[c][i];
    }
    double vec2 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t j = (c + 1) % 3, k = (c + 2) % 3;
      const double mcross = mx[j][i] * my[k][i] - mx[k][i] * my[j][i];
      const double v = cross[c][i] - mcross;
      vec2 += v * v;
    }
    const double var_x = exx[i] - mxx;
    const double var_y = eyy[i] - myy;
    const double cov_real = exy[i] - mxy;
    const double cov_mod = std::sqrt(cov_real * cov_real + vec2);
    const double cov = cov_real < 0.0 ? -cov_mod : cov_mod;
    const double lum = (2.0 * std::sqrt(mxx) * std::sqrt(myy) + kC1) / (mxx + myy + kC1);
    const double structure = (2.0 * cov + kC2) / (var_x + var_y + kC2);
    sum += lum * structure;
  }
  return sum / static_cast<double>(exx.size());
}

// --- S-CIELAB -------------------------------------------------------------------

namespace {

constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

constexpr double kSrgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

// Poirson-Wandell opponent space (luminance, red-green, blue-yellow).
constexpr double kXyzToOpp[3][3] = {
    {0.2787336, 0.7218031, -0.1065520},
    {-0.4487736, 0.2898056, 0.0771569},
    {0.0859513, -0.5899859, 0.5011089},
};

struct GaussTerm {
  double spread_deg;
  double weight;
};

const std::array<std::vector<GaussTerm>, 3>& opponent_filters() {
  static const std::array<std::vector<GaussTerm>, 3> f{{
      {{0.05, 1.00327}, {0.225, 0.114416}, {7.0, -0.117686}},
      {{0.0685, 0.616725}, {0.826, 0.383275}},
      {{0.0920, 0.567885}, {0.6451, 0.432115}},
  }};
  return f;
}

double srgb_linear(double v) {
  const double m = std::abs(v);
  const double lin = m <= 0.04045 ? m / 12.92 : std::pow((m + 0.055) / 1.055, 2.4);
  return v < 0.0 ? -lin : lin;
}

double lab_f(double t) {
  constexpr double eps = 6.0 / 29.0;
  return t > eps * eps * eps ? std::cbrt(t) : t / (3.0 * eps * eps) + 4.0 / 29.0;
}

std::array<double, 3> xyz_to_lab(double x, double y, double z) {
  const double fx = lab_f(x / kWhiteX), fy = lab_f(y / kWhiteY), fz = lab_f(z / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<std::array<double, 3>, 3> invert3(const double m[3][3]) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  std::array<std::array<double, 3>, 3> r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

int reflect(int i, int n) {
  const int period = 2 * n;
  int r = i % period;
  if (r < 0) r += period;
  return r < n ? r : period - 1 - r;
}

// 1-D taps exp(-x²/s²) over a support of about one degree, normalized.
std::vector<double> gauss_taps(double spread_px, int radius) {
  std::vector<double> t(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int x = -radius; x <= radius; ++x) {
    const double v = std::exp(-(x * x) / (spread_px * spread_px));
    t[static_cast<std::size_t>(x + radius)] = v;
    sum += v;
  }
  for (double& v : t) v /= sum;
  return t;
}

Raster separable_filter(const Raster& in, const std::vector<double>& taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = in.height(), w = in.width();
  Raster tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps[static_cast<std::size_t>(k + radius)] * in(y, reflect(x + k, w));
      tmp(y, x) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps[static_cast<std::size_t>(k + radius)] * tmp(reflect(y + k, h), x);
      out(y, x) = acc;
    }
  }
  return out;
}

// sRGB image -> filtered opponent planes -> CIELAB planes.
std::array<Raster, 3> spatial_lab(const ColorImage& img, double spd) {
  const std::size_t n = img.pixel_count();
  std::array<Raster, 3> opp{Raster(img.height(), img.width()), Raster(img.height(), img.width()),
                            Raster(img.height(), img.width())};
  for (std::size_t i = 0; i < n; ++i) {
    const double lin[3] = {srgb_linear(img.plane(0)[i]), srgb_linear(img.plane(1)[i]), srgb_linear(img.plane(2)[i])};
    double xyz[3];
    for (int r = 0; r < 3; ++r) xyz[r] = kSrgbToXyz[r][0] * lin[0] + kSrgbToXyz[r][1] * lin[1] + kSrgbToXyz[r][2] * lin[2];
    for (int r = 0; r < 3; ++r) {
      opp[static_cast<std::size_t>(r)][i] = kXyzToOpp[r][0] * xyz[0] + kXyzToOpp[r][1] * xyz[1] + kXyzToOpp[r][2] * xyz[2];
    }
  }

  const int radius = std::max(1, static_cast<int>(std::ceil(spd / 2.0)) - 1);
  for (std::size_t c = 0; c < 3; ++c) {
    Raster acc(img.height(), img.width());
    for (const GaussTerm& term : opponent_filters()[c]) {
      const Raster part = separable_filter(opp[c], gauss_taps(term.spread_deg * spd, radius));
      for (std::size_t i = 0; i < n; ++i) acc[i] += term.weight * part[i];
    }
    opp[c] = std::move(acc);
  }

  const auto to_xyz = invert3(kXyzToOpp);
  std::array<Raster, 3> lab{Raster(img.height(), img.width()), Raster(img.height(), img.width()),
                            Raster(img.height(), img.width())};
  for (std::size_t i = 0; i < n; ++i) {
    double xyz[3];
    for (int r = 0; r < 3; ++r) {
      xyz[r] = to_xyz[static_cast<std::size_t>(r)][0] * opp[0][i] + to_xyz[static_cast<std::size_t>(r)][1] * opp[1][i] +
               to_xyz[static_cast<std::size_t>(r)][2] * opp[2][i];
    }
    const auto l = xyz_to_lab(xyz[0], xyz[1], xyz[2]);
    for (std::size_t c = 0; c < 3; ++c) lab[c][i] = l[c];
  }
  return lab;
}

}  // namespace

std::array<double, 3> srgb_to_lab(double r, double g, double b) {
  const double lin[3] = {srgb_linear(r), srgb_linear(g), srgb_linear(b)};
  double xyz[3];
  for (int k = 0; k < 3; ++k) xyz[k] = kSrgbToXyz[k][0] * lin[0] + kSrgbToXyz[k][1] * lin[1] + kSrgbToXyz[k][2] * lin[2];
  return xyz_to_lab(xyz[0], xyz[1], xyz[2]);
}

Raster scielab_delta_e(const ColorImage& a, const ColorImage& b, double samples_per_degree) {
  require_same_shape(a, b, "scielab");
  if (!(samples_per_degree > 0.0)) throw std::invalid_argument("samples_per_degree must be > 0");
  const auto la = spatial_lab(a, samples_per_degree);
  const auto lb = spatial_lab(b, samples_per_degree);
  Raster de(a.height(), a.width());
  for (std::size_t i = 0; i < de.size(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = la[c][i] - lb[c][i];
      s += d * d;
    }
    de[i] = std::sqrt(s);
  }
  return de;
}

std::size_t scielab_count(const ColorImage& a, const ColorImage& b, const ScielabParams& params) {
  const Raster de = scielab_delta_e(a, b, params.samples_per_degree);
  std::size_t count = 0;
  for (double v : de.values()) {
    if (v > params.threshold) ++count;
  }
  return count;
}

MetricsReport evaluate(const ColorImage& restored, const ColorImage& reference, const ScielabParams& params) {
  return {psnr(restored, reference), ssim(restored, reference), qssim(restored, reference),
          scielab_count(restored, reference, params)};
}

}  // namespace svsnltv
