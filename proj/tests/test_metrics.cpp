#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "svsnltv/metrics.hpp"
#include "test_support.hpp"

using namespace svsnltv;

namespace {

// Brute-force SSIM: explicit 11x11 Gaussian window at every valid position.
double oracle_ssim(const Raster& a, const Raster& b) {
  double wsum = 0.0;
  double win[11][11];
  for (int y = 0; y < 11; ++y) {
    for (int x = 0; x < 11; ++x) {
      win[y][x] = std::exp(-((y - 5) * (y - 5) + (x - 5) * (x - 5)) / (2 * 1.5 * 1.5));
      wsum += win[y][x];
    }
  }
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  int count = 0;
  for (int y0 = 0; y0 + 11 <= a.height(); ++y0) {
    for (int x0 = 0; x0 + 11 <= a.width(); ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int y = 0; y < 11; ++y) {
        for (int x = 0; x < 11; ++x) {
          const double w = win[y][x] / wsum;
          const double va = a(y0 + y, x0 + x), vb = b(y0 + y, x0 + x);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / count;
}

ColorImage uniform(int h, int w, double r, double g, double b) {
  ColorImage img(h, w);
  img.plane(0) = Raster(h, w, r);
  img.plane(1) = Raster(h, w, g);
  img.plane(2) = Raster(h, w, b);
  return img;
}

ColorImage gray_image(const Raster& p) { return ColorImage(std::array<Raster, 3>{p, p, p}); }

}  // namespace

TEST_CASE("PSNR") {
  std::mt19937_64 rng(71);
  const ColorImage a = testsupport::random_image(8, 8, rng, 0.2, 0.8);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  ColorImage b = a;
  for (int c = 0; c < 3; ++c) {
    for (double& v : b.plane(c).values()) v += 0.1;
  }
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(a, ColorImage(8, 9)), DimensionError);
}

TEST_CASE("evaluate on identical images") {
  std::mt19937_64 rng(72);
  const ColorImage x = testsupport::random_image(24, 20, rng);
  const MetricsReport m = evaluate(x, x);
  CHECK(m.psnr == std::numeric_limits<double>::infinity());
  CHECK(m.ssim == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.qssim == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.scielab_count == 0u);
}

TEST_CASE("SSIM closed form on constant images") {
  const double c1 = 1e-4;
  for (auto [x, y] : {std::pair{0.3, 0.6}, std::pair{0.0, 1.0}, std::pair{0.5, 0.5}, std::pair{0.9, 0.1}}) {
    const double expect = (2 * x * y + c1) / (x * x + y * y + c1);
    CHECK(std::abs(ssim(Raster(16, 16, x), Raster(16, 16, y)) - expect) <= 1e-9);
    CHECK(std::abs(ssim(uniform(16, 16, x, x, x), uniform(16, 16, y, y, y)) - expect) <= 1e-9);
  }
}

TEST_CASE("SSIM matches a brute-force window loop") {
  std::mt19937_64 rng(73);
  const ColorImage a = testsupport::random_image(17, 14, rng);
  ColorImage b = a;
  std::normal_distribution<double> n(0.0, 0.1);
  for (int c = 0; c < 3; ++c) {
    for (double& v : b.plane(c).values()) v += n(rng);
  }
  double mean = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double o = oracle_ssim(a.plane(c), b.plane(c));
    CHECK(std::abs(ssim(a.plane(c), b.plane(c)) - o) <= 1e-12);
    mean += o / 3.0;
  }
  CHECK(std::abs(ssim(a, b) - mean) <= 1e-12);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
  CHECK(ssim(a, b) < 1.0);
  CHECK_THROWS_AS(ssim(Raster(10, 20), Raster(10, 20)), DimensionError);
}

TEST_CASE("QSSIM of gray images collapses to SSIM") {
  std::mt19937_64 rng(74);
  for (int t = 0; t < 5; ++t) {
    const auto pa = testsupport::random_vector(16 * 15, rng, 0.0, 1.0);
    auto pb = pa;
    std::normal_distribution<double> n(0.0, 0.05 * (t + 1));
    for (double& v : pb) v += n(rng);
    const Raster ra(16, 15, pa), rb(16, 15, pb);
    CHECK(std::abs(qssim(gray_image(ra), gray_image(rb)) - ssim(ra, rb)) <= 1e-9);
  }
  // Anti-correlated structure gives a negative score, as in SSIM.
  const auto pa = testsupport::random_vector(16 * 16, rng, 0.0, 1.0);
  std::vector<double> pb(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) pb[i] = 1.0 - pa[i];
  const Raster ra(16, 16, pa), rb(16, 16, pb);
  CHECK(std::abs(qssim(gray_image(ra), gray_image(rb)) - ssim(ra, rb)) <= 1e-9);
  CHECK(ssim(ra, rb) < 0.0);
}

TEST_CASE("QSSIM basic properties") {
  std::mt19937_64 rng(75);
  const ColorImage a = testsupport::random_image(14, 14, rng);
  const ColorImage b = testsupport::random_image(14, 14, rng);
  CHECK(qssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(qssim(a, b) == doctest::Approx(qssim(b, a)).epsilon(1e-12));
  CHECK(qssim(a, b) < 0.5);
}

TEST_CASE("CIELAB of sRGB primaries") {
  // Published D65 values for the sRGB primaries and white.
  const struct {
    double rgb[3];
    double lab[3];
  } cases[] = {
      {{1, 1, 1}, {100.0, 0.0, 0.0}},
      {{0, 0, 0}, {0.0, 0.0, 0.0}},
      {{1, 0, 0}, {53.24, 80.09, 67.20}},
      {{0, 1, 0}, {87.73, -86.18, 83.18}},
      {{0, 0, 1}, {32.30, 79.19, -107.86}},
  };
  for (const auto& c : cases) {
    const auto lab = srgb_to_lab(c.rgb[0], c.rgb[1], c.rgb[2]);
    // Reference values carry two decimals.
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(lab[k] - c.lab[k]) <= 0.03);
  }
}

TEST_CASE("S-CIELAB on uniform fields reduces to plain CIELAB") {
  const Raster de = scielab_delta_e(uniform(20, 20, 1, 1, 1), uniform(20, 20, 0, 0, 0));
  for (double v : de.values()) CHECK(v == doctest::Approx(100.0).epsilon(1e-6));

  const auto red = srgb_to_lab(1, 0, 0), blue = srgb_to_lab(0, 0, 1);
  const double plain = std::sqrt(std::pow(red[0] - blue[0], 2) + std::pow(red[1] - blue[1], 2) +
                                 std::pow(red[2] - blue[2], 2));
  const Raster rb = scielab_delta_e(uniform(16, 16, 1, 0, 0), uniform(16, 16, 0, 0, 1));
  for (double v : rb.values()) CHECK(v == doctest::Approx(plain).epsilon(1e-6));

  CHECK(scielab_count(uniform(16, 16, 1, 1, 1), uniform(16, 16, 0, 0, 0)) == 256u);
  CHECK(scielab_count(uniform(16, 16, 0.5, 0.5, 0.5), uniform(16, 16, 0.51, 0.5, 0.5)) == 0u);
}

TEST_CASE("S-CIELAB count is monotone in the threshold and symmetric") {
  std::mt19937_64 rng(76);
  const ColorImage a = testsupport::random_image(32, 32, rng);
  ColorImage b = a;
  std::normal_distribution<double> n(0.0, 0.15);
  for (int c = 0; c < 3; ++c) {
    for (double& v : b.plane(c).values()) v = std::clamp(v + n(rng), 0.0, 1.0);
  }
  std::size_t prev = a.pixel_count() + 1;
  for (double thr = 0.0; thr <= 60.0; thr += 0.5) {
    const std::size_t c = scielab_count(a, b, {23.0, thr});
    CHECK(c <= prev);
    prev = c;
  }
  CHECK(scielab_count(a, b) == scielab_count(b, a));
  CHECK(scielab_count(a, b, {23.0, 0.0}) == a.pixel_count());
  const Raster d1 = scielab_delta_e(a, b), d2 = scielab_delta_e(b, a);
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == doctest::Approx(d2[i]).epsilon(1e-12));
}
