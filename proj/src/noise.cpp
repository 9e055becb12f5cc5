#include "svsnltv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace svsnltv {

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

double PhiloxStream::uniform() {
  if (used_ >= 4) {
    buffer_ = Philox4x32::generate({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                   key_);
    ++block_;
    used_ = 0;
  }
  const std::uint64_t bits = (static_cast<std::uint64_t>(buffer_[static_cast<std::size_t>(used_)]) << 32) |
                             buffer_[static_cast<std::size_t>(used_ + 1)];
  used_ += 2;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double PhiloxStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t sample_poisson(double mean, PhiloxStream& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = rng.uniform();
    while (p > limit) {
      ++k;
      p *= rng.uniform();
    }
    return k;
  }
  const double x = std::round(mean + std::sqrt(mean) * rng.normal());
  return x <= 0.0 ? 0 : static_cast<std::uint64_t>(x);
}

namespace {

std::uint64_t stream_id(std::size_t pixel, int channel) {
  return static_cast<std::uint64_t>(pixel) * 3 + static_cast<std::uint64_t>(channel);
}

}  // namespace

ColorImage add_gaussian_noise(const ColorImage& img, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::gaussian) throw std::invalid_argument("add_gaussian_noise: spec is not gaussian");
  if (!(spec.level > 0.0)) throw std::invalid_argument("noise level must be > 0");
  ColorImage out = img;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      PhiloxStream rng(spec.seed, stream_id(i, c));
      out.plane(c)[i] += spec.level * rng.normal();
    }
  }
  return out;
}

ColorImage add_poisson_noise(const ColorImage& img, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::poisson) throw std::invalid_argument("add_poisson_noise: spec is not poisson");
  if (!(spec.level > 0.0)) throw std::invalid_argument("noise level must be > 0");
  const double d2 = spec.level * spec.level;
  ColorImage out(img.height(), img.width());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      PhiloxStream rng(spec.seed, stream_id(i, c));
      const double mean = std::max(0.0, img.plane(c)[i] / d2);
      out.plane(c)[i] = static_cast<double>(sample_poisson(mean, rng)) * d2;
    }
  }
  return out;
}

ColorImage add_noise(const ColorImage& img, const NoiseSpec& spec) {
  return spec.kind == NoiseKind::gaussian ? add_gaussian_noise(img, spec) : add_poisson_noise(img, spec);
}

}  // namespace svsnltv
