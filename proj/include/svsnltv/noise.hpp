#pragma once

#include <array>
#include <cstdint>

#include "svsnltv/image.hpp"

namespace svsnltv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The output
/// is a pure function of (key, counter), so every pixel can own an
/// independent, reproducible stream.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Sequential uniforms from one Philox stream identified by (seed, stream).
class PhiloxStream {
public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform in the open interval (0,1) with 53 random bits.
  double uniform();
  /// Standard normal by Box-Muller.
  double normal();

private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

enum class NoiseKind { gaussian, poisson };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  /// Standard deviation (gaussian) or the scale d (poisson).
  double level = 0.0;
  std::uint64_t seed = 0;
};

/// out = img + N(0, level²), i.i.d. per pixel and channel. No clipping.
ColorImage add_gaussian_noise(const ColorImage& img, const NoiseSpec& spec);

/// out = Poisson(max(0, img / d²)) · d², per pixel and channel.
ColorImage add_poisson_noise(const ColorImage& img, const NoiseSpec& spec);

/// Dispatches on spec.kind.
ColorImage add_noise(const ColorImage& img, const NoiseSpec& spec);

/// Poisson variate: Knuth's product method below mean 30, rounded normal
/// approximation above.
std::uint64_t sample_poisson(double mean, PhiloxStream& rng);

}  // namespace svsnltv
