#include "svsnltv/regularizer.hpp"

#include <cmath>
#include <stdexcept>

namespace svsnltv {

void RegWeights::validate() const {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
}

namespace {

void require_graph_shape(const ColorImage& u, const NonlocalGraph& g) {
  if (u.height() != g.height() || u.width() != g.width()) {
    throw DimensionError("image and graph dimensions differ");
  }
}

double abs_sum(const EdgeField& p) {
  double s = 0.0;
  for (double v : p.values) s += std::abs(v);
  return s;
}

}  // namespace

double svs_nltv(const ColorImage& u, const NonlocalGraph& g, double mu) {
  require_graph_shape(u, g);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const double inv_sqrt6 = 1.0 / std::sqrt(6.0);
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  const Raster& r = u.plane(0);
  const Raster& gr = u.plane(1);
  const Raster& b = u.plane(2);
  double sat = 0.0;
  double val = 0.0;
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
      const std::size_t j = g.neighbor(e);
      const double dr = r[j] - r[i];
      const double dg = gr[j] - gr[i];
      const double db = b[j] - b[i];
      const double ws = g.sqrt_weight(e, Channel::saturation);
      sat += std::abs((dr - dg) * inv_sqrt2 * ws) + std::abs((dr + dg - 2.0 * db) * inv_sqrt6 * ws);
      val += std::abs((dr + dg + db) * inv_sqrt3 * g.sqrt_weight(e, Channel::value));
    }
  }
  return sat + mu * val;
}

double svs_nltv_qform(const ColorImage& u, const NonlocalGraph& g, double mu) {
  require_graph_shape(u, g);
  const SVImage q = rgb_to_sv(u);
  const PairField s = nl_gradient(q.plane(0).values(), q.plane(1).values(), g);
  const EdgeField v = nl_gradient(q.plane(2).values(), g, Channel::value);
  return abs_sum(s.first) + abs_sum(s.second) + mu * abs_sum(v);
}

double nltv(const ColorImage& u, const std::array<NonlocalGraph, 3>& g_rgb) {
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const NonlocalGraph& g = g_rgb[static_cast<std::size_t>(c)];
    require_graph_shape(u, g);
    total += abs_sum(nl_gradient(u.plane(c).values(), g, Channel::value));
  }
  return total;
}

double data_term(const ColorImage& u, const ColorImage& f, const BlurKernel& k, Fidelity fidelity) {
  require_same_shape(u, f, "data_term");
  const ColorImage ku = k.is_identity() ? u : convolve_periodic(u, k, ConvolutionMethod::spatial);
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < u.pixel_count(); ++i) {
      const double res = ku.plane(c)[i] - f.plane(c)[i];
      s += fidelity == Fidelity::l2 ? res * res : std::abs(res);
    }
  }
  return 0.5 * s;
}

double objective(const ColorImage& u, const ColorImage& f, const BlurKernel& k, const NonlocalGraph& g,
                 const RegWeights& weights, Fidelity fidelity) {
  return weights.alpha * svs_nltv(u, g, weights.mu) + data_term(u, f, k, fidelity);
}

double objective_nltv(const ColorImage& u, const ColorImage& f, const BlurKernel& k,
                      const std::array<NonlocalGraph, 3>& g_rgb, double alpha, Fidelity fidelity) {
  return alpha * nltv(u, g_rgb) + data_term(u, f, k, fidelity);
}

}  // namespace svsnltv
