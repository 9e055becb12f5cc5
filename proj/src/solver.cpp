#include "svsnltv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace svsnltv {

void SolverConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be finite and >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
  if (outer_max < 1) throw std::invalid_argument("outer_max must be >= 1");
  if (inner_max < 1) throw std::invalid_argument("inner_max must be >= 1");
  if (gs_sweeps < 1) throw std::invalid_argument("gs_sweeps must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (graph_refresh < 0) throw std::invalid_argument("graph_refresh must be >= 0");
}

double shrink(double x, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("shrink: threshold must be >= 0");
  const double mag = std::abs(x) - t;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

ColorImage p_update_l2(const ColorImage& q_aux, double delta, double lambda) {
  const double scale = 1.0 / (1.0 + delta * lambda);
  ColorImage p = q_aux;
  for (int c = 0; c < 3; ++c) {
    for (double& x : p.plane(c).values()) x *= scale;
  }
  return p;
}

ColorImage p_update_l1(const ColorImage& q_aux, double delta, double lambda) {
  const double t = lambda * delta;
  ColorImage p = q_aux;
  for (int c = 0; c < 3; ++c) {
    for (double& x : p.plane(c).values()) x = shrink(x, t);
  }
  return p;
}

// --- w-step ---------------------------------------------------------------------

WUpdate::WUpdate(const BlurKernel& k, int height, int width, double delta)
    : identity_(k.is_identity()), delta_(delta), height_(height), width_(width) {
  require_kernel_fits(k, height, width);
  if (!identity_) {
    fft_.emplace(height, width);
    transfer_ = transfer_function(k, height, width);
  }
}

std::pair<ColorImage, ColorImage> WUpdate::operator()(const ColorImage& u, const ColorImage& p,
                                                      const ColorImage& f_breg) {
  require_same_shape(u, p, "w_update");
  require_same_shape(u, f_breg, "w_update");
  if (u.height() != height_ || u.width() != width_) throw DimensionError("w_update: grid mismatch");
  const double d = delta_;
  ColorImage v(height_, width_);
  ColorImage q(height_, width_);
  const std::size_t n = u.pixel_count();

  if (identity_) {
    const double denom = 2.0 * d + 1.0;
    for (int c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = ((d + 1.0) * u.plane(c)[i] + d * (p.plane(c)[i] + f_breg.plane(c)[i])) / denom;
        v.plane(c)[i] = vi;
        q.plane(c)[i] = (p.plane(c)[i] - d * f_breg.plane(c)[i] + d * vi) / (d + 1.0);
      }
    }
    return {std::move(v), std::move(q)};
  }

  std::vector<double> pf(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) pf[i] = p.plane(c)[i] + f_breg.plane(c)[i];
    const auto uh = fft_->forward(u.plane(c).values());
    const auto pfh = fft_->forward(pf);
    Fourier2d::Spectrum vh(uh.size());
    Fourier2d::Spectrum kvh(uh.size());
    for (std::size_t k = 0; k < uh.size(); ++k) {
      const std::complex<double> kh = transfer_[k];
      const double denom = d * std::norm(kh) + d + 1.0;
      vh[k] = ((d + 1.0) * uh[k] + d * std::conj(kh) * pfh[k]) / denom;
      kvh[k] = kh * vh[k];
    }
    const std::vector<double> vv = fft_->inverse(vh);
    const std::vector<double> kv = fft_->inverse(kvh);
    for (std::size_t i = 0; i < n; ++i) {
      v.plane(c)[i] = vv[i];
      q.plane(c)[i] = (p.plane(c)[i] - d * f_breg.plane(c)[i] + d * kv[i]) / (d + 1.0);
    }
  }
  return {std::move(v), std::move(q)};
}

ColorImage WUpdate::blur(const ColorImage& u) {
  if (identity_) return u;
  ColorImage out(height_, width_);
  for (int c = 0; c < 3; ++c) {
    auto spec = fft_->forward(u.plane(c).values());
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= transfer_[k];
    out.plane(c) = Raster(height_, width_, fft_->inverse(spec));
  }
  return out;
}

std::pair<ColorImage, ColorImage> w_update(const ColorImage& u, const ColorImage& p, const ColorImage& f_breg,
                                           const BlurKernel& k, double delta) {
  WUpdate step(k, u.height(), u.width(), delta);
  return step(u, p, f_breg);
}

// --- u-step ---------------------------------------------------------------------

std::vector<std::uint32_t> gauss_seidel_order(const NonlocalGraph& g, GaussSeidelOrder order) {
  const std::size_t n = g.pixel_count();
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  if (order == GaussSeidelOrder::raster) return idx;

  std::vector<int> color(n, -1);
  std::vector<char> taken;
  for (std::size_t i = 0; i < n; ++i) {
    taken.assign(g.degree(i) + 1, 0);
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
      const int c = color[g.neighbor(e)];
      if (c >= 0 && static_cast<std::size_t>(c) < taken.size()) taken[static_cast<std::size_t>(c)] = 1;
    }
    int c = 0;
    while (taken[static_cast<std::size_t>(c)]) ++c;
    color[i] = c;
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return color[a] < color[b]; });
  return idx;
}

void prox_channel(std::vector<double>& q, std::span<const double> target, const NonlocalGraph& g, Channel ch,
                  double kappa, const SolverConfig& cfg, std::span<const std::uint32_t> order, EdgeField& d,
                  EdgeField& b) {
  const std::size_t n = g.pixel_count();
  if (target.size() != n || order.size() != n) throw DimensionError("prox_channel: raster does not match graph");
  if (d.values.size() != g.edge_count()) d = EdgeField(g);
  if (b.values.size() != g.edge_count()) b = EdgeField(g);
  q.assign(target.begin(), target.end());
  if (kappa == 0.0) return;

  const double db = cfg.delta * cfg.beta;
  const double threshold = kappa / cfg.beta;
  EdgeField b_minus_d(g);
  for (int inner = 0; inner < cfg.inner_max; ++inner) {
    for (std::size_t e = 0; e < g.edge_count(); ++e) b_minus_d.values[e] = b.values[e] - d.values[e];
    const std::vector<double> div = nl_divergence(b_minus_d, g, ch);

    // (I − δβ Lap) q = target + δβ div(b − d)
    for (int sweep = 0; sweep < cfg.gs_sweeps; ++sweep) {
      for (const std::uint32_t i : order) {
        double wsum = 0.0;
        double wq = 0.0;
        for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
          const double w = g.weight(e, ch);
          wsum += w;
          wq += w * q[g.neighbor(e)];
        }
        q[i] = (target[i] + db * div[i] + 2.0 * db * wq) / (1.0 + 2.0 * db * wsum);
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
        const double grad = (q[g.neighbor(e)] - q[i]) * g.sqrt_weight(e, ch);
        const double dn = shrink(grad + b.values[e], threshold);
        d.values[e] = dn;
        b.values[e] += grad - dn;
      }
    }
  }
}

namespace {

struct ChannelPlan {
  const NonlocalGraph* graph;
  Channel weights;
  double kappa;
  const std::vector<std::uint32_t>* order;
};

ColorImage svs_prox(const ColorImage& v, const NonlocalGraph& g, const SolverConfig& cfg, SplitVariables& split,
                    const std::vector<std::uint32_t>& order) {
  if (v.height() != g.height() || v.width() != g.width()) throw DimensionError("u_subproblem: image/graph mismatch");
  if (cfg.lambda * cfg.alpha == 0.0) return v;
  const SVImage vt = rgb_to_sv(v);
  const std::array<ChannelPlan, 3> plan{{
      {&g, Channel::saturation, cfg.lambda * cfg.alpha, &order},
      {&g, Channel::saturation, cfg.lambda * cfg.alpha, &order},
      {&g, Channel::value, cfg.lambda * cfg.alpha * cfg.mu, &order},
  }};
  SVImage q(v.height(), v.width());
  std::vector<double> buf;
  for (std::size_t c = 0; c < 3; ++c) {
    prox_channel(buf, vt.plane(static_cast<int>(c)).values(), *plan[c].graph, plan[c].weights, plan[c].kappa, cfg,
                 *plan[c].order, split.d[c], split.b[c]);
    q.plane(static_cast<int>(c)) = Raster(v.height(), v.width(), buf);
  }
  return sv_to_rgb(q);
}

ColorImage nltv_prox(const ColorImage& v, const std::array<NonlocalGraph, 3>& g_rgb, const SolverConfig& cfg,
                     SplitVariables& split, const std::array<std::vector<std::uint32_t>, 3>& orders) {
  for (const auto& g : g_rgb) {
    if (v.height() != g.height() || v.width() != g.width()) throw DimensionError("u_subproblem: image/graph mismatch");
  }
  if (cfg.lambda * cfg.alpha == 0.0) return v;
  ColorImage u(v.height(), v.width());
  std::vector<double> buf;
  for (std::size_t c = 0; c < 3; ++c) {
    prox_channel(buf, v.plane(static_cast<int>(c)).values(), g_rgb[c], Channel::value, cfg.lambda * cfg.alpha, cfg,
                 orders[c], split.d[c], split.b[c]);
    u.plane(static_cast<int>(c)) = Raster(v.height(), v.width(), buf);
  }
  return u;
}

}  // namespace

ColorImage u_subproblem(const ColorImage& v, const NonlocalGraph& g, const SolverConfig& cfg, SplitVariables& split) {
  return svs_prox(v, g, cfg, split, gauss_seidel_order(g, cfg.gs_order));
}

ColorImage u_subproblem_nltv(const ColorImage& v, const std::array<NonlocalGraph, 3>& g_rgb, const SolverConfig& cfg,
                             SplitVariables& split) {
  const std::array<std::vector<std::uint32_t>, 3> orders{gauss_seidel_order(g_rgb[0], cfg.gs_order),
                                                         gauss_seidel_order(g_rgb[1], cfg.gs_order),
                                                         gauss_seidel_order(g_rgb[2], cfg.gs_order)};
  return nltv_prox(v, g_rgb, cfg, split, orders);
}

double estimate_spectral_norm(const BlurKernel& k, int height, int width) {
  require_kernel_fits(k, height, width);
  const auto kh = transfer_function(k, height, width);
  double best = 0.0;
  for (const auto& z : kh) best = std::max(best, std::norm(z));
  return best + 1.0;
}

// --- outer loop -----------------------------------------------------------------

namespace {

void check_guard(const SolverConfig& cfg, const BlurKernel& k, int height, int width) {
  const double norm = estimate_spectral_norm(k, height, width);
  if (!(cfg.delta * norm < 1.0)) {
    throw SpectralGuardError("delta = " + std::to_string(cfg.delta) + " violates delta < 1/||B^T B|| = " +
                             std::to_string(1.0 / norm));
  }
}

double relative_change(const ColorImage& next, const ColorImage& prev) {
  double diff = 0.0;
  double base = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < next.pixel_count(); ++i) {
      const double dlt = next.plane(c)[i] - prev.plane(c)[i];
      diff += dlt * dlt;
      base += prev.plane(c)[i] * prev.plane(c)[i];
    }
  }
  if (base == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / base);
}

}  // namespace

BregmanSolver::BregmanSolver(const ColorImage& f, const BlurKernel& k, const NonlocalGraph& g, SolverConfig cfg,
                             Fidelity fidelity)
    : prior_(Prior::svs_nltv), f_(f), kernel_(k), cfg_(cfg), fidelity_(fidelity), graph_(&g),
      w_update_(k, f.height(), f.width(), cfg.delta) {
  if (f.height() != g.height() || f.width() != g.width()) throw DimensionError("solve: image and graph dimensions differ");
  init(f);
}

BregmanSolver::BregmanSolver(const ColorImage& f, const BlurKernel& k, const std::array<NonlocalGraph, 3>& g_rgb,
                             SolverConfig cfg, Fidelity fidelity)
    : prior_(Prior::nltv), f_(f), kernel_(k), cfg_(cfg), fidelity_(fidelity), graphs_rgb_(&g_rgb),
      w_update_(k, f.height(), f.width(), cfg.delta) {
  for (const auto& g : g_rgb) {
    if (f.height() != g.height() || f.width() != g.width()) throw DimensionError("solve: image and graph dimensions differ");
  }
  init(f);
}

void BregmanSolver::init(const ColorImage& f) {
  cfg_.validate();
  if (!is_finite(f)) throw std::invalid_argument("solve: observation contains non-finite values");
  check_guard(cfg_, kernel_, f.height(), f.width());
  state_.u = f;
  state_.v = f;
  state_.p = ColorImage(f.height(), f.width());
  state_.q_aux = ColorImage(f.height(), f.width());
  state_.f_breg = f;
  state_.iter = 0;
  state_.history.clear();
  compute_orders();
}

double BregmanSolver::current_objective() const {
  const ColorImage& u = state_.u;
  if (prior_ == Prior::svs_nltv) {
    return cfg_.alpha * svs_nltv(u, *graph_, cfg_.mu) + data_term(u, f_, kernel_, fidelity_);
  }
  return objective_nltv(u, f_, kernel_, *graphs_rgb_, cfg_.alpha, fidelity_);
}

void BregmanSolver::refresh_graphs() {
  if (!refresh_params_) throw std::logic_error("graph refresh requested without patch parameters");
  const ColorImage guide = clamp(state_.u, 0.0, 1.0);
  if (prior_ == Prior::svs_nltv) {
    owned_graph_ = build_graph(guide, *refresh_params_);
    graph_ = &*owned_graph_;
  } else {
    owned_graphs_rgb_ = build_channel_graphs(guide, *refresh_params_);
    graphs_rgb_ = &*owned_graphs_rgb_;
  }
  // The edge supports changed; restart the split variables.
  state_.split = SplitVariables{};
  compute_orders();
}

void BregmanSolver::compute_orders() {
  if (prior_ == Prior::svs_nltv) {
    orders_[0] = gauss_seidel_order(*graph_, cfg_.gs_order);
  } else {
    for (std::size_t c = 0; c < 3; ++c) orders_[c] = gauss_seidel_order((*graphs_rgb_)[c], cfg_.gs_order);
  }
}

double BregmanSolver::step() {
  const int k = state_.iter + 1;
  if (cfg_.graph_refresh > 0 && state_.iter > 0 && state_.iter % cfg_.graph_refresh == 0) refresh_graphs();

  ColorImage u_next;
  if (prior_ == Prior::svs_nltv) {
    u_next = svs_prox(state_.v, *graph_, cfg_, state_.split, orders_[0]);
  } else {
    u_next = nltv_prox(state_.v, *graphs_rgb_, cfg_, state_.split, orders_);
  }
  if (cfg_.clamp_each_iter) u_next = clamp(u_next, 0.0, 1.0);

  ColorImage p_next = fidelity_ == Fidelity::l2 ? p_update_l2(state_.q_aux, cfg_.delta, cfg_.lambda)
                                                : p_update_l1(state_.q_aux, cfg_.delta, cfg_.lambda);

  auto [v_next, q_next] = w_update_(u_next, p_next, state_.f_breg);

  // f^{k+1} = f^k + f − (K u^{k+1} − p^{k+1})
  const ColorImage ku = w_update_.blur(u_next);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < f_.pixel_count(); ++i) {
      state_.f_breg.plane(c)[i] += f_.plane(c)[i] - (ku.plane(c)[i] - p_next.plane(c)[i]);
    }
  }

  if (!is_finite(u_next) || !is_finite(v_next) || !is_finite(state_.f_breg)) {
    throw DivergenceError(k, "solver diverged: non-finite iterate at outer iteration " + std::to_string(k));
  }

  const double rel = relative_change(u_next, state_.u);
  state_.u = std::move(u_next);
  state_.p = std::move(p_next);
  state_.v = std::move(v_next);
  state_.q_aux = std::move(q_next);
  state_.iter = k;
  const double obj = current_objective();
  if (!std::isfinite(obj)) throw DivergenceError(k, "solver diverged: non-finite objective at outer iteration " + std::to_string(k));
  state_.history.push_back({k, obj, rel});
  return rel;
}

RestoreResult BregmanSolver::run() {
  double rel = std::numeric_limits<double>::infinity();
  while (state_.iter < cfg_.outer_max) {
    rel = step();
    if (rel <= cfg_.tol) break;
  }
  RestoreResult result;
  result.restored = cfg_.clamp_output ? clamp(state_.u, 0.0, 1.0) : state_.u;
  result.iterations = state_.iter;
  result.final_rel_err = rel;
  result.history = state_.history;
  for (const auto& h : state_.history) result.objective_trace.push_back(h.objective);
  return result;
}

RestoreResult solve(const ColorImage& f, const BlurKernel& k, const NonlocalGraph& g, const SolverConfig& cfg,
                    Fidelity fidelity) {
  BregmanSolver solver(f, k, g, cfg, fidelity);
  return solver.run();
}

RestoreResult solve_nltv(const ColorImage& f, const BlurKernel& k, const std::array<NonlocalGraph, 3>& g_rgb,
                         const SolverConfig& cfg, Fidelity fidelity) {
  BregmanSolver solver(f, k, g_rgb, cfg, fidelity);
  return solver.run();
}

}  // namespace svsnltv
