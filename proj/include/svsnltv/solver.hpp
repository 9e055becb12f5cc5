#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "svsnltv/fourier.hpp"
#include "svsnltv/graph.hpp"
#include "svsnltv/image.hpp"
#include "svsnltv/kernel.hpp"
#include "svsnltv/regularizer.hpp"

namespace svsnltv {

/// The step size violates 0 < δ < 1/‖BᵀB‖.
class SpectralGuardError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An iterate became non-finite.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(int iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

private:
  int iteration_;
};

/// Visiting order of the Gauss-Seidel sweeps. `colored` visits the classes
/// of a greedy graph coloring one after another; pixels within a class do
/// not touch each other, so a class can be updated in any order.
enum class GaussSeidelOrder { raster, colored };

enum class Prior { svs_nltv, nltv };

struct SolverConfig {
  double alpha = 0.1;    ///< regularization weight
  double mu = 0.05;      ///< value-channel weight
  double lambda = 1.0;   ///< Moreau-Yosida weight
  double delta = 0.45;   ///< proximal step; must satisfy δ < 1/‖BᵀB‖
  double beta = 1.0;     ///< split-Bregman penalty
  int outer_max = 500;
  int inner_max = 2;     ///< split-Bregman sweeps per outer iteration
  int gs_sweeps = 4;     ///< Gauss-Seidel sweeps per split-Bregman sweep
  double tol = 1e-6;     ///< relative change of successive iterates
  bool clamp_each_iter = false;
  bool clamp_output = true;
  GaussSeidelOrder gs_order = GaussSeidelOrder::raster;
  /// Rebuild the weight graph from the current iterate every k outer
  /// iterations; 0 keeps the graph fixed.
  int graph_refresh = 0;

  void validate() const;
};

/// Split-Bregman variables d, b for each of the three coefficient channels.
struct SplitVariables {
  std::array<EdgeField, 3> d;
  std::array<EdgeField, 3> b;
};

struct IterationRecord {
  int iter;
  double objective;
  double rel_err;
};

struct SolverState {
  ColorImage u;
  ColorImage p;
  ColorImage v;
  ColorImage q_aux;
  ColorImage f_breg;
  SplitVariables split;
  int iter = 0;
  std::vector<IterationRecord> history;
};

struct RestoreResult {
  ColorImage restored;
  int iterations = 0;
  double final_rel_err = 0.0;
  std::vector<double> objective_trace;
  std::vector<IterationRecord> history;
};

/// sign(x)·max(|x| − t, 0). Throws for t < 0.
double shrink(double x, double t);

/// Closed-form p-step for the L2 model: q / (1 + δλ).
ColorImage p_update_l2(const ColorImage& q_aux, double delta, double lambda);

/// p-step for the L1 model: shrink(q, λδ) elementwise.
ColorImage p_update_l1(const ColorImage& q_aux, double delta, double lambda);

/// Solves (δKᵀK + (δ+1)I) v = (δ+1)u + δKᵀ(p + f) with periodic boundaries
/// and returns (v, q) with q = δ/(δ+1)·(p/δ − f + Kv).
class WUpdate {
public:
  WUpdate(const BlurKernel& k, int height, int width, double delta);
  WUpdate(const WUpdate&) = delete;
  WUpdate& operator=(const WUpdate&) = delete;

  std::pair<ColorImage, ColorImage> operator()(const ColorImage& u, const ColorImage& p,
                                               const ColorImage& f_breg);
  /// K*u for the same kernel and grid.
  ColorImage blur(const ColorImage& u);

private:
  bool identity_;
  double delta_;
  int height_;
  int width_;
  std::optional<Fourier2d> fft_;
  Fourier2d::Spectrum transfer_;
};

std::pair<ColorImage, ColorImage> w_update(const ColorImage& u, const ColorImage& p,
                                           const ColorImage& f_breg, const BlurKernel& k,
                                           double delta);

/// Pixel visiting order for the Gauss-Seidel sweeps.
std::vector<std::uint32_t> gauss_seidel_order(const NonlocalGraph& g, GaussSeidelOrder order);

/// Split-Bregman solve of one coefficient channel:
///   min κ Σ|∇q| + 1/(2δ)‖q − target‖²
/// q holds the result. d and b persist between calls.
void prox_channel(std::vector<double>& q, std::span<const double> target, const NonlocalGraph& g,
                  Channel ch, double kappa, const SolverConfig& cfg, std::span<const std::uint32_t> order,
                  EdgeField& d, EdgeField& b);

/// argmin_u λα·SVS-NLTV(u) + 1/(2δ)‖u − v‖², approximated by cfg.inner_max
/// split-Bregman sweeps in the coefficients q = P u.
ColorImage u_subproblem(const ColorImage& v, const NonlocalGraph& g, const SolverConfig& cfg,
                        SplitVariables& split);

/// Same for the per-channel NLTV prior, directly in RGB.
ColorImage u_subproblem_nltv(const ColorImage& v, const std::array<NonlocalGraph, 3>& g_rgb,
                             const SolverConfig& cfg, SplitVariables& split);

/// ‖BᵀB‖ for B = [K, −I] on an H x W periodic grid: max |K̂|² + 1.
double estimate_spectral_norm(const BlurKernel& k, int height, int width);

/// Bregmanized operator splitting for α·R(u) + data term, where R is either
/// SVS-NLTV or per-channel NLTV. Owns its state; the graphs are borrowed and
/// must outlive the solver unless graph refresh is enabled.
class BregmanSolver {
public:
  BregmanSolver(const ColorImage& f, const BlurKernel& k, const NonlocalGraph& g, SolverConfig cfg,
                Fidelity fidelity);
  BregmanSolver(const ColorImage& f, const BlurKernel& k, const std::array<NonlocalGraph, 3>& g_rgb,
                SolverConfig cfg, Fidelity fidelity);

  /// Required when cfg.graph_refresh > 0.
  void set_refresh_params(const PatchParams& params) { refresh_params_ = params; }

  /// One outer iteration; returns the relative change of u.
  double step();
  /// Iterates until the tolerance or outer_max is reached.
  RestoreResult run();

  const SolverState& state() const { return state_; }
  double current_objective() const;

private:
  void init(const ColorImage& f);
  void refresh_graphs();
  void compute_orders();

  Prior prior_;
  ColorImage f_;
  BlurKernel kernel_;
  SolverConfig cfg_;
  Fidelity fidelity_;
  const NonlocalGraph* graph_ = nullptr;
  const std::array<NonlocalGraph, 3>* graphs_rgb_ = nullptr;
  std::optional<NonlocalGraph> owned_graph_;
  std::optional<std::array<NonlocalGraph, 3>> owned_graphs_rgb_;
  std::optional<PatchParams> refresh_params_;
  WUpdate w_update_;
  std::array<std::vector<std::uint32_t>, 3> orders_;
  SolverState state_;
};

RestoreResult solve(const ColorImage& f, const BlurKernel& k, const NonlocalGraph& g, const SolverConfig& cfg,
                    Fidelity fidelity);

RestoreResult solve_nltv(const ColorImage& f, const BlurKernel& k, const std::array<NonlocalGraph, 3>& g_rgb,
                         const SolverConfig& cfg, Fidelity fidelity);

}  // namespace svsnltv
