// Acceptance runner. One PASS/FAIL line per criterion; pass criterion
// numbers as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "svsnltv/app/commands.hpp"
#include "svsnltv/graph.hpp"
#include "svsnltv/image_io.hpp"
#include "svsnltv/metrics.hpp"
#include "svsnltv/noise.hpp"
#include "svsnltv/regularizer.hpp"
#include "svsnltv/solver.hpp"
#include "test_support.hpp"

using namespace svsnltv;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ColorImage natural_crop() { return load_image(testsupport::data_dir() / "astronaut_patch64.ppm"); }

// 32x32, four flat color blocks.
ColorImage block_fixture() {
  const double colors[4][3] = {{0.8, 0.2, 0.2}, {0.2, 0.7, 0.3}, {0.2, 0.3, 0.8}, {0.9, 0.8, 0.2}};
  ColorImage img(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const int b = (y / 16) * 2 + x / 16;
      for (int c = 0; c < 3; ++c) img.plane(c)(y, x) = colors[b][c];
    }
  }
  return img;
}

// --- 1 ------------------------------------------------------------------------

Outcome operator_identities() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> side(4, 16);
  double worst_adj = 0.0, worst_sum = 0.0, worst_lap = 0.0;
  for (int t = 0; t < 120; ++t) {
    const int h = side(rng), w = side(rng);
    NonlocalGraph g = t % 2 ? testsupport::random_graph(h, w, 6, rng) : [&] {
      PatchParams p;
      p.patch_radius = 1;
      p.search_radius = 3;
      p.neighbor_count = 6;
      p.h0 = 0.3;
      return build_graph(testsupport::random_image(std::max(h, 3), std::max(w, 3), rng), p);
    }();
    const std::size_t n = g.pixel_count();
    for (Channel ch : {Channel::saturation, Channel::value}) {
      const auto u = testsupport::random_vector(n, rng);
      EdgeField p(g);
      p.values = testsupport::random_vector(g.edge_count(), rng);
      const double lhs = nl_inner(nl_gradient(u, g, ch), p);
      const auto div = nl_divergence(p, g, ch);
      double rhs = 0.0, total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        rhs += u[i] * div[i];
        total += div[i];
      }
      worst_adj = std::max(worst_adj, std::abs(lhs + rhs) / (1.0 + std::abs(lhs)));
      worst_sum = std::max(worst_sum, std::abs(total));
      const auto lap = nl_laplacian(u, g, ch);
      const auto comp = nl_divergence(nl_gradient(u, g, ch), g, ch);
      for (std::size_t i = 0; i < n; ++i) worst_lap = std::max(worst_lap, std::abs(lap[i] - comp[i]));
    }
  }
  return {worst_adj <= 1e-10 && worst_sum <= 1e-10 && worst_lap <= 1e-12,
          fmt("120 graphs; adjointness %.2e, divergence sum %.2e, Laplacian %.2e", worst_adj, worst_sum, worst_lap)};
}

// --- 2 ------------------------------------------------------------------------

Outcome functional_equivalence() {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> side(4, 16);
  std::uniform_real_distribution<double> mud(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int h = side(rng), w = side(rng);
    const NonlocalGraph g = testsupport::random_graph(h, w, 6, rng);
    const ColorImage u = testsupport::random_image(h, w, rng);
    const double mu = mud(rng);
    const double a = svs_nltv(u, g, mu), b = svs_nltv_qform(u, g, mu);
    worst = std::max(worst, std::abs(a - b) / std::abs(a));
  }
  return {worst <= 1e-10, fmt("100 instances; max relative difference %.2e", worst)};
}

// --- 3 ------------------------------------------------------------------------

Outcome transform_round_trip() {
  std::mt19937_64 rng(1003);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const ColorImage img = testsupport::random_image(16, 16, rng);
    worst = std::max(worst, testsupport::max_abs_diff(sv_to_rgb(rgb_to_sv(img)), img));
  }
  const auto& p = TransformMatrix::rows();
  double ortho = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += p[i][k] * p[j][k];
      ortho = std::max(ortho, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return {worst <= 1e-12 && ortho <= 1e-15, fmt("round trip %.2e, |P P^T - I| %.2e", worst, ortho)};
}

// --- 4 ------------------------------------------------------------------------

template <class F>
double grid_argmin(F f, double lo, double hi, double h) {
  double best = 0.0, best_val = std::numeric_limits<double>::infinity();
  for (long k = static_cast<long>(std::floor(lo / h)); k <= static_cast<long>(std::ceil(hi / h)); ++k) {
    const double y = static_cast<double>(k) * h;
    const double v = f(y);
    if (v < best_val) {
      best_val = v;
      best = y;
    }
  }
  return best;
}

Outcome proximal_oracles() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> xd(-2.0, 2.0), td(0.0, 1.0);
  const double h = 1e-4;
  const double delta = 0.45, lambda = 1.0;
  double worst_shrink = 0.0, worst_p = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double x = xd(rng), t = td(rng);
    const double ys = grid_argmin([&](double z) { return 0.5 * (z - x) * (z - x) + t * std::abs(z); }, x - t - 0.01,
                                  x + t + 0.01, h);
    worst_shrink = std::max(worst_shrink, std::abs(shrink(x, t) - ys));
    const double yp = grid_argmin(
        [&](double z) { return 0.5 * lambda * z * z + (z - x) * (z - x) / (2.0 * delta); }, x - 0.01 - std::abs(x),
        x + 0.01 + std::abs(x), h);
    const double p = p_update_l2(ColorImage(1, 1, x), delta, lambda).plane(0)[0];
    worst_p = std::max(worst_p, std::abs(p - yp));
  }
  return {worst_shrink <= h && worst_p <= h,
          fmt("10^4 pairs; shrink %.2e, p_update_l2 %.2e (grid %.0e)", worst_shrink, worst_p, h)};
}

// --- 5 ------------------------------------------------------------------------

Raster spatial(const Raster& u, const BlurKernel& k, bool adjoint) {
  const int h = u.height(), w = u.width(), s = adjoint ? 1 : -1;
  Raster out(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -k.radius_y(); dy <= k.radius_y(); ++dy) {
        for (int dx = -k.radius_x(); dx <= k.radius_x(); ++dx) {
          acc += k.at(dy, dx) * u(((y + s * dy) % h + h) % h, ((x + s * dx) % w + w) % w);
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

Outcome w_update_residual() {
  std::mt19937_64 rng(1005);
  const double delta = 0.45;
  double worst = 0.0;
  int count = 0;
  for (int t = 0; t < 24; ++t) {
    const bool gauss = t % 2 == 0;
    // The 11x11 Gaussian support needs at least 11 pixels per side.
    std::uniform_int_distribution<int> side(gauss ? 11 : 8, 32);
    const BlurKernel k = gauss ? gaussian_kernel(1.5) : motion_kernel(3, 45.0);
    const int h = side(rng), w = side(rng);
    const ColorImage u = testsupport::random_image(h, w, rng);
    const ColorImage p = testsupport::random_image(h, w, rng, -0.3, 0.3);
    const ColorImage f = testsupport::random_image(h, w, rng);
    const auto [v, q] = w_update(u, p, f, k, delta);
    for (int c = 0; c < 3; ++c) {
      const Raster ktkv = spatial(spatial(v.plane(c), k, false), k, true);
      std::vector<double> pf(u.pixel_count());
      for (std::size_t i = 0; i < pf.size(); ++i) pf[i] = p.plane(c)[i] + f.plane(c)[i];
      const Raster ktpf = spatial(Raster(h, w, pf), k, true);
      double r2 = 0.0, b2 = 0.0;
      for (std::size_t i = 0; i < pf.size(); ++i) {
        const double rhs = (delta + 1.0) * u.plane(c)[i] + delta * ktpf[i];
        const double lhs = delta * ktkv[i] + (delta + 1.0) * v.plane(c)[i];
        r2 += (lhs - rhs) * (lhs - rhs);
        b2 += rhs * rhs;
      }
      worst = std::max(worst, std::sqrt(r2 / b2));
      ++count;
    }
  }
  return {worst <= 1e-8, fmt("%d channel solves; max relative residual %.2e", count, worst)};
}

// --- 6 ------------------------------------------------------------------------

Outcome convergence_guard() {
  const double id_norm = estimate_spectral_norm(BlurKernel::identity(), 16, 16);
  const ColorImage f(16, 16, 0.5);
  const NonlocalGraph g = build_graph(f, PatchParams{});
  auto refused = [&](const BlurKernel& k, double delta) {
    SolverConfig cfg;
    cfg.delta = delta;
    cfg.outer_max = 1;
    try {
      solve(f, k, g, cfg, Fidelity::l2);
    } catch (const SpectralGuardError&) {
      return true;
    }
    return false;
  };
  const BlurKernel gk = gaussian_kernel(1.5);
  const double gnorm = estimate_spectral_norm(gk, 16, 16);
  const bool ok = id_norm == 2.0 && refused(BlurKernel::identity(), 0.5) && refused(BlurKernel::identity(), 1.0) &&
                  refused(gk, 1.0 / gnorm) && !refused(gk, 0.999 / gnorm) && !refused(BlurKernel::identity(), 0.45);
  return {ok, fmt("norm(identity) = %.17g; delta >= 1/norm refused, below accepted", id_norm)};
}

// --- 7 ------------------------------------------------------------------------

Outcome energy_behavior() {
  const ColorImage clean = block_fixture();
  const double sigma = 30.0 / 255.0;
  const ColorImage f = add_gaussian_noise(clean, {NoiseKind::gaussian, sigma, 7});
  PatchParams pp;
  pp.h0 = sigma;
  const NonlocalGraph g = build_graph(f, pp);
  SolverConfig cfg;
  cfg.alpha = 0.05;
  cfg.outer_max = 200;
  const RestoreResult r = solve(f, BlurKernel::identity(), g, cfg, Fidelity::l2);
  const auto& tr = r.objective_trace;
  int violations = 0, first = -1;
  double worst = 0.0;
  for (std::size_t k = 2; k < tr.size(); ++k) {
    // tr[k] is iteration k+1; compare iterations from 3 on with their predecessor.
    const double rise = (tr[k] - tr[k - 1]) / std::abs(tr[k - 1]);
    if (rise > 1e-6) {
      ++violations;
      if (first < 0) first = static_cast<int>(k) + 1;
      worst = std::max(worst, rise);
    }
  }
  const bool converged = r.final_rel_err <= 1e-6 && r.iterations <= 200;
  return {violations == 0 && converged,
          fmt("monotone after iter 2: %s (%d rises, first at iter %d, max %.2e relative); "
              "rel_err %.2e after %d iterations; PSNR %.2f -> %.2f dB",
              violations == 0 ? "yes" : "no", violations, first, worst, r.final_rel_err, r.iterations,
              psnr(f, clean), psnr(r.restored, clean))};
}

// --- 8, 9 ---------------------------------------------------------------------

struct SweepBest {
  double psnr = -std::numeric_limits<double>::infinity();
  double alpha = 0.0;
};

SweepBest best_over(const ColorImage& f, const ColorImage& clean, const std::vector<double>& alphas, Prior prior,
                    Fidelity fid, const PatchParams& pp) {
  SolverConfig cfg;
  cfg.outer_max = 300;
  cfg.graph_refresh = 10;
  const NonlocalGraph g = build_graph(f, pp);
  const auto g3 = build_channel_graphs(f, pp);
  SweepBest best;
  for (double a : alphas) {
    cfg.alpha = a;
    std::optional<BregmanSolver> s;
    if (prior == Prior::svs_nltv) {
      s.emplace(f, BlurKernel::identity(), g, cfg, fid);
    } else {
      s.emplace(f, BlurKernel::identity(), g3, cfg, fid);
    }
    s->set_refresh_params(pp);
    const double p = psnr(s->run().restored, clean);
    if (p > best.psnr) best = {p, a};
  }
  return best;
}

std::vector<double> log_grid(double lo, int n) {
  std::vector<double> a;
  for (int i = 0; i < n; ++i) a.push_back(lo * std::pow(std::sqrt(2.0), i));
  return a;
}

Outcome gaussian_quality(int level) {
  const ColorImage clean = natural_crop();
  const double sigma = level / 255.0;
  const ColorImage f = add_gaussian_noise(clean, {NoiseKind::gaussian, sigma, 11});
  PatchParams pp;
  pp.h0 = sigma;
  const auto alphas = log_grid(0.008, 11);
  const SweepBest svs = best_over(f, clean, alphas, Prior::svs_nltv, Fidelity::l2, pp);
  const SweepBest base = best_over(f, clean, alphas, Prior::nltv, Fidelity::l2, pp);
  const double input = psnr(f, clean);
  bool ok = svs.psnr > base.psnr;
  if (level == 30) ok = ok && svs.psnr - input >= 4.0;
  return {ok, fmt("sigma %d/255: input %.2f dB, SVS-NLTV %.2f dB (alpha %.4f, %+.2f dB), NLTV %.2f dB (alpha %.4f)",
                  level, input, svs.psnr, svs.alpha, svs.psnr - input, base.psnr, base.alpha)};
}

Outcome poisson_quality() {
  const ColorImage clean = natural_crop();
  const ColorImage f = add_poisson_noise(clean, {NoiseKind::poisson, 0.3, 11});
  PatchParams pp;
  pp.h0 = 0.15;
  const SweepBest svs = best_over(f, clean, log_grid(0.01, 14), Prior::svs_nltv, Fidelity::l1, pp);
  const double input = psnr(f, clean);
  return {svs.psnr - input >= 3.0, fmt("d 0.3: input %.2f dB, SVS-NLTV-L1 %.2f dB (alpha %.4f, %+.2f dB)", input,
                                       svs.psnr, svs.alpha, svs.psnr - input)};
}

// --- 10 -----------------------------------------------------------------------

Outcome metric_sanity() {
  std::mt19937_64 rng(1010);
  const ColorImage x = testsupport::random_image(32, 32, rng);
  const MetricsReport self = evaluate(x, x);
  const bool identity = std::isinf(self.psnr) && self.psnr > 0 && self.ssim == 1.0 && self.qssim == 1.0 &&
                        self.scielab_count == 0;

  double closed = 0.0;
  for (auto [a, b] : {std::pair{0.2, 0.7}, std::pair{0.5, 0.5}, std::pair{1.0, 0.0}}) {
    const double expect = (2 * a * b + 1e-4) / (a * a + b * b + 1e-4);
    closed = std::max(closed, std::abs(ssim(Raster(16, 16, a), Raster(16, 16, b)) - expect));
  }

  double collapse = 0.0;
  for (int t = 0; t < 5; ++t) {
    const auto pa = testsupport::random_vector(24 * 24, rng, 0.0, 1.0);
    auto pb = pa;
    std::normal_distribution<double> n(0.0, 0.1);
    for (double& v : pb) v += n(rng);
    const Raster ra(24, 24, pa), rb(24, 24, pb);
    const ColorImage ga(std::array<Raster, 3>{ra, ra, ra}), gb(std::array<Raster, 3>{rb, rb, rb});
    collapse = std::max(collapse, std::abs(qssim(ga, gb) - ssim(ra, rb)));
  }

  ColorImage y = x;
  std::normal_distribution<double> n(0.0, 0.15);
  for (int c = 0; c < 3; ++c) {
    for (double& v : y.plane(c).values()) v = std::clamp(v + n(rng), 0.0, 1.0);
  }
  bool monotone = true;
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (double thr = 0.0; thr <= 60.0; thr += 1.0) {
    const std::size_t c = scielab_count(x, y, {23.0, thr});
    monotone = monotone && c <= prev;
    prev = c;
  }
  return {identity && closed <= 1e-9 && collapse <= 1e-9 && monotone,
          fmt("evaluate(x,x) = (%s, %.3g, %.3g, %zu); SSIM closed form %.2e; QSSIM gray %.2e; S-CIELAB monotone %s",
              app::csv_number(self.psnr).c_str(), self.ssim, self.qssim, self.scielab_count, closed, collapse,
              monotone ? "yes" : "no")};
}

// --- 11 -----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SVSNLTV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  testsupport::TempDir dir("accept");
  const std::string clean = (testsupport::data_dir() / "astronaut_patch64.ppm").string();
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const std::string deg = " --blur gaussian:1.5 --noise gaussian --sigma 30/255 --seed 7";
  const std::string res = " --alpha 0.05 --sigma 30/255 --noise gaussian --outer-max 40 --jobs 1";
  int rc = 0;
  rc |= run_cli("degrade " + clean + " " + p("d1.png") + deg);
  rc |= run_cli("degrade " + clean + " " + p("d2.png") + deg);
  rc |= run_cli("restore " + p("d1.png") + " " + p("r1.png") + " --trace " + p("t1.csv") + res);
  rc |= run_cli("restore " + p("d1.png") + " " + p("r2.png") + " --trace " + p("t2.csv") + res);
  const bool same_d = slurp(p("d1.png")) == slurp(p("d2.png"));
  const bool same_r = slurp(p("r1.png")) == slurp(p("r2.png"));
  const bool same_t = slurp(p("t1.csv")) == slurp(p("t2.csv"));
  return {rc == 0 && same_d && same_r && same_t && !slurp(p("r1.png")).empty(),
          fmt("exit %d; degrade identical %s, restore image identical %s, trace identical %s", rc,
              same_d ? "yes" : "no", same_r ? "yes" : "no", same_t ? "yes" : "no")};
}

struct Criterion {
  std::string title;
  double limit_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Criterion>> criteria{
      {"1", {"nonlocal operator identities", 5, operator_identities}},
      {"2", {"edge-wise vs coefficient-form functional", 2, functional_equivalence}},
      {"3", {"rgb/sv round trip and orthogonality", 0, transform_round_trip}},
      {"4", {"proximal oracles", 0, proximal_oracles}},
      {"5", {"w-step residual", 0, w_update_residual}},
      {"6", {"convergence guard", 0, convergence_guard}},
      {"7", {"energy behavior on the block fixture", 60, energy_behavior}},
      {"8a", {"gaussian noise quality, sigma 30/255", 600, [] { return gaussian_quality(30); }}},
      {"8b", {"gaussian noise quality, sigma 50/255", 600, [] { return gaussian_quality(50); }}},
      {"8c", {"gaussian noise quality, sigma 70/255", 600, [] { return gaussian_quality(70); }}},
      {"9", {"poisson noise quality, d 0.3", 600, poisson_quality}},
      {"10", {"metric sanity", 0, metric_sanity}},
      {"11", {"determinism of degrade and restore", 0, determinism}},
  };

  std::vector<const std::pair<std::string, Criterion>*> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    const auto it = std::find_if(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == a; });
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", a.c_str());
      return 2;
    }
    selected.push_back(&*it);
  }
  if (selected.empty()) {
    for (const auto& c : criteria) selected.push_back(&c);
  }

  int failures = 0;
  for (const auto* entry : selected) {
    const Criterion& c = entry->second;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("CRITERION %-3s %s  %s | %s | %.1f s%s\n", entry->first.c_str(), pass ? "PASS" : "FAIL",
                c.title.c_str(), o.detail.c_str(), secs, in_time ? "" : fmt(" (limit %.0f s exceeded)", c.limit_s).c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
