#include "svsnltv/app/commands.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "svsnltv/graph.hpp"
#include "svsnltv/image_io.hpp"
#include "svsnltv/kernel.hpp"
#include "svsnltv/noise.hpp"

namespace svsnltv::app {

namespace {

constexpr const char* kSsimNote = "# ssim is the mean of the per-channel R, G, B scores\n";

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SpectralGuardError*>(&e) != nullptr) return exit_numeric;
  if (dynamic_cast<const DivergenceError*>(&e) != nullptr) return exit_numeric;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return exit_io;
  if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) return exit_usage;
  return 1;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Graphs {
  std::optional<NonlocalGraph> svs;
  std::optional<std::array<NonlocalGraph, 3>> rgb;
};

NonlocalGraph cached_graph(const std::filesystem::path& cache, int h, int w,
                           const std::function<NonlocalGraph()>& build) {
  if (cache.empty()) return build();
  if (std::filesystem::exists(cache)) return load_graph(cache, h, w);
  NonlocalGraph g = build();
  save_graph(g, cache);
  return g;
}

Graphs prepare_graphs(const ColorImage& f, const RunConfig& cfg) {
  const PatchParams pp = cfg.effective_patch();
  const std::filesystem::path cache = cfg.graph_cache;
  Graphs out;
  if (cfg.model == Prior::svs_nltv) {
    out.svs = cached_graph(cache, f.height(), f.width(), [&] { return build_graph(f, pp); });
  } else {
    std::array<NonlocalGraph, 3> g;
    for (int c = 0; c < 3; ++c) {
      std::filesystem::path part = cache;
      if (!part.empty()) part += std::string(".") + "rgb"[c];
      g[static_cast<std::size_t>(c)] =
          cached_graph(part, f.height(), f.width(), [&] { return build_gray_graph(f.plane(c), pp); });
    }
    out.rgb = std::move(g);
  }
  return out;
}

RestoreResult run_restore(const ColorImage& f, const RunConfig& cfg, const Graphs& graphs, double alpha) {
  SolverConfig sc = cfg.solver;
  sc.alpha = alpha;
  const BlurKernel k = cfg.kernel();
  if (cfg.model == Prior::svs_nltv) {
    BregmanSolver solver(f, k, *graphs.svs, sc, cfg.fidelity);
    solver.set_refresh_params(cfg.effective_patch());
    return solver.run();
  }
  BregmanSolver solver(f, k, *graphs.rgb, sc, cfg.fidelity);
  solver.set_refresh_params(cfg.effective_patch());
  return solver.run();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileAccessError("cannot open " + path.string() + " for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw FileAccessError("write failed: " + path.string());
}

}  // namespace

void cmd_degrade(const std::filesystem::path& input, const std::filesystem::path& output, const RunConfig& cfg) {
  cfg.validate();
  ColorImage img = load_image(input);
  const BlurKernel k = cfg.kernel();
  if (!k.is_identity()) {
    require_kernel_fits(k, img.height(), img.width());
    img = convolve_periodic(img, k, ConvolutionMethod::spatial);
  }
  if (cfg.has_noise()) img = add_noise(img, cfg.noise_spec());
  save_image(img, output);
}

RestoreResult cmd_restore(const std::filesystem::path& input, const std::filesystem::path& output,
                          const std::filesystem::path& trace_csv, const RunConfig& cfg) {
  cfg.validate();
  const ColorImage f = load_image(input);
  const Graphs graphs = prepare_graphs(f, cfg);
  RestoreResult result = run_restore(f, cfg, graphs, cfg.solver.alpha);
  save_image(result.restored, output);

  std::ofstream csv = open_output(trace_csv);
  csv << config_echo(cfg) << "iter,objective,rel_err\n";
  for (const auto& rec : result.history) {
    csv << rec.iter << ',' << csv_number(rec.objective) << ',' << csv_number(rec.rel_err) << '\n';
  }
  finish_output(csv, trace_csv);
  return result;
}

MetricsReport cmd_evaluate(const std::filesystem::path& restored, const std::filesystem::path& reference,
                           const RunConfig& cfg, std::ostream& csv) {
  const ColorImage a = load_image(restored);
  const ColorImage b = load_image(reference);
  require_same_shape(a, b, "evaluate");
  const MetricsReport m = evaluate(a, b);
  csv << config_echo(cfg) << kSsimNote << "restored,reference,psnr,ssim,qssim,scielab_count\n";
  csv << csv_field(restored.string()) << ',' << csv_field(reference.string()) << ',' << csv_number(m.psnr) << ','
      << csv_number(m.ssim) << ',' << csv_number(m.qssim) << ',' << m.scielab_count << '\n';
  return m;
}

std::vector<double> AlphaRange::values() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) throw UsageError("alpha range must be finite");
  if (lo < 0.0) throw UsageError("alpha range must be nonnegative");
  if (hi < lo) throw UsageError("empty alpha range: hi < lo");
  if (hi > lo && !(step > 0.0)) throw UsageError("alpha step must be > 0");
  std::vector<double> out;
  if (hi == lo) return {lo};
  const double slack = 1e-9 * std::max(1.0, std::abs(hi));
  for (std::size_t i = 0;; ++i) {
    const double a = lo + static_cast<double>(i) * step;
    if (a > hi + slack) break;
    out.push_back(std::min(a, hi));
  }
  return out;
}

AlphaRange parse_alpha_range(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string::npos ? std::string::npos : colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  try {
    AlphaRange r;
    if (parts.size() == 1) {
      const double a = parse_real(parts[0]);
      r = {a, a, 1.0};
    } else if (parts.size() == 3) {
      r = {parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2])};
    } else {
      throw UsageError("alpha range must be lo:hi:step or a single value");
    }
    r.values();
    return r;
  } catch (const ConfigError& e) {
    throw UsageError(std::string("bad alpha range: ") + e.what());
  }
}

AlphaRange sqrt_n_alpha_range(std::size_t pixel_count, double step) {
  const double r = std::sqrt(static_cast<double>(pixel_count));
  return {r / 1000.0, r / 10.0, step};
}

SweepResult cmd_sweep(const std::filesystem::path& input, const std::filesystem::path& reference,
                      const RunConfig& cfg, const AlphaRange& range, std::ostream& csv) {
  cfg.validate();
  const std::vector<double> alphas = range.values();
  if (alphas.empty()) throw UsageError("empty alpha range");
  const ColorImage f = load_image(input);
  const ColorImage ref = load_image(reference);
  require_same_shape(f, ref, "sweep");
  const Graphs graphs = prepare_graphs(f, cfg);

  SweepResult result;
  result.rows.resize(alphas.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= alphas.size()) return;
      try {
        const RestoreResult r = run_restore(f, cfg, graphs, alphas[i]);
        // Score what restore would write to disk.
        result.rows[i] = {alphas[i], r.iterations, evaluate(quantize_8bit(r.restored), ref)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(alphas.size());
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(alphas.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].metrics.psnr > result.rows[result.best].metrics.psnr) result.best = i;
  }

  csv << config_echo(cfg) << kSsimNote << "row,alpha,iterations,psnr,ssim,qssim,scielab_count\n";
  auto emit = [&](const char* tag, const SweepRow& r) {
    csv << tag << ',' << csv_number(r.alpha) << ',' << r.iterations << ',' << csv_number(r.metrics.psnr) << ','
        << csv_number(r.metrics.ssim) << ',' << csv_number(r.metrics.qssim) << ',' << r.metrics.scielab_count << '\n';
  };
  for (const auto& r : result.rows) emit("run", r);
  emit("best", result.rows[result.best]);
  return result;
}

}  // namespace svsnltv::app
