// Command-line driver: degrade, restore, evaluate, sweep.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "svsnltv/app/commands.hpp"
#include "svsnltv/app/run_config.hpp"
#include "svsnltv/image_io.hpp"

namespace {

using namespace svsnltv::app;

struct ConfigFlags {
  std::string file;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> direct;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", assignments, "override one config key (key=value), repeatable");
    for (const auto& key : RunConfig::keys()) {
      std::string flag = key;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      cmd->add_option("--" + flag, direct[key], "config key " + key);
    }
  }

  RunConfig resolve(CLI::App* cmd) const {
    RunConfig cfg;
    if (!file.empty()) load_config_file(file, cfg);
    apply_overrides(assignments, cfg);
    for (const auto& key : RunConfig::keys()) {
      std::string flag = key;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      if (cmd->count("--" + flag) > 0) cfg.set(key, direct.at(key));
    }
    cfg.validate();
    return cfg;
  }
};

std::ostream& open_csv(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) throw svsnltv::FileAccessError("cannot open " + path + " for writing");
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Color image restoration with saturation-value similarity nonlocal total variation"};
  app.require_subcommand(1);

  std::string in, out, ref, trace, csv_path, range;
  bool sqrt_n_range = false;
  double step = 0.01;

  ConfigFlags degrade_flags, restore_flags, evaluate_flags, sweep_flags;

  CLI::App* degrade = app.add_subcommand("degrade", "blur and/or add noise to an image");
  degrade->add_option("input", in, "input image (PNG or PPM)")->required();
  degrade->add_option("output", out, "output image (.png or .ppm)")->required();
  degrade_flags.attach(degrade);

  CLI::App* restore = app.add_subcommand("restore", "restore a degraded image");
  restore->add_option("input", in, "degraded image")->required();
  restore->add_option("output", out, "restored image")->required();
  restore->add_option("--trace", trace, "per-iteration CSV (default: <output>.trace.csv)");
  restore_flags.attach(restore);

  CLI::App* evaluate = app.add_subcommand("evaluate", "PSNR, SSIM, QSSIM and S-CIELAB count");
  evaluate->add_option("restored", in, "restored image")->required();
  evaluate->add_option("reference", ref, "reference image")->required();
  evaluate->add_option("--out", csv_path, "CSV output (default: stdout)");
  evaluate_flags.attach(evaluate);

  CLI::App* sweep = app.add_subcommand("sweep", "restore over a range of alpha and keep the best PSNR");
  sweep->add_option("input", in, "degraded image")->required();
  sweep->add_option("reference", ref, "reference image")->required();
  auto* range_opt = sweep->add_option("--range", range, "alpha range lo:hi:step (or one value)");
  auto* sqrt_n_opt = sweep->add_flag("--paper-range", sqrt_n_range, "alpha in [sqrt(N)/1000, sqrt(N)/10]");
  range_opt->excludes(sqrt_n_opt);
  sweep->add_option("--step", step, "step for --paper-range");
  sweep->add_option("--out", csv_path, "CSV output (default: stdout)");
  sweep_flags.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (degrade->parsed()) {
      cmd_degrade(in, out, degrade_flags.resolve(degrade));
    } else if (restore->parsed()) {
      const RunConfig cfg = restore_flags.resolve(restore);
      const std::string trace_path = trace.empty() ? out + ".trace.csv" : trace;
      const auto result = cmd_restore(in, out, trace_path, cfg);
      std::cerr << "restore: " << result.iterations << " iterations, rel_err " << result.final_rel_err << '\n';
    } else if (evaluate->parsed()) {
      const RunConfig cfg = evaluate_flags.resolve(evaluate);
      std::ofstream file;
      std::ostream& os = open_csv(csv_path, file);
      cmd_evaluate(in, ref, cfg, os);
    } else if (sweep->parsed()) {
      const RunConfig cfg = sweep_flags.resolve(sweep);
      if (range.empty() && !sqrt_n_range) throw UsageError("sweep needs --range or --paper-range");
      AlphaRange ar;
      if (sqrt_n_range) {
        const auto img = svsnltv::load_image(in);
        ar = sqrt_n_alpha_range(img.pixel_count(), step);
      } else {
        ar = parse_alpha_range(range);
      }
      std::ofstream file;
      std::ostream& os = open_csv(csv_path, file);
      cmd_sweep(in, ref, cfg, ar, os);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return exit_ok;
}
