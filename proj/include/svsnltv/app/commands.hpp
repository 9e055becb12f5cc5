#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "svsnltv/app/run_config.hpp"
#include "svsnltv/metrics.hpp"
#include "svsnltv/solver.hpp"

namespace svsnltv::app {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 2,
  exit_io = 3,
  exit_numeric = 4,
};

/// Invalid command arguments (bad range, missing noise model, ...).
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Maps an exception thrown by the commands to its exit code.
int exit_code_for(const std::exception& e);

/// Blur (if configured) then noise (if configured), written to `output`.
void cmd_degrade(const std::filesystem::path& input, const std::filesystem::path& output, const RunConfig& cfg);

/// Restores `input`, writes the image and a trace CSV with columns
/// iter,objective,rel_err.
RestoreResult cmd_restore(const std::filesystem::path& input, const std::filesystem::path& output,
                          const std::filesystem::path& trace_csv, const RunConfig& cfg);

/// Writes the header and one row of metrics to `csv`.
MetricsReport cmd_evaluate(const std::filesystem::path& restored, const std::filesystem::path& reference,
                           const RunConfig& cfg, std::ostream& csv);

struct AlphaRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.01;

  /// lo, lo+step, ... up to hi (inclusive within a relative 1e-9 slack).
  std::vector<double> values() const;
};

/// Parses "lo:hi:step" or a single value "a".
AlphaRange parse_alpha_range(const std::string& text);

/// [sqrt(N)/1000, sqrt(N)/10] for an image of N pixels.
AlphaRange sqrt_n_alpha_range(std::size_t pixel_count, double step);

struct SweepRow {
  double alpha;
  int iterations;
  MetricsReport metrics;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t best = 0;  ///< index of the highest-PSNR row
};

/// Restores `input` once per alpha with the graph built (or loaded) once,
/// evaluates each result against `reference` and writes one CSV row per
/// alpha plus a final best-PSNR row.
SweepResult cmd_sweep(const std::filesystem::path& input, const std::filesystem::path& reference,
                      const RunConfig& cfg, const AlphaRange& range, std::ostream& csv);

/// Formats a metric value for CSV output; infinities print as "inf".
std::string csv_number(double v);

}  // namespace svsnltv::app
