#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "svsnltv/graph.hpp"
#include "svsnltv/kernel.hpp"
#include "svsnltv/noise.hpp"
#include "svsnltv/regularizer.hpp"
#include "svsnltv/solver.hpp"

namespace svsnltv::app {

/// Bad key, bad value or malformed config line.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Parses a real number; "a/b" is accepted as a quotient (e.g. "30/255").
double parse_real(const std::string& text);

/// Everything a CLI run can be configured with. Serialized as flat
/// key=value pairs; see keys() for the full list.
struct RunConfig {
  SolverConfig solver;
  PatchParams patch;
  /// When true the patch filtering parameter follows the Gaussian noise
  /// level (h0 = sigma), falling back to patch.h0 otherwise.
  bool h0_auto = true;

  std::string noise = "none";  ///< none | gaussian | poisson
  double sigma = 0.0;          ///< gaussian standard deviation
  double poisson_d = 0.3;      ///< poisson scale d
  std::uint64_t seed = 0;

  std::string blur = "none";   ///< none | gaussian:<sigma> | motion:<length>:<angle>
  Fidelity fidelity = Fidelity::l2;
  Prior model = Prior::svs_nltv;
  std::string graph_cache;     ///< NLG1 file; empty disables caching
  int jobs = 1;                ///< parallel restorations in sweep

  /// All recognized keys in canonical order.
  static const std::vector<std::string>& keys();

  /// Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  /// Fully resolved key=value pairs in canonical order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  BlurKernel kernel() const;
  /// Throws ConfigError when noise is "none".
  NoiseSpec noise_spec() const;
  bool has_noise() const { return noise != "none"; }
  /// Patch parameters with the automatic h0 resolved.
  PatchParams effective_patch() const;

  /// Validates every field, including the blur description.
  void validate() const;
};

/// Reads "key = value" lines; '#' starts a comment, blank lines are skipped.
void load_config_file(const std::filesystem::path& path, RunConfig& cfg);

/// Applies "key=value" override strings in order.
void apply_overrides(const std::vector<std::string>& assignments, RunConfig& cfg);

/// The resolved config as '#'-prefixed lines, one pair per line.
std::string config_echo(const RunConfig& cfg);

}  // namespace svsnltv::app
