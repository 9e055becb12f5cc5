#include "svsnltv/app/run_config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "svsnltv/image_io.hpp"

namespace svsnltv::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_plain(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != last) throw ConfigError("not a number: '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ConfigError("not an integer: '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& text) {
  const long long v = parse_integer(text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError("integer out of range: '" + text + "'");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_plain(text);
  const double num = parse_plain(text.substr(0, slash));
  const double den = parse_plain(text.substr(slash + 1));
  if (den == 0.0) throw ConfigError("division by zero in '" + text + "'");
  return num / den;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "alpha",         "mu",            "lambda",         "delta",        "beta",
      "outer_max",     "inner_max",     "gs_sweeps",      "tol",          "clamp_each_iter",
      "clamp_output",  "gs_order",      "graph_refresh",  "patch_radius", "search_radius",
      "neighbor_count", "kernel_sigma", "h0",             "noise",        "sigma",
      "d",             "seed",          "blur",           "fidelity",     "model",
      "graph_cache",   "jobs",
  };
  return k;
}

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "alpha") solver.alpha = parse_real(value);
  else if (key == "mu") solver.mu = parse_real(value);
  else if (key == "lambda") solver.lambda = parse_real(value);
  else if (key == "delta") solver.delta = parse_real(value);
  else if (key == "beta") solver.beta = parse_real(value);
  else if (key == "outer_max") solver.outer_max = parse_int(value);
  else if (key == "inner_max") solver.inner_max = parse_int(value);
  else if (key == "gs_sweeps") solver.gs_sweeps = parse_int(value);
  else if (key == "tol") solver.tol = parse_real(value);
  else if (key == "clamp_each_iter") solver.clamp_each_iter = parse_bool(value);
  else if (key == "clamp_output") solver.clamp_output = parse_bool(value);
  else if (key == "gs_order") {
    if (value == "raster") solver.gs_order = GaussSeidelOrder::raster;
    else if (value == "colored") solver.gs_order = GaussSeidelOrder::colored;
    else throw ConfigError("gs_order must be raster or colored");
  } else if (key == "graph_refresh") solver.graph_refresh = parse_int(value);
  else if (key == "patch_radius") patch.patch_radius = parse_int(value);
  else if (key == "search_radius") patch.search_radius = parse_int(value);
  else if (key == "neighbor_count") patch.neighbor_count = parse_int(value);
  else if (key == "kernel_sigma") patch.kernel_sigma = parse_real(value);
  else if (key == "h0") {
    if (value == "auto") {
      h0_auto = true;
    } else {
      patch.h0 = parse_real(value);
      h0_auto = false;
    }
  } else if (key == "noise") {
    if (value != "none" && value != "gaussian" && value != "poisson") {
      throw ConfigError("noise must be none, gaussian or poisson");
    }
    noise = value;
  } else if (key == "sigma") sigma = parse_real(value);
  else if (key == "d") poisson_d = parse_real(value);
  else if (key == "seed") {
    const long long s = parse_integer(value);
    if (s < 0) throw ConfigError("seed must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "blur") {
    const std::string previous = blur;
    blur = value;
    try {
      (void)kernel();
    } catch (...) {
      blur = previous;
      throw;
    }
  } else if (key == "fidelity") {
    if (value == "l2") fidelity = Fidelity::l2;
    else if (value == "l1") fidelity = Fidelity::l1;
    else throw ConfigError("fidelity must be l2 or l1");
  } else if (key == "model") {
    if (value == "svs") model = Prior::svs_nltv;
    else if (value == "nltv") model = Prior::nltv;
    else throw ConfigError("model must be svs or nltv");
  } else if (key == "graph_cache") graph_cache = value;
  else if (key == "jobs") jobs = parse_int(value);
  else throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "alpha") return format_real(solver.alpha);
  if (key == "mu") return format_real(solver.mu);
  if (key == "lambda") return format_real(solver.lambda);
  if (key == "delta") return format_real(solver.delta);
  if (key == "beta") return format_real(solver.beta);
  if (key == "outer_max") return std::to_string(solver.outer_max);
  if (key == "inner_max") return std::to_string(solver.inner_max);
  if (key == "gs_sweeps") return std::to_string(solver.gs_sweeps);
  if (key == "tol") return format_real(solver.tol);
  if (key == "clamp_each_iter") return solver.clamp_each_iter ? "true" : "false";
  if (key == "clamp_output") return solver.clamp_output ? "true" : "false";
  if (key == "gs_order") return solver.gs_order == GaussSeidelOrder::raster ? "raster" : "colored";
  if (key == "graph_refresh") return std::to_string(solver.graph_refresh);
  if (key == "patch_radius") return std::to_string(patch.patch_radius);
  if (key == "search_radius") return std::to_string(patch.search_radius);
  if (key == "neighbor_count") return std::to_string(patch.neighbor_count);
  if (key == "kernel_sigma") return format_real(patch.kernel_sigma);
  if (key == "h0") return format_real(effective_patch().h0);
  if (key == "noise") return noise;
  if (key == "sigma") return format_real(sigma);
  if (key == "d") return format_real(poisson_d);
  if (key == "seed") return std::to_string(seed);
  if (key == "blur") return blur;
  if (key == "fidelity") return fidelity == Fidelity::l2 ? "l2" : "l1";
  if (key == "model") return model == Prior::svs_nltv ? "svs" : "nltv";
  if (key == "graph_cache") return graph_cache;
  if (key == "jobs") return std::to_string(jobs);
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k, get(k));
  return out;
}

BlurKernel RunConfig::kernel() const {
  const auto parts = split(blur, ':');
  if (blur == "none") return BlurKernel::identity();
  try {
    if (parts.size() == 2 && parts[0] == "gaussian") {
      const double s = parse_real(parts[1]);
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("gaussian blur sigma must be > 0");
      return gaussian_kernel(s);
    }
    if (parts.size() == 3 && parts[0] == "motion") {
      const int len = parse_int(parts[1]);
      const double angle = parse_real(parts[2]);
      if (len < 1) throw ConfigError("motion blur length must be >= 1");
      return motion_kernel(len, angle);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid blur '") + blur + "': " + e.what());
  }
  throw ConfigError("blur must be none, gaussian:<sigma> or motion:<length>:<angle>");
}

NoiseSpec RunConfig::noise_spec() const {
  if (noise == "gaussian") return {NoiseKind::gaussian, sigma, seed};
  if (noise == "poisson") return {NoiseKind::poisson, poisson_d, seed};
  throw ConfigError("no noise model configured");
}

PatchParams RunConfig::effective_patch() const {
  PatchParams p = patch;
  if (h0_auto && noise == "gaussian" && sigma > 0.0) p.h0 = sigma;
  return p;
}

void RunConfig::validate() const {
  try {
    solver.validate();
    effective_patch().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (noise == "gaussian" && !(sigma > 0.0)) throw ConfigError("sigma must be > 0 for gaussian noise");
  if (noise == "poisson" && !(poisson_d > 0.0)) throw ConfigError("d must be > 0 for poisson noise");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  (void)kernel();
}

void load_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw FileAccessError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      cfg.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_overrides(const std::vector<std::string>& assignments, RunConfig& cfg) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + a + "'");
    cfg.set(a.substr(0, eq), a.substr(eq + 1));
  }
}

std::string config_echo(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries()) out += "# " + k + "=" + v + "\n";
  return out;
}

}  // namespace svsnltv::app
