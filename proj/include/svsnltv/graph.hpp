#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "svsnltv/image.hpp"

namespace svsnltv {

/// Patch geometry and similarity scale for the weight graph.
struct PatchParams {
  int patch_radius = 2;      ///< patch is (2r+1)^2 pixels
  int search_radius = 5;     ///< candidate window is (2s+1)^2 pixels
  int neighbor_count = 10;   ///< m, neighbors retained per pixel before symmetrization
  double kernel_sigma = 1.0; ///< std of the Gaussian patch window, in pixels
  double h0 = 0.1;           ///< filtering parameter, intensity units

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;
};

/// Which weight family an operator uses: omega_s for the saturation pair,
/// omega_v for the value channel.
enum class Channel { saturation, value };

/// Symmetric sparse similarity graph over the pixels of an H x W image.
///
/// Adjacency is stored in compressed rows sorted by neighbor index. Every
/// directed edge (i,j) has a mirror (j,i) with bit-identical weights, and
/// reverse_edge() maps one onto the other.
class NonlocalGraph {
public:
  struct Edge {
    std::uint32_t from;
    std::uint32_t to;
    double w_s;
    double w_v;
  };

  NonlocalGraph() = default;

  /// Builds from an arbitrary directed edge list. Mirrors are added for edges
  /// that lack one; duplicates must agree on weights. Throws on self-loops,
  /// out-of-range indices or weights outside (0,1].
  NonlocalGraph(int height, int width, std::vector<Edge> edges);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return neighbors_.size(); }

  std::size_t row_begin(std::size_t i) const { return offsets_[i]; }
  std::size_t row_end(std::size_t i) const { return offsets_[i + 1]; }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  std::uint32_t neighbor(std::size_t e) const { return neighbors_[e]; }
  std::size_t reverse_edge(std::size_t e) const { return reverse_[e]; }

  double weight(std::size_t e, Channel ch) const {
    return ch == Channel::saturation ? w_s_[e] : w_v_[e];
  }
  double sqrt_weight(std::size_t e, Channel ch) const {
    return ch == Channel::saturation ? sqrt_w_s_[e] : sqrt_w_v_[e];
  }

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const std::uint32_t> neighbors() const { return neighbors_; }

  /// Checks symmetry, absence of self-loops and the weight range.
  bool is_valid() const;

private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> neighbors_;
  std::vector<std::size_t> reverse_;
  std::vector<double> w_s_;
  std::vector<double> w_v_;
  std::vector<double> sqrt_w_s_;
  std::vector<double> sqrt_w_v_;
};

/// Builds the saturation/value similarity graph of a color image. Patch
/// distances are Gaussian-windowed squared differences of the SV
/// coefficients, with mirror extension at the borders.
NonlocalGraph build_graph(const ColorImage& f, const PatchParams& params);

/// Single-channel similarity graph (both weight families equal), used by the
/// per-channel NLTV baseline.
NonlocalGraph build_gray_graph(const Raster& channel, const PatchParams& params);

/// One per-RGB-channel graph for the NLTV baseline.
std::array<NonlocalGraph, 3> build_channel_graphs(const ColorImage& f, const PatchParams& params);

/// Normalized (2r+1)^2 Gaussian patch window, row-major.
std::vector<double> patch_window(int patch_radius, double sigma);

/// A value per directed edge, aligned with the graph's edge order.
struct EdgeField {
  std::vector<double> values;

  EdgeField() = default;
  explicit EdgeField(std::size_t edges, double fill = 0.0) : values(edges, fill) {}
  explicit EdgeField(const NonlocalGraph& g, double fill = 0.0) : values(g.edge_count(), fill) {}
};

/// Edge field for the saturation pair.
struct PairField {
  EdgeField first;
  EdgeField second;
};

/// (grad u)(i,j) = (u(j) - u(i)) sqrt(w(i,j)).
EdgeField nl_gradient(std::span<const double> u, const NonlocalGraph& g, Channel ch);
PairField nl_gradient(std::span<const double> q1, std::span<const double> q2, const NonlocalGraph& g);

/// (div p)(i) = sum_j (p(i,j) - p(j,i)) sqrt(w(i,j)); the negative adjoint of nl_gradient.
std::vector<double> nl_divergence(const EdgeField& p, const NonlocalGraph& g, Channel ch);
std::array<std::vector<double>, 2> nl_divergence(const PairField& p, const NonlocalGraph& g);

/// (Lap u)(i) = 2 sum_j (u(j) - u(i)) w(i,j).
std::vector<double> nl_laplacian(std::span<const double> u, const NonlocalGraph& g, Channel ch);

double nl_inner(const EdgeField& a, const EdgeField& b);
double nl_inner(const PairField& a, const PairField& b);

/// Writes the graph in the "NLG1" cache format.
void save_graph(const NonlocalGraph& g, const std::filesystem::path& path);

/// Reads an "NLG1" cache file; the stored pixel count must equal height*width.
/// I/O and format problems throw the IoError family from image_io.hpp.
NonlocalGraph load_graph(const std::filesystem::path& path, int height, int width);

}  // namespace svsnltv
