#include "svsnltv/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "svsnltv/image_io.hpp"

namespace svsnltv {

void PatchParams::validate() const {
  if (patch_radius < 0) throw std::invalid_argument("patch_radius must be >= 0");
  if (search_radius < 1) throw std::invalid_argument("search_radius must be >= 1");
  if (neighbor_count < 1) throw std::invalid_argument("neighbor_count must be >= 1");
  const long window = (2L * search_radius + 1) * (2L * search_radius + 1);
  if (neighbor_count > window - 1) {
    throw std::invalid_argument("neighbor_count exceeds the number of candidates in the search window");
  }
  if (!(kernel_sigma > 0.0)) throw std::invalid_argument("kernel_sigma must be > 0");
  if (!(h0 > 0.0)) throw std::invalid_argument("h0 must be > 0");
}

// --- NonlocalGraph -----------------------------------------------------------

NonlocalGraph::NonlocalGraph(int height, int width, std::vector<Edge> edges)
    : height_(height), width_(width) {
  if (height < 1 || width < 1) throw DimensionError("graph dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (n > std::numeric_limits<std::uint32_t>::max()) throw DimensionError("image too large for graph");

  const std::size_t given = edges.size();
  edges.reserve(2 * given);
  for (std::size_t k = 0; k < given; ++k) {
    const Edge e = edges[k];
    if (e.from >= n || e.to >= n) throw std::invalid_argument("graph edge index out of range");
    if (e.from == e.to) throw std::invalid_argument("graph self-loops are not allowed");
    for (double w : {e.w_s, e.w_v}) {
      if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("graph weights must lie in (0,1]");
    }
    edges.push_back({e.to, e.from, e.w_s, e.w_v});
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  std::vector<Edge> unique;
  unique.reserve(edges.size());
  for (const Edge& e : edges) {
    if (!unique.empty() && unique.back().from == e.from && unique.back().to == e.to) {
      if (unique.back().w_s != e.w_s || unique.back().w_v != e.w_v) {
        throw std::invalid_argument("conflicting weights for a repeated graph edge");
      }
      continue;
    }
    unique.push_back(e);
  }

  offsets_.assign(n + 1, 0);
  for (const Edge& e : unique) ++offsets_[e.from + 1];
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];

  const std::size_t m = unique.size();
  neighbors_.resize(m);
  w_s_.resize(m);
  w_v_.resize(m);
  sqrt_w_s_.resize(m);
  sqrt_w_v_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    neighbors_[k] = unique[k].to;
    w_s_[k] = unique[k].w_s;
    w_v_[k] = unique[k].w_v;
    sqrt_w_s_[k] = std::sqrt(w_s_[k]);
    sqrt_w_v_[k] = std::sqrt(w_v_[k]);
  }

  reverse_.resize(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
      const std::size_t j = neighbors_[e];
      const auto first = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[j]);
      const auto last = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[j + 1]);
      const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(i));
      reverse_[e] = static_cast<std::size_t>(it - neighbors_.begin());
    }
  }
}

bool NonlocalGraph::is_valid() const {
  const std::size_t n = pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = row_begin(i); e < row_end(i); ++e) {
      const std::size_t j = neighbors_[e];
      if (j == i || j >= n) return false;
      if (e > row_begin(i) && neighbors_[e - 1] >= neighbors_[e]) return false;
      const std::size_t r = reverse_[e];
      if (r < row_begin(j) || r >= row_end(j) || neighbors_[r] != i) return false;
      if (w_s_[r] != w_s_[e] || w_v_[r] != w_v_[e]) return false;
      if (!(w_s_[e] > 0.0 && w_s_[e] <= 1.0 && w_v_[e] > 0.0 && w_v_[e] <= 1.0)) return false;
    }
  }
  return true;
}

// --- construction --------------------------------------------------------------

std::vector<double> patch_window(int patch_radius, double sigma) {
  const int side = 2 * patch_radius + 1;
  std::vector<double> g(static_cast<std::size_t>(side * side));
  double sum = 0.0;
  for (int dy = -patch_radius; dy <= patch_radius; ++dy) {
    for (int dx = -patch_radius; dx <= patch_radius; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      g[static_cast<std::size_t>((dy + patch_radius) * side + dx + patch_radius)] = v;
      sum += v;
    }
  }
  for (double& v : g) v /= sum;
  return g;
}

namespace {

// Half-sample symmetric reflection; valid while |overshoot| <= n.
int mirror(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - i - 1;
  return i;
}

struct PaddedPlane {
  int pad;
  int stride;
  std::vector<double> values;

  PaddedPlane(const Raster& r, int pad_) : pad(pad_), stride(r.width() + 2 * pad_) {
    values.resize(static_cast<std::size_t>((r.height() + 2 * pad) * stride));
    for (int y = -pad; y < r.height() + pad; ++y) {
      for (int x = -pad; x < r.width() + pad; ++x) {
        values[static_cast<std::size_t>((y + pad) * stride + x + pad)] =
            r(mirror(y, r.height()), mirror(x, r.width()));
      }
    }
  }

  // Pointer to the top-left sample of the patch centred on (y,x).
  const double* patch(int y, int x) const {
    return values.data() + static_cast<std::ptrdiff_t>(y) * stride + x;
  }
};

double patch_distance(const std::vector<PaddedPlane>& planes, const std::vector<double>& window,
                      int side, int y0, int x0, int y1, int x1) {
  double d = 0.0;
  for (const PaddedPlane& p : planes) {
    const double* a = p.patch(y0, x0);
    const double* b = p.patch(y1, x1);
    for (int ty = 0; ty < side; ++ty) {
      const double* wa = window.data() + ty * side;
      for (int tx = 0; tx < side; ++tx) {
        const double diff = a[ty * p.stride + tx] - b[ty * p.stride + tx];
        d += wa[tx] * diff * diff;
      }
    }
  }
  return d;
}

double similarity(double distance, double h0) {
  // Underflow would leave an edge with zero weight; keep it strictly positive.
  return std::max(std::exp(-distance / (2.0 * h0 * h0)), std::numeric_limits<double>::min());
}

struct Candidate {
  std::uint32_t index;
  double w_s;
  double w_v;
};

// Builds the top-m candidate lists. When value_planes is empty the value
// weight equals the saturation weight (single-channel graphs).
NonlocalGraph build_from_planes(int height, int width, const std::vector<PaddedPlane>& sat_planes,
                                const std::vector<PaddedPlane>& value_planes,
                                const PatchParams& params) {
  const int side = 2 * params.patch_radius + 1;
  const std::vector<double> window = patch_window(params.patch_radius, params.kernel_sigma);
  const int s = params.search_radius;
  const auto m = static_cast<std::size_t>(params.neighbor_count);
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);

  std::vector<std::vector<Candidate>> kept(n);

  auto process_rows = [&](int row_begin, int row_end) {
    std::vector<Candidate> cands;
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < width; ++x) {
        cands.clear();
        for (int yy = std::max(0, y - s); yy <= std::min(height - 1, y + s); ++yy) {
          for (int xx = std::max(0, x - s); xx <= std::min(width - 1, x + s); ++xx) {
            if (yy == y && xx == x) continue;
            const double ws = similarity(patch_distance(sat_planes, window, side, y, x, yy, xx), params.h0);
            const double wv = value_planes.empty()
                                  ? ws
                                  : similarity(patch_distance(value_planes, window, side, y, x, yy, xx),
                                               params.h0);
            cands.push_back({static_cast<std::uint32_t>(yy * width + xx), ws, wv});
          }
        }
        const std::size_t keep = std::min(m, cands.size());
        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                          [](const Candidate& a, const Candidate& b) {
                            const double sa = a.w_s + a.w_v;
                            const double sb = b.w_s + b.w_v;
                            return sa != sb ? sa > sb : a.index < b.index;
                          });
        cands.resize(keep);
        kept[static_cast<std::size_t>(y * width + x)] = cands;
      }
    }
  };

  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, height);
  if (workers == 1) {
    process_rows(0, height);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(process_rows, height * w / workers, height * (w + 1) / workers);
    }
  }

  std::vector<NonlocalGraph::Edge> edges;
  edges.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Candidate& c : kept[i]) {
      edges.push_back({static_cast<std::uint32_t>(i), c.index, c.w_s, c.w_v});
    }
  }
  return NonlocalGraph(height, width, std::move(edges));
}

void require_patch_fits(int height, int width, const PatchParams& params) {
  const int side = 2 * params.patch_radius + 1;
  if (height < side || width < side) {
    throw DimensionError("image (" + std::to_string(height) + "x" + std::to_string(width) +
                         ") is smaller than the " + std::to_string(side) + "x" + std::to_string(side) +
                         " patch");
  }
}

}  // namespace

NonlocalGraph build_graph(const ColorImage& f, const PatchParams& params) {
  params.validate();
  require_patch_fits(f.height(), f.width(), params);
  const SVImage sv = rgb_to_sv(f);
  std::vector<PaddedPlane> sat;
  sat.emplace_back(sv.plane(0), params.patch_radius);
  sat.emplace_back(sv.plane(1), params.patch_radius);
  std::vector<PaddedPlane> val;
  val.emplace_back(sv.plane(2), params.patch_radius);
  return build_from_planes(f.height(), f.width(), sat, val, params);
}

NonlocalGraph build_gray_graph(const Raster& channel, const PatchParams& params) {
  params.validate();
  require_patch_fits(channel.height(), channel.width(), params);
  std::vector<PaddedPlane> planes;
  planes.emplace_back(channel, params.patch_radius);
  return build_from_planes(channel.height(), channel.width(), planes, {}, params);
}

std::array<NonlocalGraph, 3> build_channel_graphs(const ColorImage& f, const PatchParams& params) {
  return {build_gray_graph(f.plane(0), params), build_gray_graph(f.plane(1), params),
          build_gray_graph(f.plane(2), params)};
}

// --- operators -------------------------------------------------------------------

namespace {

void require_raster(std::span<const double> u, const NonlocalGraph& g) {
  if (u.size() != g.pixel_count()) {
    throw DimensionError("raster has " + std::to_string(u.size()) + " samples, graph has " +
                         std::to_string(g.pixel_count()) + " pixels");
  }
}

void require_field(const EdgeField& p, const NonlocalGraph& g) {
  if (p.values.size() != g.edge_count()) {
    throw DimensionError("edge field support does not match the graph (" +
                         std::to_string(p.values.size()) + " vs " + std::to_string(g.edge_count()) +
                         " edges)");
  }
}

}  // namespace

EdgeField nl_gradient(std::span<const double> u, const NonlocalGraph& g, Channel ch) {
  require_raster(u, g);
  EdgeField out(g);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
      out.values[e] = (u[g.neighbor(e)] - u[i]) * g.sqrt_weight(e, ch);
    }
  }
  return out;
}

PairField nl_gradient(std::span<const double> q1, std::span<const double> q2, const NonlocalGraph& g) {
  return {nl_gradient(q1, g, Channel::saturation), nl_gradient(q2, g, Channel::saturation)};
}

std::vector<double> nl_divergence(const EdgeField& p, const NonlocalGraph& g, Channel ch) {
  require_field(p, g);
  std::vector<double> out(g.pixel_count(), 0.0);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    double acc = 0.0;
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
      acc += (p.values[e] - p.values[g.reverse_edge(e)]) * g.sqrt_weight(e, ch);
    }
    out[i] = acc;
  }
  return out;
}

std::array<std::vector<double>, 2> nl_divergence(const PairField& p, const NonlocalGraph& g) {
  return {nl_divergence(p.first, g, Channel::saturation), nl_divergence(p.second, g, Channel::saturation)};
}

std::vector<double> nl_laplacian(std::span<const double> u, const NonlocalGraph& g, Channel ch) {
  require_raster(u, g);
  std::vector<double> out(g.pixel_count(), 0.0);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    double acc = 0.0;
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
      acc += (u[g.neighbor(e)] - u[i]) * g.weight(e, ch);
    }
    out[i] = 2.0 * acc;
  }
  return out;
}

double nl_inner(const EdgeField& a, const EdgeField& b) {
  if (a.values.size() != b.values.size()) throw DimensionError("edge fields have different supports");
  double s = 0.0;
  for (std::size_t e = 0; e < a.values.size(); ++e) s += a.values[e] * b.values[e];
  return s;
}

double nl_inner(const PairField& a, const PairField& b) {
  return nl_inner(a.first, b.first) + nl_inner(a.second, b.second);
}

// --- NLG1 cache ------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'N', 'L', 'G', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "NLG1 writer assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& name) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CorruptFileError("graph cache '" + name + "' is truncated");
  return value;
}

}  // namespace

void save_graph(const NonlocalGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileAccessError("cannot open graph cache '" + path.string() + "' for writing");
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.pixel_count()));
  for (std::size_t i = 0; i < g.pixel_count(); ++i) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.degree(i)));
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    put_le<std::uint32_t>(out, g.neighbor(e));
    put_le<double>(out, g.weight(e, Channel::saturation));
    put_le<double>(out, g.weight(e, Channel::value));
  }
  if (!out) throw FileAccessError("write failure on graph cache '" + path.string() + "'");
}

NonlocalGraph load_graph(const std::filesystem::path& path, int height, int width) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileAccessError("cannot open graph cache '" + name + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw UnsupportedFormatError("'" + name + "' is not an NLG1 graph file");
  const auto n = get_le<std::uint32_t>(in, name);
  if (static_cast<std::size_t>(n) != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw DimensionError("graph cache '" + name + "' holds " + std::to_string(n) + " pixels, image has " +
                         std::to_string(static_cast<long>(height) * width));
  }
  std::vector<std::uint32_t> degrees(n);
  for (auto& d : degrees) d = get_le<std::uint32_t>(in, name);
  std::vector<NonlocalGraph::Edge> edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t k = 0; k < degrees[i]; ++k) {
      const auto j = get_le<std::uint32_t>(in, name);
      const auto ws = get_le<double>(in, name);
      const auto wv = get_le<double>(in, name);
      edges.push_back({i, j, ws, wv});
    }
  }
  const std::size_t stored = edges.size();
  NonlocalGraph g(height, width, std::move(edges));
  if (g.edge_count() != stored) {
    throw CorruptFileError("graph cache '" + name + "' is not symmetric or has repeated edges");
  }
  return g;
}

}  // namespace svsnltv
