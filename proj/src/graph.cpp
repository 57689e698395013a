#include "gsamp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "gsamp/errors.hpp"
#include "gsamp/rng.hpp"

namespace gsamp {

SparseGraph SparseGraph::from_edges(std::size_t n, std::span<const Edge> edges) {
  std::vector<Edge> directed;
  directed.reserve(2 * edges.size());
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw InvalidInput("edge endpoint out of range");
    }
    if (e.u == e.v) throw InvalidInput("self-loop at vertex " + std::to_string(e.u));
    if (!(e.w > 0.0) || !std::isfinite(e.w)) {
      throw InvalidInput("edge weight must be positive and finite");
    }
    directed.push_back(e);
    directed.push_back({e.v, e.u, e.w});
  }
  std::sort(directed.begin(), directed.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });

  SparseGraph g;
  g.row_ptr_.assign(n + 1, 0);
  g.col_idx_.reserve(directed.size());
  g.weights_.reserve(directed.size());
  for (std::size_t i = 0; i < directed.size();) {
    const auto& e = directed[i];
    double w = e.w;
    std::size_t j = i + 1;
    for (; j < directed.size() && directed[j].u == e.u && directed[j].v == e.v; ++j) {
      w = std::max(w, directed[j].w);
    }
    g.col_idx_.push_back(e.v);
    g.weights_.push_back(w);
    ++g.row_ptr_[e.u + 1];
    i = j;
  }
  std::partial_sum(g.row_ptr_.begin(), g.row_ptr_.end(), g.row_ptr_.begin());
  return g;
}

double SparseGraph::weighted_degree(Vertex v) const {
  auto w = neighbor_weights(v);
  return std::accumulate(w.begin(), w.end(), 0.0);
}

double SparseGraph::weight(Vertex u, Vertex v) const {
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return 0.0;
  return weights_[row_ptr_[u] + static_cast<std::size_t>(it - nb.begin())];
}

std::vector<Edge> SparseGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (Vertex u = 0; u < num_vertices(); ++u) {
    auto nb = neighbors(u);
    auto w = neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (u < nb[k]) out.push_back({u, nb[k], w[k]});
    }
  }
  return out;
}

std::string SparseGraph::check_invariants() const {
  const std::size_t n = num_vertices();
  if (row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
      col_idx_.size() != weights_.size()) {
    return "malformed CSR arrays";
  }
  for (Vertex u = 0; u < n; ++u) {
    auto nb = neighbors(u);
    auto w = neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= n) return "column index out of range";
      if (nb[k] == u) return "self-loop at " + std::to_string(u);
      if (!(w[k] > 0.0)) return "non-positive weight";
      if (k > 0 && nb[k] <= nb[k - 1]) return "unsorted or repeated column";
      if (weight(nb[k], u) != w[k]) return "asymmetric entry";
    }
  }
  return {};
}

std::size_t SparseGraph::num_components() const {
  const std::size_t n = num_vertices();
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack;
  std::size_t count = 0;
  for (Vertex s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++count;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      Vertex u = stack.back();
      stack.pop_back();
      for (Vertex v : neighbors(u)) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  return count;
}

namespace {

double uniform01(SplitMix64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, bound).
std::size_t uniform_index(SplitMix64& rng, std::size_t bound) {
  std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
  return dist(rng);
}

SparseGraph knn_graph(const Eigen::MatrixXd& pts, std::size_t k) {
  const std::size_t n = static_cast<std::size_t>(pts.rows());
  std::vector<std::pair<Vertex, Vertex>> pairs;
  std::vector<double> kth(n);
  pairs.reserve(n * k);
  std::vector<std::pair<double, Vertex>> cand(n);
  for (Vertex i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (Vertex j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[m++] = {(pts.row(i) - pts.row(j)).squaredNorm(), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k),
                      cand.begin() + static_cast<std::ptrdiff_t>(m));
    for (std::size_t r = 0; r < k; ++r) pairs.emplace_back(i, cand[r].second);
    kth[i] = std::sqrt(cand[k - 1].first);
  }
  double sigma = std::accumulate(kth.begin(), kth.end(), 0.0) / static_cast<double>(n);
  // All points coincide: every kernel weight is 1.
  if (!(sigma > 0.0)) sigma = 1.0;

  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    double d2 = (pts.row(i) - pts.row(j)).squaredNorm();
    double w = std::exp(-d2 / (2.0 * sigma * sigma));
    // Underflow for far outliers would drop the edge; keep it connected.
    w = std::max(w, std::numeric_limits<double>::min());
    edges.push_back({std::min(i, j), std::max(i, j), w});
  }
  return SparseGraph::from_edges(n, edges);
}

}  // namespace

SparseGraph gen_sensor_knn(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0 || n <= k) throw InvalidParameter("sensor knn requires n > k >= 1");
  SplitMix64 rng(derive_seed(seed, 1));
  Eigen::MatrixXd pts(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    pts(i, 0) = uniform01(rng);
    pts(i, 1) = uniform01(rng);
  }
  return knn_graph(pts, k);
}

SparseGraph build_knn_graph_from_points(const Eigen::MatrixXd& points,
                                        std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || n <= k) throw InvalidParameter("knn graph requires n > k >= 1");
  if (!points.allFinite()) throw InvalidInput("point coordinates must be finite");
  return knn_graph(points, k);
}

SparseGraph gen_barabasi_albert(std::size_t n, std::size_t m_attach,
                                std::uint64_t seed) {
  if (m_attach == 0 || m_attach >= n) {
    throw InvalidParameter("barabasi-albert requires 1 <= m_attach < n");
  }
  SplitMix64 rng(derive_seed(seed, 2));
  std::vector<Edge> edges;
  // Endpoint multiset: picking uniformly from it is degree-proportional.
  std::vector<Vertex> endpoints;
  const std::size_t seed_size = m_attach + 1;
  for (Vertex u = 0; u < seed_size && u < n; ++u) {
    for (Vertex v = u + 1; v < seed_size && v < n; ++v) {
      edges.push_back({u, v, 1.0});
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<Vertex> targets;
  for (Vertex v = seed_size; v < n; ++v) {
    targets.clear();
    while (targets.size() < m_attach) {
      Vertex t = endpoints[uniform_index(rng, endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
        targets.push_back(t);
      }
    }
    for (Vertex t : targets) {
      edges.push_back({t, v, 1.0});
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return SparseGraph::from_edges(n, edges);
}

SparseGraph gen_community(std::size_t n, std::size_t n_communities,
                          std::uint64_t seed, CommunityParams params) {
  if (n_communities == 0 || n_communities > n) {
    throw InvalidParameter("community model requires 1 <= n_communities <= n");
  }
  if (!(params.p_intra >= 0.0 && params.p_intra <= 1.0 &&
        params.p_inter >= 0.0 && params.p_inter <= 1.0)) {
    throw InvalidParameter("community probabilities must lie in [0, 1]");
  }
  SplitMix64 rng(derive_seed(seed, 3));
  const std::size_t block = n / n_communities;
  auto community = [&](Vertex v) { return std::min(v / block, n_communities - 1); };
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      double p = community(u) == community(v) ? params.p_intra : params.p_inter;
      if (uniform01(rng) < p) edges.push_back({u, v, 1.0});
    }
  }
  return SparseGraph::from_edges(n, edges);
}

SparseGraph gen_watts_strogatz(std::size_t n, std::size_t k, double p_rewire,
                               std::uint64_t seed) {
  if (k == 0 || k % 2 != 0 || k >= n) {
    throw InvalidParameter("watts-strogatz requires even k with 2 <= k < n");
  }
  if (!(p_rewire >= 0.0 && p_rewire <= 1.0)) {
    throw InvalidParameter("rewiring probability must lie in [0, 1]");
  }
  SplitMix64 rng(derive_seed(seed, 4));
  std::vector<std::set<Vertex>> adj(n);
  for (Vertex u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= k / 2; ++j) {
      Vertex v = (u + j) % n;
      adj[u].insert(v);
      adj[v].insert(u);
    }
  }
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (Vertex u = 0; u < n; ++u) {
      if (!(uniform01(rng) < p_rewire)) continue;
      Vertex v = (u + j) % n;
      if (!adj[u].count(v) || adj[u].size() >= n - 1) continue;
      // Rewire (u, v) to (u, t) with t neither u nor a current neighbor.
      Vertex t;
      do {
        t = uniform_index(rng, n);
      } while (t == u || adj[u].count(t));
      adj[u].erase(v);
      adj[v].erase(u);
      adj[u].insert(t);
      adj[t].insert(u);
    }
  }
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v : adj[u]) {
      if (u < v) edges.push_back({u, v, 1.0});
    }
  }
  return SparseGraph::from_edges(n, edges);
}

SparseGraph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in [0, 1]");
  if (n == 0) throw InvalidParameter("n must be positive");
  SplitMix64 rng(derive_seed(seed, 5));
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      if (uniform01(rng) < p) edges.push_back({u, v, 1.0});
    }
  }
  return SparseGraph::from_edges(n, edges);
}

SparseGraph gen_grid(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw InvalidParameter("grid dimensions must be positive");
  std::vector<Edge> edges;
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  }
  return SparseGraph::from_edges(rows * cols, edges);
}

SparseGraph gen_path(std::size_t n) {
  if (n == 0) throw InvalidParameter("n must be positive");
  std::vector<Edge> edges;
  for (Vertex u = 0; u + 1 < n; ++u) edges.push_back({u, u + 1, 1.0});
  return SparseGraph::from_edges(n, edges);
}

void write_edge_list(std::ostream& os, const SparseGraph& g) {
  os << g.num_vertices() << ' ' << g.num_edges() << '\n';
  os.precision(17);
  for (const auto& e : g.edges()) os << e.u << ' ' << e.v << ' ' << e.w << '\n';
}

SparseGraph read_edge_list(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t n = 0, m = 0;
  bool header = false;
  std::vector<Edge> edges;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (!header) {
      if (!(ls >> n >> m)) throw ParseError("expected header 'n m'", lineno);
      header = true;
      continue;
    }
    long long u = 0, v = 0;
    double w = 0.0;
    if (!(ls >> u >> v >> w) || u < 0 || v < 0) {
      throw ParseError("expected 'i j w'", lineno);
    }
    if (static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n ||
        u == v || !(w > 0.0)) {
      throw ParseError("invalid edge", lineno);
    }
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), w});
  }
  if (!header) throw ParseError("missing header", lineno);
  if (edges.size() != m) {
    throw ParseError("header declares " + std::to_string(m) + " edges, found " +
                         std::to_string(edges.size()),
                     lineno);
  }
  return SparseGraph::from_edges(n, edges);
}

PointCloud read_point_csv(std::istream& is, bool has_labels) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        double x = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
        vals.push_back(x);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty() && width == 0) continue;  // header row
      throw ParseError("non-numeric value", lineno);
    }
    if (width == 0) width = vals.size();
    if (vals.size() != width) throw ParseError("inconsistent column count", lineno);
    if (has_labels) {
      if (vals.size() < 2) throw ParseError("missing label column", lineno);
      double lab = vals.back();
      if (!std::isfinite(lab) || lab != std::floor(lab)) {
        throw ParseError("label must be an integer", lineno);
      }
      labels.push_back(static_cast<int>(lab));
      vals.pop_back();
    }
    rows.push_back(std::move(vals));
  }
  PointCloud pc;
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  pc.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      pc.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  pc.labels = std::move(labels);
  return pc;
}

}  // namespace gsamp
