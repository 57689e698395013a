#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gsamp {

using Vertex = std::size_t;

struct Edge {
  Vertex u;
  Vertex v;
  double w;
};

// Weighted undirected graph in compressed sparse row form. Every undirected
// edge is stored twice, once per endpoint, with identical weights. Rows are
// sorted by column index. There are no self-loops and no zero weights.
class SparseGraph {
 public:
  SparseGraph() : row_ptr_{0} {}

  // Builds a graph from an undirected edge list. Repeated pairs (in either
  // orientation) are merged keeping the largest weight. Throws InvalidInput
  // on self-loops, out-of-range endpoints, or non-positive/non-finite weights.
  static SparseGraph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t num_vertices() const { return row_ptr_.size() - 1; }
  // Number of undirected edges.
  std::size_t num_edges() const { return col_idx_.size() / 2; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {col_idx_.data() + row_ptr_[v], row_ptr_[v + 1] - row_ptr_[v]};
  }
  std::span<const double> neighbor_weights(Vertex v) const {
    return {weights_.data() + row_ptr_[v], row_ptr_[v + 1] - row_ptr_[v]};
  }
  std::size_t degree_count(Vertex v) const {
    return row_ptr_[v + 1] - row_ptr_[v];
  }
  double weighted_degree(Vertex v) const;
  // 0 when (u, v) is not an edge.
  double weight(Vertex u, Vertex v) const;

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<Vertex>& col_idx() const { return col_idx_; }
  const std::vector<double>& weights() const { return weights_; }

  // One entry per undirected pair, u < v.
  std::vector<Edge> edges() const;

  // Empty string when the structural invariants hold, otherwise a reason.
  std::string check_invariants() const;

  std::size_t num_components() const;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<Vertex> col_idx_;
  std::vector<double> weights_;
};

// Random geometric sensor graph: n points uniform in the unit square, each
// joined to its k nearest neighbors, symmetrized by union. Weights use a
// Gaussian kernel whose width is the mean distance to the k-th neighbor.
SparseGraph gen_sensor_knn(std::size_t n, std::size_t k, std::uint64_t seed);

// Same construction from supplied feature vectors (one row per point).
SparseGraph build_knn_graph_from_points(const Eigen::MatrixXd& points,
                                        std::size_t k);

SparseGraph gen_barabasi_albert(std::size_t n, std::size_t m_attach,
                                std::uint64_t seed);

struct CommunityParams {
  double p_intra = 0.2;
  double p_inter = 0.002;
};
SparseGraph gen_community(std::size_t n, std::size_t n_communities,
                          std::uint64_t seed, CommunityParams params = {});

// Ring lattice with k nearest neighbors (k even), each edge rewired with
// probability p_rewire.
SparseGraph gen_watts_strogatz(std::size_t n, std::size_t k, double p_rewire,
                               std::uint64_t seed);

SparseGraph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed);

// Unit-weight 4-connected rows x cols lattice.
SparseGraph gen_grid(std::size_t rows, std::size_t cols);

// Unit-weight path 0 - 1 - ... - (n-1).
SparseGraph gen_path(std::size_t n);

// Edge-list text format: header "n m", then one "i j w" line per undirected
// edge (0-based, i < j).
void write_edge_list(std::ostream& os, const SparseGraph& g);
SparseGraph read_edge_list(std::istream& is);

struct PointCloud {
  Eigen::MatrixXd points;
  std::vector<int> labels;  // empty when the CSV carries no label column
};

// One row per point. With `has_labels`, the final column is an integer label.
// Lines starting with '#' and a non-numeric first line (header) are skipped.
PointCloud read_point_csv(std::istream& is, bool has_labels);

}  // namespace gsamp
