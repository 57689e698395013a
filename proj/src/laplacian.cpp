#include "gsamp/laplacian.hpp"

#include <algorithm>
#include <cmath>

#include "gsamp/spectral.hpp"

namespace gsamp {

Laplacian laplacian(const SparseGraph& g, LaplacianKind kind) {
  const std::size_t n = g.num_vertices();
  Laplacian lap;
  lap.kind_ = kind;
  lap.row_ptr_.assign(n + 1, 0);
  lap.col_.reserve(2 * g.num_edges() + n);
  lap.val_.reserve(2 * g.num_edges() + n);

  std::vector<double> deg(n);
  for (Vertex v = 0; v < n; ++v) deg[v] = g.weighted_degree(v);
  std::vector<double> inv_sqrt(n, 0.0);
  if (kind == LaplacianKind::normalized) {
    for (Vertex v = 0; v < n; ++v) inv_sqrt[v] = deg[v] > 0.0 ? 1.0 / std::sqrt(deg[v]) : 0.0;
  }

  for (Vertex u = 0; u < n; ++u) {
    auto nb = g.neighbors(u);
    auto w = g.neighbor_weights(u);
    bool diag_done = false;
    auto push_diag = [&] {
      lap.col_.push_back(u);
      if (kind == LaplacianKind::combinatorial) {
        lap.val_.push_back(deg[u]);
      } else {
        lap.val_.push_back(deg[u] > 0.0 ? 1.0 : 0.0);
      }
      diag_done = true;
    };
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (!diag_done && nb[k] > u) push_diag();
      lap.col_.push_back(nb[k]);
      lap.val_.push_back(kind == LaplacianKind::combinatorial
                             ? -w[k]
                             : -w[k] * inv_sqrt[u] * inv_sqrt[nb[k]]);
    }
    if (!diag_done) push_diag();
    lap.row_ptr_[u + 1] = lap.col_.size();
  }
  lap.lambda_max_bound_ = lambda_max_bound(lap);
  return lap;
}

void Laplacian::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
    y[i] = acc;
  }
}

Eigen::VectorXd Laplacian::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(x.size());
  apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
        std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  return y;
}

void Laplacian::apply(const RowMatrix& x, RowMatrix& y) const {
  const std::size_t n = size();
  y.resize(x.rows(), x.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto yi = y.row(static_cast<Eigen::Index>(i));
    yi.setZero();
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      yi.noalias() += val_[k] * x.row(static_cast<Eigen::Index>(col_[k]));
    }
  }
}

double Laplacian::quadratic_form(const Eigen::VectorXd& x) const {
  return x.dot(apply(x));
}

Eigen::MatrixXd Laplacian::to_dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_[k])) = val_[k];
    }
  }
  return a;
}

double Laplacian::gershgorin_bound() const {
  if (kind_ == LaplacianKind::normalized) return 2.0;
  double bound = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double r = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) r += std::abs(val_[k]);
    bound = std::max(bound, r);
  }
  return bound;
}

}  // namespace gsamp
