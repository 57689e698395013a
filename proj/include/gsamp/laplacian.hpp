#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/graph.hpp"

namespace gsamp {

enum class LaplacianKind { combinatorial, normalized };

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                Eigen::RowMajor>;

// Sparse symmetric positive semidefinite graph Laplacian in CSR form
// (diagonal stored), together with an upper bound on its spectrum.
class Laplacian {
 public:
  Laplacian() = default;

  LaplacianKind kind() const { return kind_; }
  std::size_t size() const { return row_ptr_.size() - 1; }
  std::size_t nnz() const { return col_.size(); }
  double lambda_max_bound() const { return lambda_max_bound_; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_; }
  const std::vector<double>& values() const { return val_; }

  // y = L x
  void apply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  // Y = L X for a row-major block; each column is computed independently.
  void apply(const RowMatrix& x, RowMatrix& y) const;

  double quadratic_form(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

  // Gershgorin-type bound that is always valid (2 for the normalized kind).
  double gershgorin_bound() const;

 private:
  friend Laplacian laplacian(const SparseGraph& g, LaplacianKind kind);

  LaplacianKind kind_ = LaplacianKind::combinatorial;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  std::vector<double> val_;
  double lambda_max_bound_ = 0.0;
};

// L = D - A (combinatorial) or I - D^{-1/2} A D^{-1/2} (normalized; isolated
// vertices get a zero row). The spectral bound is filled in via
// lambda_max_bound().
Laplacian laplacian(const SparseGraph& g, LaplacianKind kind);

}  // namespace gsamp
