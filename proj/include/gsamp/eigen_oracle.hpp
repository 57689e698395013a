#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/laplacian.hpp"

namespace gsamp {

// Index set of retained frequencies (0-based eigenvalue ranks).
using FrequencySet = std::vector<std::size_t>;

// {0, 1, ..., k-1}
FrequencySet first_frequencies(std::size_t k);

// Dense eigendecomposition L = U diag(values) U^T with ascending eigenvalues.
// Desk-scale only: O(n^2) memory and O(n^3) time.
class EigenOracle {
 public:
  explicit EigenOracle(const Laplacian& lap);
  explicit EigenOracle(const Eigen::MatrixXd& symmetric);

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }

  // Columns of U selected by `freqs`.
  Eigen::MatrixXd basis(const FrequencySet& freqs) const;
  // U_R U_R^T
  Eigen::MatrixXd projector(const FrequencySet& freqs) const;
  // Diagonal of U_R U_R^T, i.e. the exact squared local coherences.
  Eigen::VectorXd projector_diagonal(const FrequencySet& freqs) const;

 private:
  void decompose(Eigen::MatrixXd a);

  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
};

// d_v = U_R U_R^T delta_v
Eigen::VectorXd exact_filtered_delta(const EigenOracle& oracle,
                                     const FrequencySet& freqs, Vertex v);

}  // namespace gsamp
