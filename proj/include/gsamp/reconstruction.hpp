#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/eigen_oracle.hpp"

namespace gsamp {

enum class ReconstructionMode { plain_ls, weighted_ls };

struct ReconstructionSpec {
  std::size_t bandwidth = 0;  // F = {1..f}
  ReconstructionMode mode = ReconstructionMode::plain_ls;
  std::vector<double> weights;  // per sample, weighted mode only
  double pinv_cutoff = 1e-10;   // relative to the largest singular value
};

struct Reconstruction {
  Eigen::VectorXd signal;
  std::size_t rank = 0;
  bool rank_deficient = false;
};

// x = U_F (W^{1/2} U_{S,F})^+ W^{1/2} f_S. Samples may repeat.
Reconstruction reconstruct(const EigenOracle& oracle,
                           const ReconstructionSpec& spec,
                           const std::vector<Vertex>& samples,
                           const Eigen::VectorXd& observed);

// weight(v) = 1 / (s p_v)
std::vector<double> wrs_weights(const std::vector<double>& probabilities);

// Merges repeated sample indices into one row each with summed weight.
struct CollapsedSamples {
  std::vector<Vertex> vertices;
  std::vector<double> weights;
};
CollapsedSamples collapse_duplicates(const std::vector<Vertex>& samples,
                                     const std::vector<double>& weights);

// 10 log10(||f||^2 / ||fhat - f||^2); +infinity when fhat == f. A zero
// reference throws InvalidInput.
double snr_db(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate);

// E[(fhat - x)(fhat - x)^T] for i.i.d. noise of variance `noise_variance`
// under plain least squares.
Eigen::MatrixXd expected_error_covariance(const EigenOracle& oracle,
                                          std::size_t bandwidth,
                                          const std::vector<Vertex>& samples,
                                          double noise_variance);

// One-vs-all: reconstruct each class indicator (columns of `label_signals`)
// from its values on `samples`, then pick the class with the largest
// reconstructed magnitude (lowest class index on ties).
std::vector<int> classify_one_vs_all(const EigenOracle& oracle,
                                     const ReconstructionSpec& spec,
                                     const std::vector<Vertex>& samples,
                                     const Eigen::MatrixXd& label_signals);

}  // namespace gsamp
