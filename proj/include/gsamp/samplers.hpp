#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gsamp/eigen_oracle.hpp"
#include "gsamp/graph.hpp"
#include "gsamp/laplacian.hpp"
#include "gsamp/spectral.hpp"

namespace gsamp {

struct SamplingResult {
  std::string method;
  std::vector<Vertex> vertices;  // selection order
  std::vector<double> scores;    // score of the winner at each iteration
  // WRS only: selection probability of each drawn vertex (parallel to
  // `vertices`), used by the weighted least-squares decoder.
  std::vector<double> probabilities;
  double elapsed = 0.0;  // seconds
  nlohmann::json params = nlohmann::json::object();
  // Solver notes such as rank deficiency or non-convergence.
  nlohmann::json diagnostics = nlohmann::json::object();

  // iter,vertex,score
  void write_csv(std::ostream& os) const;
  // Single JSON line: method, params, seed, elapsed, diagnostics.
  std::string metadata_json() const;
};

// Weighted random sampling, with replacement, p(v) proportional to the
// squared coherence.
SamplingResult wrs_sample(const CoherenceProfile& profile, std::size_t s,
                          std::uint64_t seed);

// Distance-coherence sampling. Unreachable vertices count as maximally
// distant; an empty candidate set falls back to the unrestricted argmax.
SamplingResult dc_sample(const SparseGraph& g, const CoherenceProfile& profile,
                         std::size_t s, double delta = 0.9);

// Greedy bookkeeping for approximate volume maximization.
struct GreedyState {
  std::vector<Vertex> selected;
  std::vector<Eigen::VectorXd> d_selected;
  std::vector<double> norms_sq;
  // sum over selected w of d_w(v)^2 / ||d_w||^2
  Eigen::VectorXd running_penalty;
};

using GreedyObserver = std::function<void(const GreedyState&)>;

struct AvmOptions {
  std::size_t s = 0;
  double c = 10.0;
  double epsilon = 0.1;
  int degree = 30;
  std::uint64_t seed = 0;
  ProjectionKind projection = ProjectionKind::bernoulli;
  GreedyObserver observer;  // called after every selection
};

SamplingResult avm_sample(const Laplacian& lap, const AvmOptions& opts);

// AVM with exact filtered deltas and exact coherences for R = {1..s}.
SamplingResult avm_sample_exact(const EigenOracle& oracle, std::size_t s,
                                const GreedyObserver& observer = {});

// The AVM selection loop given coherences and a filtered-delta provider.
// `numerator_of(w, d_w)` returns the vector whose squares form the penalty
// numerator (d_w itself for projection kernels).
SamplingResult avm_greedy(
    const Eigen::VectorXd& sq_coherence, std::size_t s,
    const std::function<Eigen::VectorXd(Vertex)>& delta_of,
    const std::function<Eigen::VectorXd(Vertex, const Eigen::VectorXd&)>&
        numerator_of = {},
    const GreedyObserver& observer = {});

// Greedy determinant maximization with exact projections onto span(D_m).
SamplingResult exact_greedy_sample(const EigenOracle& oracle, std::size_t s,
                                   const FrequencySet& freqs);

// Spectral proxies in the k -> infinity limit: the bandwidth grows by one
// frequency per iteration.
SamplingResult sp_ideal_sample(const EigenOracle& oracle, std::size_t s);

enum class SpSolver { automatic, dense, iterative };

struct SpOptions {
  std::size_t s = 0;
  int k = 4;
  SpSolver solver = SpSolver::automatic;
  std::size_t dense_max_n = 64;  // automatic: dense at or below this size
  double tolerance = 1e-8;
  std::size_t max_applications = 10000;
  // Iterative path: block LOBPCG preconditioned by a power of the inverse
  // restricted Laplacian.
  bool precondition = true;
  int precondition_power = 2;
  std::size_t block_size = 4;
};

// Spectral proxies with finite k: at each step the minimizer of
// psi^T L^k psi / psi^T psi with psi = 0 on the sampled set is found and the
// vertex with the largest |psi| is selected.
SamplingResult sp_finite_k_sample(const Laplacian& lap, const SpOptions& opts);

// K = g(L) with g > 0 on the spectrum.
struct KernelSpec {
  std::string name;
  std::function<double(double)> g;
};

KernelSpec identity_kernel();
// 1 / (lambda + delta)
KernelSpec inverse_kernel(double delta);

struct AvmKernelOptions {
  std::size_t s = 0;
  double c = 10.0;
  int degree = 30;
  std::uint64_t seed = 0;
  ProjectionKind projection = ProjectionKind::bernoulli;
  // 0 selects ceil(c s log s) (at least ceil(10 log n)).
  std::size_t n_projections = 0;
};

SamplingResult avm_kernel_sample(const Laplacian& lap, const KernelSpec& kernel,
                                 const AvmKernelOptions& opts);

// ||d||^2 - d^T D (D^T D)^{-1} D^T d
double det_update_term(const Eigen::MatrixXd& d_mat, const Eigen::VectorXd& d);
// det(D^T D) = Vol^2 of the columns of D
double gram_determinant(const Eigen::MatrixXd& d_mat);

// Columns d_v, v in `vertices`, of U_R U_R^T.
Eigen::MatrixXd filtered_delta_matrix(const EigenOracle& oracle,
                                      const FrequencySet& freqs,
                                      const std::vector<Vertex>& vertices);

}  // namespace gsamp
