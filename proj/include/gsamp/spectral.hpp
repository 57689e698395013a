#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/laplacian.hpp"

namespace gsamp {

// Upper bound on the largest Laplacian eigenvalue: up to 60 Lanczos steps from
// a fixed start vector, Ritz value times 1.01 plus its residual, capped at the
// Gershgorin bound.
double lambda_max_bound(const Laplacian& lap);

// Polynomial p(L) = sum_j c_j T_j(2L/lambda_max - I) on [0, lambda_max].
struct ChebyshevFilter {
  std::vector<double> coeffs;
  double lambda_max = 0.0;
  // Cutoff of the ideal step this filter approximates; NaN for filters that
  // are not low-pass designs.
  double cutoff = std::numeric_limits<double>::quiet_NaN();

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double evaluate(double lambda) const;

  void write_csv(std::ostream& os) const;
};

using LowPassFilter = ChebyshevFilter;

// Jackson-damped Chebyshev approximation of 1{lambda <= cutoff} on
// [0, lambda_max]. A cutoff at or above 0.9999 lambda_max yields the exact
// constant (all-pass) filter.
LowPassFilter design_lowpass(double cutoff, int degree, double lambda_max);

// Chebyshev interpolant of an arbitrary function on [0, lambda_max] at the
// degree+1 Chebyshev nodes (no damping).
ChebyshevFilter chebyshev_interpolate(const std::function<double(double)>& fn,
                                      int degree, double lambda_max);

// p(L) X, one column at a time via the three-term recurrence. Columns are
// independent, so results do not depend on `threads`.
Eigen::MatrixXd apply_filter(const Laplacian& lap, const ChebyshevFilter& filter,
                             const Eigen::MatrixXd& x, int threads = 1);
void apply_filter_inplace(const Laplacian& lap, const ChebyshevFilter& filter,
                          RowMatrix& x);
// p(L) delta_v
Eigen::VectorXd filter_delta(const Laplacian& lap, const ChebyshevFilter& filter,
                             Vertex v);

enum class ProjectionKind { bernoulli, gaussian };

// Fills `block` with i.i.d. entries (unit variance) drawn from the stream
// (seed, column offset); the same (seed, column) always yields the same
// column regardless of the block partition.
void fill_random_columns(RowMatrix& block, std::uint64_t seed,
                         std::size_t first_column, ProjectionKind kind);

// Estimate of #{eigenvalues <= lambda} as the mean of ||h(L) z||^2 over
// Gaussian z, h the degree-`degree` low-pass design at lambda.
double eigencount_below(const Laplacian& lap, double lambda,
                        std::size_t n_projections, std::uint64_t seed,
                        int degree = 30);

std::size_t default_eigencount_projections(std::size_t n);

struct CoherenceOptions {
  std::size_t target_samples = 0;  // s
  double c = 10.0;                 // c s log s projections
  double epsilon = 0.1;            // dichotomy band [s, (1+eps) s]
  int degree = 30;
  std::uint64_t seed = 0;
  ProjectionKind projection = ProjectionKind::bernoulli;
  std::size_t eigencount_projections = 0;  // 0: ceil(10 log n)
  std::size_t max_dichotomy_steps = 50;
  // The dichotomy also stops once the bracket is narrower than this times
  // lambda_max.
  double bracket_tolerance = 1e-4;
};

struct CoherenceProfile {
  Eigen::VectorXd sq_coherence;
  double lambda_s = 0.0;
  double eigencount = 0.0;  // estimate of #{eigenvalues <= lambda_s}
  std::size_t n_projections = 0;
  std::size_t dichotomy_steps = 0;  // T1
  bool converged = false;
};

CoherenceProfile estimate_coherence(const Laplacian& lap,
                                    const CoherenceOptions& opts);

// Exact profile with respect to the first s eigenvectors (oracle path).
class EigenOracle;
CoherenceProfile exact_coherence(const EigenOracle& oracle, std::size_t s);

// diag(p(L)^2) estimated from `n_projections` random vectors.
Eigen::VectorXd estimate_squared_diagonal(const Laplacian& lap,
                                          const ChebyshevFilter& filter,
                                          std::size_t n_projections,
                                          std::uint64_t seed,
                                          ProjectionKind kind);

}  // namespace gsamp
