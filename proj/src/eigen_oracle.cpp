#include "gsamp/eigen_oracle.hpp"

#include <numeric>

#include "gsamp/errors.hpp"

#ifdef GSAMP_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace gsamp {

FrequencySet first_frequencies(std::size_t k) {
  FrequencySet f(k);
  std::iota(f.begin(), f.end(), std::size_t{0});
  return f;
}

EigenOracle::EigenOracle(const Laplacian& lap) { decompose(lap.to_dense()); }

EigenOracle::EigenOracle(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols()) {
    throw InvalidInput("eigendecomposition needs a square matrix");
  }
  decompose(symmetric);
}

void EigenOracle::decompose(Eigen::MatrixXd a) {
  const auto n = a.rows();
#ifdef GSAMP_HAVE_LAPACKE
  values_.resize(n);
  if (n > 0) {
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L',
                                     static_cast<lapack_int>(n), a.data(),
                                     static_cast<lapack_int>(n), values_.data());
    if (info != 0) throw InvalidInput("dsyevd failed with info " + std::to_string(info));
  }
  vectors_ = std::move(a);
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw InvalidInput("eigendecomposition failed");
  values_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
#endif
  // Fix the sign convention: the largest-magnitude entry of each eigenvector
  // is positive.
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index imax = 0;
    vectors_.col(j).cwiseAbs().maxCoeff(&imax);
    if (vectors_(imax, j) < 0) vectors_.col(j) *= -1.0;
  }
}

Eigen::MatrixXd EigenOracle::basis(const FrequencySet& freqs) const {
  Eigen::MatrixXd u(vectors_.rows(), static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    if (freqs[j] >= size()) throw InvalidParameter("frequency index out of range");
    u.col(static_cast<Eigen::Index>(j)) = vectors_.col(static_cast<Eigen::Index>(freqs[j]));
  }
  return u;
}

Eigen::MatrixXd EigenOracle::projector(const FrequencySet& freqs) const {
  Eigen::MatrixXd u = basis(freqs);
  return u * u.transpose();
}

Eigen::VectorXd EigenOracle::projector_diagonal(const FrequencySet& freqs) const {
  return basis(freqs).rowwise().squaredNorm();
}

Eigen::VectorXd exact_filtered_delta(const EigenOracle& oracle,
                                     const FrequencySet& freqs, Vertex v) {
  if (v >= oracle.size()) throw InvalidParameter("vertex out of range");
  Eigen::MatrixXd u = oracle.basis(freqs);
  return u * u.row(static_cast<Eigen::Index>(v)).transpose();
}

}  // namespace gsamp
