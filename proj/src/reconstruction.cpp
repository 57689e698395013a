#include "gsamp/reconstruction.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "gsamp/errors.hpp"

namespace gsamp {

namespace {

struct WeightedPinv {
  Eigen::MatrixXd solve;  // f x |S|, maps observed values to coefficients
  std::size_t rank = 0;
};

WeightedPinv weighted_pinv(const EigenOracle& oracle, const ReconstructionSpec& spec,
                           const std::vector<Vertex>& samples, const Eigen::MatrixXd& u) {
  const std::size_t n = oracle.size();
  if (spec.bandwidth < 1 || spec.bandwidth > n) {
    throw InvalidParameter("bandwidth must lie in [1, n]");
  }
  if (samples.empty()) throw InvalidInput("no samples to reconstruct from");
  const bool weighted = spec.mode == ReconstructionMode::weighted_ls;
  if (weighted && spec.weights.size() != samples.size()) {
    throw InvalidParameter("weighted reconstruction needs one weight per sample");
  }
  const auto m = static_cast<Eigen::Index>(samples.size());
  Eigen::VectorXd sw = Eigen::VectorXd::Ones(m);
  Eigen::MatrixXd a(m, u.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    Vertex v = samples[static_cast<std::size_t>(i)];
    if (v >= n) throw InvalidInput("sample index " + std::to_string(v) + " out of range");
    if (weighted) {
      double w = spec.weights[static_cast<std::size_t>(i)];
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidParameter("weights must be positive");
      sw(i) = std::sqrt(w);
    }
    a.row(i) = sw(i) * u.row(static_cast<Eigen::Index>(v));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  WeightedPinv out;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > spec.pinv_cutoff * sv(0)) {
      inv(i) = 1.0 / sv(i);
      ++out.rank;
    }
  }
  out.solve = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * sw.asDiagonal();
  return out;
}

}  // namespace

Reconstruction reconstruct(const EigenOracle& oracle, const ReconstructionSpec& spec,
                           const std::vector<Vertex>& samples,
                           const Eigen::VectorXd& observed) {
  if (static_cast<std::size_t>(observed.size()) != samples.size()) {
    throw InvalidInput("observed values do not match the sample list");
  }
  const Eigen::MatrixXd u = oracle.basis(first_frequencies(std::min(spec.bandwidth, oracle.size())));
  WeightedPinv p = weighted_pinv(oracle, spec, samples, u);
  Reconstruction r;
  r.signal = u * (p.solve * observed);
  r.rank = p.rank;
  r.rank_deficient = p.rank < spec.bandwidth;
  return r;
}

std::vector<double> wrs_weights(const std::vector<double>& probabilities) {
  const double s = static_cast<double>(probabilities.size());
  std::vector<double> w;
  w.reserve(probabilities.size());
  for (double p : probabilities) {
    if (!(p > 0.0)) throw InvalidParameter("sampling probabilities must be positive");
    w.push_back(1.0 / (s * p));
  }
  return w;
}

CollapsedSamples collapse_duplicates(const std::vector<Vertex>& samples,
                                     const std::vector<double>& weights) {
  if (samples.size() != weights.size()) throw InvalidParameter("one weight per sample");
  CollapsedSamples out;
  std::map<Vertex, std::size_t> slot;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(samples[i], out.vertices.size());
    if (fresh) {
      out.vertices.push_back(samples[i]);
      out.weights.push_back(weights[i]);
    } else {
      out.weights[it->second] += weights[i];
    }
  }
  return out;
}

double snr_db(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate) {
  if (reference.size() != estimate.size()) throw InvalidInput("signal sizes differ");
  if (reference.squaredNorm() == 0.0) throw InvalidInput("reference signal is zero");
  const double err = (estimate - reference).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(reference.squaredNorm() / err);
}

Eigen::MatrixXd expected_error_covariance(const EigenOracle& oracle, std::size_t bandwidth,
                                          const std::vector<Vertex>& samples,
                                          double noise_variance) {
  ReconstructionSpec spec;
  spec.bandwidth = bandwidth;
  const Eigen::MatrixXd u = oracle.basis(first_frequencies(std::min(bandwidth, oracle.size())));
  WeightedPinv p = weighted_pinv(oracle, spec, samples, u);
  Eigen::MatrixXd op = u * p.solve;
  return noise_variance * op * op.transpose();
}

std::vector<int> classify_one_vs_all(const EigenOracle& oracle, const ReconstructionSpec& spec,
                                     const std::vector<Vertex>& samples,
                                     const Eigen::MatrixXd& label_signals) {
  const std::size_t n = oracle.size();
  if (static_cast<std::size_t>(label_signals.rows()) != n || label_signals.cols() < 1) {
    throw InvalidInput("label signals must be n x C with C >= 1");
  }
  const Eigen::MatrixXd u = oracle.basis(first_frequencies(std::min(spec.bandwidth, n)));
  WeightedPinv p = weighted_pinv(oracle, spec, samples, u);
  Eigen::MatrixXd observed(static_cast<Eigen::Index>(samples.size()), label_signals.cols());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    observed.row(static_cast<Eigen::Index>(i)) = label_signals.row(static_cast<Eigen::Index>(samples[i]));
  }
  const Eigen::MatrixXd rec = u * (p.solve * observed);
  std::vector<int> labels(n);
  for (Eigen::Index v = 0; v < rec.rows(); ++v) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < rec.cols(); ++c) {
      if (rec(v, c) > rec(v, best)) best = c;
    }
    labels[static_cast<std::size_t>(v)] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace gsamp
