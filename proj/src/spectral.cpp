#include "gsamp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "gsamp/eigen_oracle.hpp"
#include "gsamp/errors.hpp"
#include "gsamp/rng.hpp"

namespace gsamp {

namespace {

constexpr std::size_t kColumnBlock = 16;

}  // namespace

double lambda_max_bound(const Laplacian& lap) {
  const std::size_t n = lap.size();
  if (n == 0) return 0.0;
  const double cap = lap.gershgorin_bound();
  if (cap == 0.0) return 0.0;

  // Lanczos with full reorthogonalization; the largest Ritz value plus its
  // residual norm bounds the top eigenvalue once the Ritz pair has settled.
  const auto steps = static_cast<Eigen::Index>(std::min<std::size_t>(n, 60));
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd q(nn, steps);
  Eigen::VectorXd alpha(steps), beta(steps);
  SplitMix64 rng(0x5eed);
  Eigen::VectorXd x(nn);
  for (auto& e : x) e = (rng() & 1) ? 1.0 : -1.0;
  q.col(0) = x.normalized();
  Eigen::Index k = 0;
  for (; k < steps; ++k) {
    Eigen::VectorXd w = lap.apply(q.col(k));
    alpha(k) = q.col(k).dot(w);
    for (int pass = 0; pass < 2; ++pass) {
      w -= q.leftCols(k + 1) * (q.leftCols(k + 1).transpose() * w);
    }
    beta(k) = w.norm();
    if (k + 1 == steps || beta(k) <= 1e-12 * cap) {
      ++k;
      break;
    }
    q.col(k + 1) = w / beta(k);
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    t(i, i) = alpha(i);
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const double theta = es.eigenvalues()(k - 1);
  const double resid = std::abs(beta(k - 1) * es.eigenvectors()(k - 1, k - 1));
  return std::min(1.01 * theta + resid, cap);
}

double ChebyshevFilter::evaluate(double lambda) const {
  if (coeffs.empty()) return 0.0;
  const double x = 2.0 * lambda / lambda_max - 1.0;
  double t_prev = 1.0, t_cur = x;
  double acc = coeffs[0];
  if (coeffs.size() > 1) acc += coeffs[1] * x;
  for (std::size_t j = 2; j < coeffs.size(); ++j) {
    double t_next = 2.0 * x * t_cur - t_prev;
    acc += coeffs[j] * t_next;
    t_prev = t_cur;
    t_cur = t_next;
  }
  return acc;
}

void ChebyshevFilter::write_csv(std::ostream& os) const {
  os << "index,coefficient\n";
  os.precision(17);
  for (std::size_t j = 0; j < coeffs.size(); ++j) os << j << ',' << coeffs[j] << '\n';
}

LowPassFilter design_lowpass(double cutoff, int degree, double lambda_max) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw InvalidParameter("spectral interval [0, lambda_max] is degenerate");
  }
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw InvalidParameter("low-pass cutoff must be positive");
  }
  if (degree < 1) throw InvalidParameter("filter degree must be at least 1");

  LowPassFilter f;
  f.lambda_max = lambda_max;
  f.cutoff = cutoff;
  f.coeffs.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  // Cutoffs this close to the top of the interval would otherwise leave the
  // damped step rolling off over the largest eigenvalues.
  if (cutoff >= 0.9999 * lambda_max) {
    f.coeffs[0] = 1.0;
    return f;
  }

  const double pi = std::numbers::pi;
  const double theta_c = std::acos(2.0 * cutoff / lambda_max - 1.0);
  const double alpha = pi / (degree + 2);
  f.coeffs[0] = (pi - theta_c) / pi;
  for (int j = 1; j <= degree; ++j) {
    double raw = -2.0 * std::sin(j * theta_c) / (j * pi);
    double jackson = ((1.0 - static_cast<double>(j) / (degree + 2)) * std::sin(alpha) * std::cos(j * alpha) +
                      std::cos(alpha) * std::sin(j * alpha) / (degree + 2)) /
                     std::sin(alpha);
    f.coeffs[static_cast<std::size_t>(j)] = raw * jackson;
  }
  return f;
}

ChebyshevFilter chebyshev_interpolate(const std::function<double(double)>& fn,
                                      int degree, double lambda_max) {
  if (!(lambda_max > 0.0)) throw InvalidParameter("spectral interval is degenerate");
  if (degree < 0) throw InvalidParameter("degree must be non-negative");
  const int nodes = degree + 1;
  std::vector<double> samples(static_cast<std::size_t>(nodes));
  for (int k = 0; k < nodes; ++k) {
    double theta = std::numbers::pi * (k + 0.5) / nodes;
    samples[static_cast<std::size_t>(k)] = fn(0.5 * (std::cos(theta) + 1.0) * lambda_max);
  }
  ChebyshevFilter f;
  f.lambda_max = lambda_max;
  f.coeffs.assign(static_cast<std::size_t>(nodes), 0.0);
  for (int j = 0; j < nodes; ++j) {
    double acc = 0.0;
    for (int k = 0; k < nodes; ++k) {
      acc += samples[static_cast<std::size_t>(k)] * std::cos(j * std::numbers::pi * (k + 0.5) / nodes);
    }
    f.coeffs[static_cast<std::size_t>(j)] = (j == 0 ? 1.0 : 2.0) * acc / nodes;
  }
  return f;
}

namespace {

// Three-term recurrence over a row-major block of width kW (0: runtime width).
template <std::size_t kW>
void chebyshev_block(const Laplacian& lap, const std::vector<double>& c, double scale,
                     RowMatrix& x) {
  const std::size_t n = lap.size();
  const std::size_t b = kW ? kW : static_cast<std::size_t>(x.cols());
  const std::size_t* rp = lap.row_ptr().data();
  const std::size_t* ci = lap.col_idx().data();
  const double* va = lap.values().data();

  // t0 = T_{j-1} X, t1 = T_j X; T_1 X = scale L X - X.
  RowMatrix t0 = x;
  RowMatrix t1(x.rows(), x.cols());
  RowMatrix acc(x.rows(), x.cols());
  std::vector<double> tmp_buf(b);
  double* tmp = tmp_buf.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < b; ++j) tmp[j] = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const double v = va[k];
      const double* __restrict src = t0.data() + ci[k] * b;
      for (std::size_t j = 0; j < b; ++j) tmp[j] += v * src[j];
    }
    double* __restrict o = t1.data() + i * b;
    double* __restrict a = acc.data() + i * b;
    const double* __restrict p = t0.data() + i * b;
    for (std::size_t j = 0; j < b; ++j) {
      o[j] = scale * tmp[j] - p[j];
      a[j] = c[0] * p[j] + c[1] * o[j];
    }
  }
  // T_{j+1} X = 2 scale L T_j X - 2 T_j X - T_{j-1} X, written over t0.
  for (std::size_t deg = 2; deg < c.size(); ++deg) {
    const double cj = c[deg];
    for (std::size_t i = 0; i < n; ++i) {
      double local[kW ? kW : 1];
      double* __restrict t = kW ? local : tmp;
      for (std::size_t j = 0; j < b; ++j) t[j] = 0.0;
      for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
        const double v = va[k];
        const double* __restrict src = t1.data() + ci[k] * b;
        for (std::size_t j = 0; j < b; ++j) t[j] += v * src[j];
      }
      double* __restrict o = t0.data() + i * b;
      double* __restrict a = acc.data() + i * b;
      const double* __restrict cur = t1.data() + i * b;
      for (std::size_t j = 0; j < b; ++j) {
        o[j] = 2.0 * (scale * t[j] - cur[j]) - o[j];
        a[j] += cj * o[j];
      }
    }
    t0.swap(t1);
  }
  x.swap(acc);
}

}  // namespace

void apply_filter_inplace(const Laplacian& lap, const ChebyshevFilter& filter,
                          RowMatrix& x) {
  if (static_cast<std::size_t>(x.rows()) != lap.size()) {
    throw InvalidParameter("filter input has the wrong number of rows");
  }
  const auto& c = filter.coeffs;
  if (c.empty()) {
    x.setZero();
    return;
  }
  if (c.size() == 1) {
    x *= c[0];
    return;
  }
  const double scale = 2.0 / filter.lambda_max;
  switch (x.cols()) {
    case 16: chebyshev_block<16>(lap, c, scale, x); break;
    case 1: chebyshev_block<1>(lap, c, scale, x); break;
    default: chebyshev_block<0>(lap, c, scale, x); break;
  }
}

Eigen::MatrixXd apply_filter(const Laplacian& lap, const ChebyshevFilter& filter,
                             const Eigen::MatrixXd& x, int threads) {
  if (static_cast<std::size_t>(x.rows()) != lap.size()) {
    throw InvalidParameter("filter input has the wrong number of rows");
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  const auto cols = static_cast<std::size_t>(x.cols());
  const std::size_t n_blocks = (cols + kColumnBlock - 1) / kColumnBlock;
  auto run_block = [&](std::size_t blk) {
    const auto first = static_cast<Eigen::Index>(blk * kColumnBlock);
    const auto width = static_cast<Eigen::Index>(std::min(kColumnBlock, cols - blk * kColumnBlock));
    RowMatrix block = x.middleCols(first, width);
    apply_filter_inplace(lap, filter, block);
    out.middleCols(first, width) = block;
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(n_blocks, 1));
  if (workers <= 1) {
    for (std::size_t blk = 0; blk < n_blocks; ++blk) run_block(blk);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t blk = w; blk < n_blocks; blk += workers) run_block(blk);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

Eigen::VectorXd filter_delta(const Laplacian& lap, const ChebyshevFilter& filter,
                             Vertex v) {
  if (v >= lap.size()) throw InvalidParameter("vertex out of range");
  RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(lap.size()), 1);
  x(static_cast<Eigen::Index>(v), 0) = 1.0;
  apply_filter_inplace(lap, filter, x);
  return x.col(0);
}

void fill_random_columns(RowMatrix& block, std::uint64_t seed,
                         std::size_t first_column, ProjectionKind kind) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    SplitMix64 rng(derive_seed(seed, first_column + static_cast<std::size_t>(j)));
    if (kind == ProjectionKind::bernoulli) {
      std::uint64_t bits = 0;
      for (Eigen::Index i = 0; i < block.rows(); ++i) {
        if (i % 64 == 0) bits = rng();
        block(i, j) = (bits & 1) ? 1.0 : -1.0;
        bits >>= 1;
      }
    } else {
      normal.reset();
      for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = normal(rng);
    }
  }
}

std::size_t default_eigencount_projections(std::size_t n) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(10.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2))))));
}

namespace {

// Precomputed Gaussian probes so that every dichotomy step sees the same
// vectors.
class EigencountProbe {
 public:
  EigencountProbe(const Laplacian& lap, std::size_t n_projections, std::uint64_t seed)
      : lap_(lap), count_(n_projections) {
    const auto n = static_cast<Eigen::Index>(lap.size());
    for (std::size_t first = 0; first < count_; first += kColumnBlock) {
      auto width = static_cast<Eigen::Index>(std::min(kColumnBlock, count_ - first));
      RowMatrix block(n, width);
      fill_random_columns(block, seed, first, ProjectionKind::gaussian);
      blocks_.push_back(std::move(block));
    }
  }

  double count_below(double lambda, int degree) const {
    double total = 0.0;
    if (lambda >= lap_.lambda_max_bound()) {
      for (const auto& b : blocks_) total += b.squaredNorm();
      return total / static_cast<double>(count_);
    }
    LowPassFilter h = design_lowpass(lambda, degree, lap_.lambda_max_bound());
    for (const auto& b : blocks_) {
      RowMatrix y = b;
      apply_filter_inplace(lap_, h, y);
      total += y.squaredNorm();
    }
    return total / static_cast<double>(count_);
  }

 private:
  const Laplacian& lap_;
  std::size_t count_;
  std::vector<RowMatrix> blocks_;
};

}  // namespace

double eigencount_below(const Laplacian& lap, double lambda,
                        std::size_t n_projections, std::uint64_t seed, int degree) {
  if (n_projections == 0) throw InvalidParameter("need at least one projection");
  if (!(lambda > 0.0)) throw InvalidParameter("lambda must be positive");
  return EigencountProbe(lap, n_projections, derive_seed(seed, 100)).count_below(lambda, degree);
}

Eigen::VectorXd estimate_squared_diagonal(const Laplacian& lap,
                                          const ChebyshevFilter& filter,
                                          std::size_t n_projections,
                                          std::uint64_t seed, ProjectionKind kind) {
  if (n_projections == 0) throw InvalidParameter("need at least one projection");
  const auto n = static_cast<Eigen::Index>(lap.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  RowMatrix block;
  for (std::size_t first = 0; first < n_projections; first += kColumnBlock) {
    auto width = static_cast<Eigen::Index>(std::min(kColumnBlock, n_projections - first));
    block.resize(n, width);
    fill_random_columns(block, seed, first, kind);
    apply_filter_inplace(lap, filter, block);
    acc += block.rowwise().squaredNorm();
  }
  return acc / static_cast<double>(n_projections);
}

CoherenceProfile estimate_coherence(const Laplacian& lap, const CoherenceOptions& opts) {
  const std::size_t n = lap.size();
  const std::size_t s = opts.target_samples;
  if (s < 1 || s > n) throw InvalidParameter("target samples must lie in [1, n]");
  if (!(opts.epsilon > 0.0)) throw InvalidParameter("epsilon must be positive");
  if (!(opts.c > 0.0)) throw InvalidParameter("projection constant c must be positive");
  const double lmax = lap.lambda_max_bound();

  CoherenceProfile profile;
  if (s == n) {
    // The full-band projector is the identity.
    profile.sq_coherence = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    profile.lambda_s = lmax;
    profile.eigencount = static_cast<double>(n);
    profile.converged = true;
    return profile;
  }

  const std::size_t n_count = opts.eigencount_projections > 0
                                  ? opts.eigencount_projections
                                  : default_eigencount_projections(n);
  EigencountProbe probe(lap, n_count, derive_seed(opts.seed, 100));

  const double target = static_cast<double>(s);
  double lo = 0.0, hi = lmax;
  double hi_count = probe.count_below(hi, opts.degree);
  double lambda_s = hi, count_s = hi_count;
  bool converged = false;
  std::size_t steps = 0;
  while (steps < opts.max_dichotomy_steps) {
    const double mid = 0.5 * (lo + hi);
    const double count = probe.count_below(mid, opts.degree);
    ++steps;
    if (count >= target && count <= (1.0 + opts.epsilon) * target) {
      lambda_s = mid;
      count_s = count;
      converged = true;
      break;
    }
    if (count < target) {
      lo = mid;
    } else {
      hi = mid;
      hi_count = count;
    }
    lambda_s = hi;
    count_s = hi_count;
    if (hi - lo < opts.bracket_tolerance * lmax) {
      // The count jumps across the band inside a vanishing bracket.
      converged = true;
      break;
    }
  }

  const double ln_s = std::log(static_cast<double>(s));
  const auto r = std::max<std::size_t>(
      n_count, static_cast<std::size_t>(std::ceil(opts.c * target * ln_s)));
  LowPassFilter h = design_lowpass(lambda_s, opts.degree, lmax);
  Eigen::VectorXd diag = estimate_squared_diagonal(lap, h, r, derive_seed(opts.seed, 200), opts.projection);
  const double sum = diag.sum();
  if (sum > 0.0) diag *= count_s / sum;

  profile.sq_coherence = std::move(diag);
  profile.lambda_s = lambda_s;
  profile.eigencount = count_s;
  profile.n_projections = r;
  profile.dichotomy_steps = steps;
  profile.converged = converged;
  return profile;
}

CoherenceProfile exact_coherence(const EigenOracle& oracle, std::size_t s) {
  if (s < 1 || s > oracle.size()) throw InvalidParameter("s must lie in [1, n]");
  CoherenceProfile p;
  p.sq_coherence = oracle.projector_diagonal(first_frequencies(s));
  p.lambda_s = oracle.values()(static_cast<Eigen::Index>(s - 1));
  p.eigencount = static_cast<double>(s);
  p.converged = true;
  return p;
}

}  // namespace gsamp
