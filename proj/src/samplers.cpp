#include "gsamp/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <Eigen/Sparse>

#include "gsamp/errors.hpp"
#include "gsamp/rng.hpp"
#include "gsamp/signal.hpp"

namespace gsamp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Argmax over vertices with !taken[v]. Values within rel_tol * max|value| of
// the best are ties and resolve to the lowest index.
Vertex argmax_free(const Eigen::VectorXd& values, const std::vector<char>& taken,
                   double rel_tol = 1e-12) {
  double best = kNegInf;
  double scale = 0.0;
  for (Eigen::Index v = 0; v < values.size(); ++v) {
    if (taken[static_cast<std::size_t>(v)]) continue;
    best = std::max(best, values(v));
    scale = std::max(scale, std::abs(values(v)));
  }
  const double cut = best - rel_tol * scale;
  for (Eigen::Index v = 0; v < values.size(); ++v) {
    if (!taken[static_cast<std::size_t>(v)] && values(v) >= cut) return static_cast<Vertex>(v);
  }
  throw InvalidParameter("no free vertex left to select");
}

void check_sample_count(std::size_t s, std::size_t n) {
  if (s < 1 || s > n) {
    throw InvalidParameter("sample count s=" + std::to_string(s) + " must lie in [1, " +
                           std::to_string(n) + "]");
  }
}

const char* projection_name(ProjectionKind k) {
  return k == ProjectionKind::bernoulli ? "bernoulli" : "gaussian";
}

}  // namespace

void SamplingResult::write_csv(std::ostream& os) const {
  os << "iter,vertex,score\n";
  os.precision(17);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    os << i << ',' << vertices[i] << ',' << (i < scores.size() ? scores[i] : 0.0) << '\n';
  }
}

std::string SamplingResult::metadata_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["params"] = params;
  j["seed"] = params.contains("seed") ? params["seed"] : nlohmann::json(nullptr);
  j["elapsed"] = elapsed;
  j["diagnostics"] = diagnostics;
  return j.dump();
}

SamplingResult wrs_sample(const CoherenceProfile& profile, std::size_t s,
                          std::uint64_t seed) {
  const auto& w = profile.sq_coherence;
  if (s < 1) throw InvalidParameter("sample count must be at least 1");
  if (w.size() == 0) throw InvalidInput("empty coherence profile");
  if ((w.array() < 0.0).any() || !w.allFinite()) {
    throw InvalidInput("coherence profile must be finite and non-negative");
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidInput("coherence profile has no mass");

  auto t0 = Clock::now();
  std::vector<double> cdf(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (Eigen::Index v = 0; v < w.size(); ++v) {
    acc += w(v);
    cdf[static_cast<std::size_t>(v)] = acc;
  }
  SplitMix64 rng(derive_seed(seed, 21));
  SamplingResult res;
  res.method = "wrs";
  for (std::size_t i = 0; i < s; ++i) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto v = static_cast<Vertex>(std::min<std::ptrdiff_t>(it - cdf.begin(), w.size() - 1));
    // Skip zero-mass vertices that upper_bound can land on at the boundary.
    while (w(static_cast<Eigen::Index>(v)) == 0.0 && v > 0) --v;
    res.vertices.push_back(v);
    res.scores.push_back(w(static_cast<Eigen::Index>(v)));
    res.probabilities.push_back(w(static_cast<Eigen::Index>(v)) / total);
  }
  res.elapsed = seconds_since(t0);
  res.params = {{"s", s}, {"seed", seed}};
  return res;
}

SamplingResult dc_sample(const SparseGraph& g, const CoherenceProfile& profile,
                         std::size_t s, double delta) {
  const std::size_t n = g.num_vertices();
  check_sample_count(s, n);
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidParameter("delta must lie in [0, 1]");
  if (static_cast<std::size_t>(profile.sq_coherence.size()) != n) {
    throw InvalidInput("coherence profile does not match the graph");
  }
  const auto& coh = profile.sq_coherence;
  auto t0 = Clock::now();

  SamplingResult res;
  res.method = "dc";
  std::vector<char> taken(n, 0);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t fallbacks = 0;
  const double inf = std::numeric_limits<double>::infinity();

  auto select = [&](Vertex v) {
    taken[v] = 1;
    res.vertices.push_back(v);
    res.scores.push_back(coh(static_cast<Eigen::Index>(v)));
    relax_from_source(g, v, dist);
  };

  select(argmax_free(coh, taken, 0.0));
  Eigen::VectorXd masked(static_cast<Eigen::Index>(n));
  while (res.vertices.size() < s) {
    double far = 0.0;
    for (Vertex v = 0; v < n; ++v) {
      if (!taken[v]) far = std::max(far, dist[v]);
    }
    const double threshold = delta * far;
    bool any = false;
    for (Vertex v = 0; v < n; ++v) {
      bool candidate = !taken[v] && (far == inf ? dist[v] == inf : dist[v] > threshold);
      masked(static_cast<Eigen::Index>(v)) = candidate ? coh(static_cast<Eigen::Index>(v)) : kNegInf;
      any = any || candidate;
    }
    if (!any) {
      ++fallbacks;
      for (Vertex v = 0; v < n; ++v) masked(static_cast<Eigen::Index>(v)) = coh(static_cast<Eigen::Index>(v));
    }
    // Candidates are masked with -inf, so a plain lowest-index scan suffices.
    Vertex best = n;
    for (Vertex v = 0; v < n; ++v) {
      if (taken[v] || masked(static_cast<Eigen::Index>(v)) == kNegInf) continue;
      if (best == n || masked(static_cast<Eigen::Index>(v)) > masked(static_cast<Eigen::Index>(best))) best = v;
    }
    select(best);
  }
  res.elapsed = seconds_since(t0);
  res.params = {{"s", s}, {"delta", delta}};
  res.diagnostics["empty_candidate_fallbacks"] = fallbacks;
  return res;
}

SamplingResult avm_greedy(
    const Eigen::VectorXd& sq_coherence, std::size_t s,
    const std::function<Eigen::VectorXd(Vertex)>& delta_of,
    const std::function<Eigen::VectorXd(Vertex, const Eigen::VectorXd&)>& numerator_of,
    const GreedyObserver& observer) {
  const auto n = static_cast<std::size_t>(sq_coherence.size());
  check_sample_count(s, n);
  SamplingResult res;
  res.method = "avm";
  GreedyState state;
  state.running_penalty = Eigen::VectorXd::Zero(sq_coherence.size());
  std::vector<char> taken(n, 0);
  for (std::size_t it = 0; it < s; ++it) {
    Eigen::VectorXd score = sq_coherence - state.running_penalty;
    Vertex v = argmax_free(score, taken);
    taken[v] = 1;
    res.vertices.push_back(v);
    res.scores.push_back(score(static_cast<Eigen::Index>(v)));

    Eigen::VectorXd d = delta_of(v);
    const double norm_sq = d.squaredNorm();
    if (norm_sq > 0.0) {
      if (numerator_of) {
        state.running_penalty += numerator_of(v, d).array().square().matrix() / norm_sq;
      } else {
        state.running_penalty += d.array().square().matrix() / norm_sq;
      }
    }
    state.selected.push_back(v);
    state.norms_sq.push_back(norm_sq);
    state.d_selected.push_back(std::move(d));
    if (observer) observer(state);
  }
  return res;
}

SamplingResult avm_sample(const Laplacian& lap, const AvmOptions& opts) {
  check_sample_count(opts.s, lap.size());
  auto t0 = Clock::now();
  CoherenceOptions co;
  co.target_samples = opts.s;
  co.c = opts.c;
  co.epsilon = opts.epsilon;
  co.degree = opts.degree;
  co.seed = opts.seed;
  co.projection = opts.projection;
  CoherenceProfile profile = estimate_coherence(lap, co);
  LowPassFilter h = design_lowpass(profile.lambda_s, opts.degree, lap.lambda_max_bound());
  SamplingResult res = avm_greedy(
      profile.sq_coherence, opts.s, [&](Vertex v) { return filter_delta(lap, h, v); }, {},
      opts.observer);
  res.elapsed = seconds_since(t0);
  res.params = {{"s", opts.s},           {"c", opts.c},
                {"epsilon", opts.epsilon}, {"degree", opts.degree},
                {"seed", opts.seed},     {"projection", projection_name(opts.projection)}};
  res.diagnostics = {{"lambda_s", profile.lambda_s},
                     {"eigencount", profile.eigencount},
                     {"dichotomy_steps", profile.dichotomy_steps},
                     {"n_projections", profile.n_projections},
                     {"converged", profile.converged}};
  return res;
}

SamplingResult avm_sample_exact(const EigenOracle& oracle, std::size_t s,
                                const GreedyObserver& observer) {
  check_sample_count(s, oracle.size());
  auto t0 = Clock::now();
  const Eigen::MatrixXd u = oracle.basis(first_frequencies(s));
  const Eigen::VectorXd coh = u.rowwise().squaredNorm();
  SamplingResult res = avm_greedy(
      coh, s,
      [&](Vertex v) -> Eigen::VectorXd {
        return u * u.row(static_cast<Eigen::Index>(v)).transpose();
      },
      {}, observer);
  res.method = "avm_exact";
  res.elapsed = seconds_since(t0);
  res.params = {{"s", s}};
  return res;
}

SamplingResult exact_greedy_sample(const EigenOracle& oracle, std::size_t s,
                                   const FrequencySet& freqs) {
  const std::size_t n = oracle.size();
  check_sample_count(s, n);
  auto t0 = Clock::now();
  // With U_R orthonormal, <d_v, d_w> = y_v . y_w for the rows y of U_R, so
  // projecting d_v onto span(D_m) is projecting y_v onto the row space of
  // U_{S,R}. The basis below spans that row space.
  const Eigen::MatrixXd y = oracle.basis(freqs);
  Eigen::VectorXd residual = y.rowwise().squaredNorm();
  const double scale = residual.maxCoeff();
  std::vector<Eigen::VectorXd> basis;
  std::vector<char> taken(n, 0);
  std::size_t dropped = 0;

  SamplingResult res;
  res.method = "exact_greedy";
  for (std::size_t it = 0; it < s; ++it) {
    Vertex v = argmax_free(residual, taken);
    taken[v] = 1;
    res.vertices.push_back(v);
    res.scores.push_back(residual(static_cast<Eigen::Index>(v)));

    Eigen::VectorXd q = y.row(static_cast<Eigen::Index>(v)).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) q -= b.dot(q) * b;
    }
    // Directions with squared norm below 1e-10 of the largest coherence are
    // numerically in the span already (pseudo-inverse cutoff).
    if (q.squaredNorm() <= 1e-10 * scale) {
      ++dropped;
      continue;
    }
    q.normalize();
    Eigen::VectorXd proj = y * q;
    residual -= proj.array().square().matrix();
    basis.push_back(std::move(q));
  }
  res.elapsed = seconds_since(t0);
  res.params = {{"s", s}, {"bandwidth", freqs.size()}};
  res.diagnostics = {{"rank", basis.size()}, {"rank_deficient", dropped > 0}};
  return res;
}

SamplingResult sp_ideal_sample(const EigenOracle& oracle, std::size_t s) {
  const std::size_t n = oracle.size();
  if (s < 1 || s >= n) throw InvalidParameter("ideal SP requires 1 <= s < n");
  auto t0 = Clock::now();
  const Eigen::MatrixXd& u = oracle.vectors();
  std::vector<char> taken(n, 0);
  SamplingResult res;
  res.method = "sp_ideal";
  std::size_t rank_drops = 0;
  for (std::size_t m = 0; m < s; ++m) {
    const auto r = static_cast<Eigen::Index>(m + 1);
    const Eigen::MatrixXd ur = u.leftCols(r);
    Eigen::VectorXd score = ur.rowwise().squaredNorm();
    if (m > 0) {
      Eigen::MatrixXd sel(static_cast<Eigen::Index>(m), r);
      for (std::size_t i = 0; i < m; ++i) {
        sel.row(static_cast<Eigen::Index>(i)) = ur.row(static_cast<Eigen::Index>(res.vertices[i]));
      }
      // Orthonormal basis of the row space of U_{S,R_m}; pseudo-inverse cutoff
      // on the Gram eigenvalues sigma^2.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(sel.transpose(), Eigen::ComputeThinU);
      const auto& sv = svd.singularValues();
      Eigen::Index k = 0;
      while (k < sv.size() && sv(k) * sv(k) > 1e-10 * sv(0) * sv(0)) ++k;
      if (k < sv.size()) ++rank_drops;
      Eigen::MatrixXd proj = ur * svd.matrixU().leftCols(k);
      score -= proj.rowwise().squaredNorm();
    }
    Vertex v = argmax_free(score, taken);
    taken[v] = 1;
    res.vertices.push_back(v);
    res.scores.push_back(score(static_cast<Eigen::Index>(v)));
  }
  res.elapsed = seconds_since(t0);
  res.params = {{"s", s}};
  res.diagnostics = {{"rank_deficient_steps", rank_drops}};
  return res;
}

namespace {

// Smallest eigenpair of A = P^T Lt^k P restricted to the free vertices, where
// Lt = L / lambda_max_bound has spectrum in [0, 1].
class RestrictedPower {
 public:
  RestrictedPower(const Laplacian& lap, int k) : lap_(lap), k_(k) {
    scale_ = 1.0 / lap.lambda_max_bound();
    buf_a_.resize(static_cast<Eigen::Index>(lap.size()));
    buf_b_.resize(static_cast<Eigen::Index>(lap.size()));
  }

  // y = A x; x and y are full-length with zeros on taken vertices.
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y, const std::vector<char>& taken) {
    buf_a_ = x;
    for (int p = 0; p < k_; ++p) {
      lap_.apply(std::span<const double>(buf_a_.data(), static_cast<std::size_t>(buf_a_.size())),
                 std::span<double>(buf_b_.data(), static_cast<std::size_t>(buf_b_.size())));
      buf_b_ *= scale_;
      buf_a_.swap(buf_b_);
    }
    y = buf_a_;
    for (std::size_t v = 0; v < taken.size(); ++v) {
      if (taken[v]) y(static_cast<Eigen::Index>(v)) = 0.0;
    }
    ++applications_;
  }

  std::size_t applications() const { return applications_; }

 private:
  const Laplacian& lap_;
  int k_;
  double scale_;
  Eigen::VectorXd buf_a_, buf_b_;
  std::size_t applications_ = 0;
};

struct EigenSolve {
  Eigen::VectorXd vector;
  bool converged = false;
  std::size_t applications = 0;
};

// Block LOBPCG with Rayleigh-Ritz over [X, W, P]. The block is warm-started
// from the previous step and only its leading column has to reach `tol`;
// the extra columns carry the nearby eigenvectors, which keeps convergence
// usable when the bottom of the restricted spectrum is clustered.
EigenSolve lobpcg_smallest(RestrictedPower& op, Eigen::MatrixXd& block,
                           const std::vector<char>& taken, double tol,
                           std::size_t max_applications,
                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond,
                           SplitMix64& fill) {
  const std::size_t start = op.applications();
  const Eigen::Index n = block.rows();
  EigenSolve out;
  auto mask = [&](auto&& v) {
    for (std::size_t i = 0; i < taken.size(); ++i) {
      if (taken[i]) v(static_cast<Eigen::Index>(i)) = 0.0;
    }
  };
  auto refill = [&](Eigen::Ref<Eigen::VectorXd> v) {
    for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<double>(fill() >> 11) * 0x1.0p-53 - 0.5;
    mask(v);
  };
  // Orthonormalizes the columns of `cand` against `basis` and each other,
  // dropping those that collapse.
  auto extend = [](std::vector<Eigen::VectorXd>& basis, const Eigen::MatrixXd& cand) {
    for (Eigen::Index c = 0; c < cand.cols(); ++c) {
      Eigen::VectorXd w = cand.col(c);
      const double n0 = w.norm();
      if (n0 == 0.0) continue;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < basis.size(); ++i) w -= basis[i].dot(w) * basis[i];
      }
      const double nw = w.norm();
      if (nw <= 1e-10 * n0) continue;
      basis.push_back(w / nw);
    }
  };
  auto apply_all = [&](const std::vector<Eigen::VectorXd>& vs, std::size_t from, Eigen::MatrixXd& av) {
    Eigen::VectorXd y;
    for (std::size_t i = from; i < vs.size(); ++i) {
      op.apply(vs[i], y, taken);
      av.col(static_cast<Eigen::Index>(i)) = y;
    }
  };
  auto to_matrix = [n](const std::vector<Eigen::VectorXd>& vs) {
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t i = 0; i < vs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = vs[i];
    return m;
  };

  const Eigen::Index bs = block.cols();
  for (Eigen::Index c = 0; c < bs; ++c) mask(block.col(c));
  std::vector<Eigen::VectorXd> basis;
  for (int attempt = 0; attempt < 4 && static_cast<Eigen::Index>(basis.size()) < bs; ++attempt) {
    basis.clear();
    extend(basis, block);
    for (Eigen::Index c = 0; c < bs; ++c) {
      if (static_cast<Eigen::Index>(basis.size()) >= bs) break;
      if (c >= static_cast<Eigen::Index>(basis.size())) refill(block.col(c));
    }
  }
  Eigen::MatrixXd x = to_matrix(basis);
  Eigen::MatrixXd ax(n, x.cols());
  apply_all(basis, 0, ax);
  Eigen::MatrixXd p;
  Eigen::VectorXd theta;

  auto rayleigh_ritz = [&](const Eigen::MatrixXd& sb, const Eigen::MatrixXd& asb, Eigen::Index keep) {
    Eigen::MatrixXd g = sb.transpose() * asb;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    Eigen::MatrixXd y = es.eigenvectors().leftCols(keep);
    theta = es.eigenvalues().head(keep);
    return y;
  };
  {
    Eigen::MatrixXd y = rayleigh_ritz(x, ax, x.cols());
    x = x * y;
    ax = ax * y;
  }

  while (true) {
    Eigen::MatrixXd r = ax - x * theta.asDiagonal();
    if (r.col(0).norm() <= tol) {
      out.converged = true;
      break;
    }
    if (op.applications() - start >= max_applications) break;

    Eigen::MatrixXd w(n, r.cols());
    for (Eigen::Index c = 0; c < r.cols(); ++c) {
      w.col(c) = precond ? precond(r.col(c)) : Eigen::VectorXd(r.col(c));
      mask(w.col(c));
    }
    std::vector<Eigen::VectorXd> sv;
    for (Eigen::Index c = 0; c < x.cols(); ++c) sv.push_back(x.col(c));
    const std::size_t nx = sv.size();
    extend(sv, w);
    if (p.cols() > 0) extend(sv, p);
    Eigen::MatrixXd sb = to_matrix(sv);
    Eigen::MatrixXd asb(n, sb.cols());
    asb.leftCols(x.cols()) = ax;
    apply_all(sv, nx, asb);

    Eigen::MatrixXd y = rayleigh_ritz(sb, asb, x.cols());
    const auto nxi = static_cast<Eigen::Index>(nx);
    p = sb.rightCols(sb.cols() - nxi) * y.bottomRows(sb.cols() - nxi);
    x = sb * y;
    ax = asb * y;
  }
  block = x;
  out.vector = x.col(0);
  out.applications = op.applications() - start;
  return out;
}

// T = (Lt_UU + sigma I)^{-q} on the free vertices U, with taken vertices
// decoupled as identity rows. The sparsity pattern is analysed once and only
// the numeric factorization is redone per step.
class DirichletPreconditioner {
 public:
  DirichletPreconditioner(const Laplacian& lap, int power) : lap_(lap), power_(power) {
    const auto n = static_cast<Eigen::Index>(lap.size());
    const double inv = 1.0 / lap.lambda_max_bound();
    std::vector<Eigen::Triplet<double>> trip;
    const auto& rp = lap.row_ptr();
    const auto& ci = lap.col_idx();
    const auto& va = lap.values();
    for (std::size_t i = 0; i < lap.size(); ++i) {
      bool diag = false;
      for (std::size_t q = rp[i]; q < rp[i + 1]; ++q) {
        double v = va[q] * inv;
        if (ci[q] == i) {
          v += kShift;
          diag = true;
        }
        trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ci[q]), v);
      }
      if (!diag) trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), kShift);
    }
    base_.resize(n, n);
    base_.setFromTriplets(trip.begin(), trip.end());
    base_.makeCompressed();
    solver_.analyzePattern(base_);
  }

  void refactor(const std::vector<char>& taken) {
    work_ = base_;
    for (Eigen::Index col = 0; col < work_.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(work_, col); it; ++it) {
        const bool t = taken[static_cast<std::size_t>(it.row())] || taken[static_cast<std::size_t>(it.col())];
        if (t) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
      }
    }
    solver_.factorize(work_);
    ok_ = solver_.info() == Eigen::Success;
  }

  bool ok() const { return ok_; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& r) const {
    Eigen::VectorXd z = r;
    for (int i = 0; i < power_; ++i) z = solver_.solve(z);
    return z;
  }

 private:
  static constexpr double kShift = 1e-8;
  const Laplacian& lap_;
  int power_;
  Eigen::SparseMatrix<double> base_, work_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  bool ok_ = false;
};

// Dense minimizer of psi^T L^k psi / psi^T psi with psi = 0 on the taken set,
// computed in the eigenbasis. With psi = U c the constraint is U_{S,:} c = 0,
// so c = N y for an orthonormal null basis N and the objective becomes
// ||diag(mu^{k/2}) N y||^2 with mu the eigenvalues scaled into [0, 1]. The
// rows of that factor are graded, so they are sorted largest first before a
// column-pivoted QR, and the smallest right singular vector is taken from the
// triangular factor by inverse iteration.
class DenseProxy {
 public:
  DenseProxy(const Laplacian& lap, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap.to_dense());
    const auto n = es.eigenvalues().size();
    const double top = std::max(es.eigenvalues()(n - 1), 1e-300);
    u_ = es.eigenvectors().rowwise().reverse();
    scale_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = std::max(es.eigenvalues()(n - 1 - i), 0.0) / top;
      scale_(i) = std::pow(mu, 0.5 * k);
    }
  }

  Eigen::VectorXd minimizer(const std::vector<Vertex>& taken_list) const {
    const auto n = u_.rows();
    const auto m = static_cast<Eigen::Index>(taken_list.size());
    Eigen::MatrixXd null_basis;
    if (m == 0) {
      null_basis = Eigen::MatrixXd::Identity(n, n);
    } else {
      Eigen::MatrixXd rows(n, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        rows.col(i) = u_.row(static_cast<Eigen::Index>(taken_list[static_cast<std::size_t>(i)])).transpose();
      }
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(rows);
      Eigen::MatrixXd q = qr.householderQ();
      null_basis = q.rightCols(n - m);
    }
    Eigen::MatrixXd g = scale_.asDiagonal() * null_basis;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
    const auto p = g.cols();
    Eigen::MatrixXd r = qr.matrixR().topRows(p).triangularView<Eigen::Upper>();
    Eigen::VectorXd x(p);
    if (std::abs(r(p - 1, p - 1)) <= 1e-280 * std::abs(r(0, 0))) {
      // exact null direction: back-substitute with the last coordinate fixed
      x.setZero();
      x(p - 1) = 1.0;
      if (p > 1) {
        x.head(p - 1) = -r.topLeftCorner(p - 1, p - 1).triangularView<Eigen::Upper>().solve(
            r.col(p - 1).head(p - 1));
      }
      x.normalize();
    } else {
      // inverse iteration on R^T R; triangular solves keep the graded
      // structure that a dense SVD of R would smear out
      x.setOnes();
      x.normalize();
      for (int it = 0; it < 2000; ++it) {
        Eigen::VectorXd next = r.triangularView<Eigen::Upper>().transpose().solve(x);
        next.normalize();
        next = r.triangularView<Eigen::Upper>().solve(next);
        next.normalize();
        const double change = std::min((next - x).norm(), (next + x).norm());
        x = next;
        if (change < 1e-15) break;
      }
    }
    Eigen::VectorXd y = qr.colsPermutation() * x;
    return u_ * (null_basis * y);
  }

 private:
  Eigen::MatrixXd u_;       // eigenvectors, largest eigenvalue first
  Eigen::VectorXd scale_;   // mu^{k/2} in the same order
};

}  // namespace

SamplingResult sp_finite_k_sample(const Laplacian& lap, const SpOptions& opts) {
  const std::size_t n = lap.size();
  check_sample_count(opts.s, n);
  if (opts.k < 1) throw InvalidParameter("SP requires k >= 1");
  if (!(lap.lambda_max_bound() > 0.0)) throw InvalidInput("graph has no edges");
  auto t0 = Clock::now();
  const bool dense = opts.solver == SpSolver::dense ||
                     (opts.solver == SpSolver::automatic && n <= opts.dense_max_n);

  SamplingResult res;
  res.method = "sp_k";
  std::vector<char> taken(n, 0);
  std::size_t unconverged = 0, applications = 0;

  std::optional<DenseProxy> proxy;
  if (dense) proxy.emplace(lap, opts.k);
  RestrictedPower op(lap, opts.k);
  std::optional<DirichletPreconditioner> precond;
  if (!dense && opts.precondition) precond.emplace(lap, opts.precondition_power);
  Eigen::VectorXd psi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  SplitMix64 fill(0x5eed);
  Eigen::MatrixXd block;
  if (!dense) {
    block.resize(static_cast<Eigen::Index>(n),
                 static_cast<Eigen::Index>(std::clamp<std::size_t>(opts.block_size, 1, n)));
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) {
        block(i, c) = c == 0 ? 1.0 : static_cast<double>(fill() >> 11) * 0x1.0p-53 - 0.5;
      }
    }
  }

  for (std::size_t m = 0; m < opts.s; ++m) {
    if (dense) {
      psi = proxy->minimizer(res.vertices);
      for (Vertex v : res.vertices) psi(static_cast<Eigen::Index>(v)) = 0.0;
    } else {
      std::function<Eigen::VectorXd(const Eigen::VectorXd&)> pc;
      if (precond && m > 0) {
        precond->refactor(taken);
        if (precond->ok()) pc = std::ref(*precond);
      }
      EigenSolve sol = lobpcg_smallest(op, block, taken, opts.tolerance, opts.max_applications, pc, fill);
      psi = sol.vector;
      applications += sol.applications;
      if (!sol.converged) ++unconverged;
    }
    Eigen::VectorXd mag = psi.cwiseAbs();
    Vertex v = argmax_free(mag, taken, 1e-9);
    taken[v] = 1;
    psi(static_cast<Eigen::Index>(v)) = 0.0;
    res.vertices.push_back(v);
    res.scores.push_back(mag(static_cast<Eigen::Index>(v)));
  }
  res.elapsed = seconds_since(t0);
  res.params = {{"s", opts.s}, {"k", opts.k}, {"solver", dense ? "dense" : "lobpcg"}};
  res.diagnostics = {{"unconverged_steps", unconverged}, {"operator_applications", applications}};
  return res;
}

KernelSpec identity_kernel() {
  return {"identity", [](double) { return 1.0; }};
}

KernelSpec inverse_kernel(double delta) {
  if (!(delta > 0.0)) throw InvalidParameter("inverse kernel needs delta > 0");
  return {"inverse(" + std::to_string(delta) + ")", [delta](double l) { return 1.0 / (l + delta); }};
}

SamplingResult avm_kernel_sample(const Laplacian& lap, const KernelSpec& kernel,
                                 const AvmKernelOptions& opts) {
  const std::size_t n = lap.size();
  check_sample_count(opts.s, n);
  if (!kernel.g) throw InvalidKernel("kernel function is empty");
  const double lmax = lap.lambda_max_bound();
  if (!(lmax > 0.0)) throw InvalidInput("graph has no edges");
  for (int i = 0; i <= 1000; ++i) {
    double g = kernel.g(lmax * i / 1000.0);
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw InvalidKernel("kernel is not positive on the spectrum at lambda=" +
                          std::to_string(lmax * i / 1000.0));
    }
  }
  auto t0 = Clock::now();
  ChebyshevFilter root = chebyshev_interpolate(
      [&](double l) { return std::sqrt(kernel.g(l)); }, opts.degree, lmax);
  std::size_t r = opts.n_projections;
  if (r == 0) {
    r = std::max(default_eigencount_projections(n),
                 static_cast<std::size_t>(std::ceil(opts.c * static_cast<double>(opts.s) *
                                                    std::log(static_cast<double>(opts.s)))));
  }
  Eigen::VectorXd coh = estimate_squared_diagonal(lap, root, r, derive_seed(opts.seed, 300), opts.projection);
  SamplingResult res = avm_greedy(
      coh, opts.s, [&](Vertex v) { return filter_delta(lap, root, v); },
      [&](Vertex, const Eigen::VectorXd& d) {
        RowMatrix x = d;
        apply_filter_inplace(lap, root, x);
        return Eigen::VectorXd(x.col(0));
      });
  res.method = "avm_kernel";
  res.elapsed = seconds_since(t0);
  res.params = {{"s", opts.s}, {"kernel", kernel.name}, {"degree", opts.degree},
                {"seed", opts.seed}, {"n_projections", r}};
  return res;
}

double det_update_term(const Eigen::MatrixXd& d_mat, const Eigen::VectorXd& d) {
  if (d_mat.cols() == 0) return d.squaredNorm();
  Eigen::MatrixXd gram = d_mat.transpose() * d_mat;
  Eigen::VectorXd b = d_mat.transpose() * d;
  return d.squaredNorm() - b.dot(gram.ldlt().solve(b));
}

double gram_determinant(const Eigen::MatrixXd& d_mat) {
  if (d_mat.cols() == 0) return 1.0;
  return (d_mat.transpose() * d_mat).determinant();
}

Eigen::MatrixXd filtered_delta_matrix(const EigenOracle& oracle, const FrequencySet& freqs,
                                      const std::vector<Vertex>& vertices) {
  const Eigen::MatrixXd u = oracle.basis(freqs);
  Eigen::MatrixXd out(u.rows(), static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = u * u.row(static_cast<Eigen::Index>(vertices[j])).transpose();
  }
  return out;
}

}  // namespace gsamp
