#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gsamp/eigen_oracle.hpp"
#include "gsamp/errors.hpp"
#include "gsamp/graph.hpp"
#include "gsamp/laplacian.hpp"
#include "gsamp/rng.hpp"
#include "gsamp/spectral.hpp"
#include "oracles.hpp"

using namespace gsamp;

namespace {

Laplacian comb(const SparseGraph& g) { return laplacian(g, LaplacianKind::combinatorial); }

double true_lambda_max(const Laplacian& lap) {
  return oracle::jacobi_eigen(lap.to_dense()).values.maxCoeff();
}

}  // namespace

TEST_CASE("lambda_max bound on known spectra") {
  Laplacian p3 = comb(gen_path(3));
  CHECK(p3.lambda_max_bound() >= 3.0);
  CHECK(p3.lambda_max_bound() <= 3.0 * 1.01 + 1e-12);
  Laplacian k2 = comb(gen_path(2));
  CHECK(k2.lambda_max_bound() >= 2.0);
  Laplacian norm = laplacian(gen_sensor_knn(50, 5, 1), LaplacianKind::normalized);
  CHECK(norm.lambda_max_bound() <= 2.02);
  CHECK(norm.lambda_max_bound() >= true_lambda_max(norm));
}

TEST_CASE("lambda_max bound never falls below the true largest eigenvalue") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SparseGraph g = seed % 3 == 0   ? gen_erdos_renyi(40, 0.15, seed)
                    : seed % 3 == 1 ? gen_sensor_knn(40, 4, seed)
                                    : gen_barabasi_albert(40, 2, seed);
    for (auto kind : {LaplacianKind::combinatorial, LaplacianKind::normalized}) {
      Laplacian lap = laplacian(g, kind);
      CHECK(lap.lambda_max_bound() >= true_lambda_max(lap) - 1e-12);
      CHECK(lambda_max_bound(lap) == lap.lambda_max_bound());
    }
  }
}

TEST_CASE("eigen oracle is orthonormal and diagonalizes L") {
  Laplacian lap = comb(gen_sensor_knn(80, 6, 4));
  EigenOracle o(lap);
  const auto& u = o.vectors();
  CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(80, 80)).cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::MatrixXd l = lap.to_dense();
  CHECK((l * u - u * o.values().asDiagonal()).norm() <= 1e-8 * l.norm());
  for (Eigen::Index i = 1; i < 80; ++i) CHECK(o.values()(i) >= o.values()(i - 1));
  auto ref = oracle::jacobi_eigen(l);
  CHECK((o.values() - ref.values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("low-pass design: all-pass and near-zero cutoffs") {
  const double lmax = 4.0;
  LowPassFilter all = design_lowpass(lmax * 0.99995, 30, lmax);
  for (int i = 0; i <= 100; ++i) CHECK(all.evaluate(lmax * i / 100.0) == doctest::Approx(1.0).epsilon(1e-9));
  LowPassFilter tiny = design_lowpass(1e-6, 30, lmax);
  for (int i = 20; i <= 100; ++i) CHECK(std::abs(tiny.evaluate(lmax * i / 100.0)) <= 0.05);
  CHECK(tiny.evaluate(0.0) > 0.0);
}

TEST_CASE("low-pass design: pointwise error away from the transition band") {
  const double lmax = 10.0;
  for (double frac : {0.3, 0.5, 0.7}) {
    const double cut = frac * lmax;
    LowPassFilter h = design_lowpass(cut, 30, lmax);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double l = lmax * i / 999.0;
      if (std::abs(l - cut) <= 0.05 * lmax) continue;
      const double ideal = l <= cut ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(h.evaluate(l) - ideal));
    }
    CHECK(worst <= 0.1);
  }
}

TEST_CASE("low-pass design: overshoot stays in [-0.15, 1.15]") {
  const double lmax = 7.0;
  for (int c = 1; c < 50; ++c) {
    for (int d : {5, 10, 30, 60}) {
      LowPassFilter h = design_lowpass(lmax * c / 50.0, d, lmax);
      for (int i = 0; i <= 500; ++i) {
        const double v = h.evaluate(lmax * i / 500.0);
        CHECK(v >= -0.15);
        CHECK(v <= 1.15);
      }
    }
  }
}

TEST_CASE("low-pass design: invalid arguments") {
  CHECK_THROWS_AS(design_lowpass(1.0, 30, 0.0), InvalidParameter);
  CHECK_THROWS_AS(design_lowpass(0.0, 30, 2.0), InvalidParameter);
  CHECK_THROWS_AS(design_lowpass(1.0, 0, 2.0), InvalidParameter);
}

TEST_CASE("filter coefficients serialize to csv") {
  std::ostringstream os;
  design_lowpass(1.0, 3, 2.0).write_csv(os);
  const std::string out = os.str();
  CHECK(out.find("index,coefficient") == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 5);
}

TEST_CASE("apply_filter: all-pass returns the input") {
  Laplacian lap = comb(gen_sensor_knn(60, 5, 2));
  ChebyshevFilter one{{1.0}, lap.lambda_max_bound()};
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(60, 5);
  CHECK((apply_filter(lap, one, x) - x).norm() == 0.0);
}

TEST_CASE("apply_filter matches the Chebyshev polynomial of the dense matrix") {
  Laplacian lap = comb(gen_erdos_renyi(40, 0.2, 6));
  LowPassFilter h = design_lowpass(2.0, 12, lap.lambda_max_bound());
  auto eig = oracle::jacobi_eigen(lap.to_dense());
  Eigen::VectorXd hv(40);
  for (Eigen::Index i = 0; i < 40; ++i) hv(i) = h.evaluate(eig.values(i));
  Eigen::MatrixXd dense = eig.vectors * hv.asDiagonal() * eig.vectors.transpose();
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 20);
  CHECK((apply_filter(lap, h, x) - dense * x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("apply_filter: filtered delta approximates the exact projector column") {
  Laplacian lap = comb(gen_sensor_knn(100, 8, 12));
  EigenOracle o(lap);
  const double cut = 0.5 * (o.values()(19) + o.values()(20));
  LowPassFilter h = design_lowpass(cut, 50, lap.lambda_max_bound());
  // root mean square of ||p(L) e_v - d_v|| over all vertices
  double sq = 0.0;
  for (Vertex v = 0; v < 100; ++v) {
    Eigen::VectorXd exact = exact_filtered_delta(o, first_frequencies(20), v);
    sq += (filter_delta(lap, h, v) - exact).squaredNorm();
  }
  CHECK(std::sqrt(sq / 100.0) <= 0.1);
}

TEST_CASE("apply_filter is linear and independent of the thread count") {
  Laplacian lap = comb(gen_sensor_knn(120, 6, 3));
  LowPassFilter h = design_lowpass(1.0, 30, lap.lambda_max_bound());
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(120, 37), y = Eigen::MatrixXd::Random(120, 37);
  Eigen::MatrixXd lhs = apply_filter(lap, h, 2.5 * x - 0.75 * y);
  Eigen::MatrixXd rhs = 2.5 * apply_filter(lap, h, x) - 0.75 * apply_filter(lap, h, y);
  CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
  Eigen::MatrixXd one = apply_filter(lap, h, x, 1);
  Eigen::MatrixXd four = apply_filter(lap, h, x, 4);
  CHECK((one.array() == four.array()).all());
  // a column filtered alone equals the same column filtered in a block
  Eigen::MatrixXd single = apply_filter(lap, h, x.col(20));
  CHECK((single.col(0).array() == one.col(20).array()).all());
}

TEST_CASE("apply_filter output vanishes beyond d hops") {
  SparseGraph g = gen_path(60);
  Laplacian lap = comb(g);
  LowPassFilter h = design_lowpass(0.5, 7, lap.lambda_max_bound());
  Eigen::VectorXd out = filter_delta(lap, h, 10);
  auto hops = oracle::hops_from(g, 10);
  for (Vertex v = 0; v < 60; ++v) {
    if (hops[v] > 7) CHECK(std::abs(out(static_cast<Eigen::Index>(v))) <= 1e-12);
  }
  CHECK(std::abs(out(17)) > 0.0);
}

TEST_CASE("eigencount: full interval counts every eigenvalue") {
  Laplacian lap = comb(gen_sensor_knn(200, 6, 5));
  double c = eigencount_below(lap, lap.lambda_max_bound(), 60, 3);
  CHECK(std::abs(c - 200.0) <= 20.0);
}

TEST_CASE("eigencount: below the Fiedler value of a connected graph") {
  SparseGraph g = gen_sensor_knn(150, 8, 2);
  REQUIRE(g.num_components() == 1);
  Laplacian lap = comb(g);
  EigenOracle o(lap);
  const double lambda = 0.5 * o.values()(1);
  double c = eigencount_below(lap, lambda, 200, 9, 60);
  CHECK(std::abs(c - 1.0) <= 0.5);
}

TEST_CASE("eigencount: P3 below 2 counts two eigenvalues") {
  Laplacian lap = comb(gen_path(3));
  double c = eigencount_below(lap, 2.0, 2000, 4);
  CHECK(std::abs(c - 2.0) <= 0.3);
}

TEST_CASE("eigencount is nondecreasing in lambda with fixed probes") {
  Laplacian lap = comb(gen_sensor_knn(150, 6, 8));
  double prev = -1.0;
  for (int i = 1; i <= 40; ++i) {
    double c = eigencount_below(lap, lap.lambda_max_bound() * i / 40.0, 200, 77);
    CHECK(c >= prev - 1e-9);
    prev = c;
  }
}

TEST_CASE("coherence estimate: s = n gives unit coherences") {
  Laplacian lap = comb(gen_sensor_knn(60, 5, 3));
  CoherenceOptions co;
  co.target_samples = 60;
  co.seed = 3;
  CoherenceProfile p = estimate_coherence(lap, co);
  CHECK(p.lambda_s >= true_lambda_max(lap));
  CHECK((p.sq_coherence.array() - 1.0).abs().maxCoeff() <= 0.1);
}

TEST_CASE("coherence estimate ranks vertices like the exact coherence") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SparseGraph g = gen_sensor_knn(100, 8, seed);
    Laplacian lap = comb(g);
    EigenOracle o(lap);
    CoherenceOptions co;
    co.target_samples = 20;
    co.c = 10;
    co.seed = seed;
    CoherenceProfile p = estimate_coherence(lap, co);
    CHECK(oracle::spearman(p.sq_coherence, o.projector_diagonal(first_frequencies(20))) >= 0.9);
    CHECK(p.n_projections >= static_cast<std::size_t>(std::ceil(10 * 20 * std::log(20.0))));
  }
}

TEST_CASE("coherence estimate: bounds, determinism and errors") {
  Laplacian lap = comb(gen_sensor_knn(300, 8, 4));
  CoherenceOptions co;
  co.target_samples = 40;
  co.seed = 17;
  CoherenceProfile a = estimate_coherence(lap, co), b = estimate_coherence(lap, co);
  CHECK((a.sq_coherence.array() == b.sq_coherence.array()).all());
  CHECK(a.lambda_s == b.lambda_s);
  CHECK(a.sq_coherence.minCoeff() >= 0.0);
  CHECK(a.sq_coherence.maxCoeff() <= 1.1);
  CHECK(a.sq_coherence.sum() == doctest::Approx(a.eigencount).epsilon(1e-9));
  CHECK(a.converged);
  CHECK(a.eigencount >= 40.0 * 0.9);
  co.target_samples = 301;
  CHECK_THROWS_AS(estimate_coherence(lap, co), InvalidParameter);
}

TEST_CASE("coherence estimate: Gaussian projections are also supported") {
  Laplacian lap = comb(gen_sensor_knn(100, 8, 6));
  EigenOracle o(lap);
  CoherenceOptions co;
  co.target_samples = 20;
  co.seed = 2;
  co.projection = ProjectionKind::gaussian;
  CoherenceProfile p = estimate_coherence(lap, co);
  CHECK(oracle::spearman(p.sq_coherence, o.projector_diagonal(first_frequencies(20))) >= 0.8);
}

TEST_CASE("exact coherence sums to the bandwidth") {
  Laplacian lap = comb(gen_sensor_knn(70, 6, 9));
  EigenOracle o(lap);
  CoherenceProfile p = exact_coherence(o, 15);
  CHECK(p.sq_coherence.sum() == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(std::abs(p.sq_coherence.sum() - 15.0) <= 1e-9);
}

TEST_CASE("exact filtered deltas") {
  Laplacian lap = comb(gen_sensor_knn(50, 5, 7));
  EigenOracle o(lap);
  FrequencySet all = first_frequencies(50);
  for (Vertex v : {0u, 13u, 49u}) {
    Eigen::VectorXd d = exact_filtered_delta(o, all, v);
    Eigen::VectorXd delta = Eigen::VectorXd::Unit(50, static_cast<Eigen::Index>(v));
    CHECK((d - delta).cwiseAbs().maxCoeff() <= 1e-10);
  }
  FrequencySet r = first_frequencies(12);
  Eigen::MatrixXd p = o.projector(r);
  for (Vertex v = 0; v < 50; v += 5) {
    Eigen::VectorXd dv = exact_filtered_delta(o, r, v);
    CHECK(dv.squaredNorm() == doctest::Approx(p(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v))).epsilon(1e-12));
    // filtering twice changes nothing
    CHECK((p * dv - dv).cwiseAbs().maxCoeff() <= 1e-10);
    for (Vertex w = 0; w < 50; w += 7) {
      Eigen::VectorXd dw = exact_filtered_delta(o, r, w);
      CHECK(std::abs(dw.dot(dv) - dw(static_cast<Eigen::Index>(v))) <= 1e-10);
    }
  }
}

TEST_CASE("reproducing property for bandlimited signals") {
  Laplacian lap = comb(gen_sensor_knn(90, 6, 21));
  EigenOracle o(lap);
  FrequencySet r = first_frequencies(25);
  Eigen::MatrixXd u = o.basis(r);
  Eigen::MatrixXd d(90, 90);
  for (Vertex v = 0; v < 90; ++v) d.col(static_cast<Eigen::Index>(v)) = exact_filtered_delta(o, r, v);
  SplitMix64 rng(5);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd coef(25);
    for (auto& c : coef) c = nd(rng);
    Eigen::VectorXd f = u * coef;
    worst = std::max(worst, (d.transpose() * f - f).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-10);
}
