#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/eigen_oracle.hpp"
#include "gsamp/graph.hpp"

namespace gsamp {

// f = x + n with x = U_F xt, xt ~ N(0, c1 I), n ~ N(0, c2 I). c1 and c2 are
// chosen so the expected per-vertex power of x is signal_power and of n is
// noise_power.
struct SyntheticSignal {
  Eigen::VectorXd values;  // noisy signal f
  Eigen::VectorXd clean;   // bandlimited part x
  Eigen::VectorXd coefficients;  // xt, length f
  std::size_t bandwidth = 0;
  double signal_power_target = 1.0;
  double noise_power_target = 0.1;
  std::uint64_t seed = 0;
};

struct SignalOptions {
  double signal_power = 1.0;
  double noise_power = 0.1;
};

SyntheticSignal gen_signal(const EigenOracle& oracle, std::size_t bandwidth,
                           std::uint64_t seed, SignalOptions opts = {});
// Convenience overload: computes the dense eigendecomposition first.
SyntheticSignal gen_signal(const Laplacian& lap, std::size_t bandwidth,
                           std::uint64_t seed, SignalOptions opts = {});

// Multi-source shortest-path distances with edge length 1/w.
struct GeodesicDistanceField {
  std::vector<Vertex> source_set;
  std::vector<double> dist;  // +infinity when unreachable
};

GeodesicDistanceField geodesic_from_set(const SparseGraph& g,
                                        std::span<const Vertex> sources);

// Lowers `dist` in place to min(dist, distance from `source`). Only vertices
// whose distance improves are expanded, so repeated calls maintain an exact
// multi-source field incrementally.
void relax_from_source(const SparseGraph& g, Vertex source,
                       std::vector<double>& dist);

}  // namespace gsamp
