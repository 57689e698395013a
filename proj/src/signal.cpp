#include "gsamp/signal.hpp"

#include <limits>
#include <queue>
#include <random>

#include "gsamp/errors.hpp"
#include "gsamp/rng.hpp"

namespace gsamp {

SyntheticSignal gen_signal(const EigenOracle& oracle, std::size_t bandwidth,
                           std::uint64_t seed, SignalOptions opts) {
  const std::size_t n = oracle.size();
  if (bandwidth == 0 || bandwidth > n) {
    throw InvalidParameter("bandwidth must lie in [1, n]");
  }
  // Per-vertex power of U_F xt is c1 f / n; of the noise it is c2.
  const double c1 = opts.signal_power * static_cast<double>(n) / static_cast<double>(bandwidth);
  const double c2 = opts.noise_power;

  SplitMix64 rng(derive_seed(seed, 11));
  std::normal_distribution<double> normal(0.0, 1.0);
  SyntheticSignal sig;
  sig.bandwidth = bandwidth;
  sig.seed = seed;
  sig.signal_power_target = opts.signal_power;
  sig.noise_power_target = opts.noise_power;
  sig.coefficients.resize(static_cast<Eigen::Index>(bandwidth));
  for (auto& c : sig.coefficients) c = std::sqrt(c1) * normal(rng);
  sig.clean = oracle.vectors().leftCols(static_cast<Eigen::Index>(bandwidth)) * sig.coefficients;
  Eigen::VectorXd noise(static_cast<Eigen::Index>(n));
  for (auto& e : noise) e = std::sqrt(c2) * normal(rng);
  sig.values = sig.clean + noise;
  return sig;
}

SyntheticSignal gen_signal(const Laplacian& lap, std::size_t bandwidth,
                           std::uint64_t seed, SignalOptions opts) {
  if (bandwidth == 0 || bandwidth > lap.size()) {
    throw InvalidParameter("bandwidth must lie in [1, n]");
  }
  return gen_signal(EigenOracle(lap), bandwidth, seed, opts);
}

namespace {

using QueueItem = std::pair<double, Vertex>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

void dijkstra(const SparseGraph& g, MinQueue& queue, std::vector<double>& dist) {
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    auto nb = g.neighbors(u);
    auto w = g.neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      double nd = d + 1.0 / w[k];
      if (nd < dist[nb[k]]) {
        dist[nb[k]] = nd;
        queue.emplace(nd, nb[k]);
      }
    }
  }
}

}  // namespace

GeodesicDistanceField geodesic_from_set(const SparseGraph& g,
                                        std::span<const Vertex> sources) {
  if (sources.empty()) throw InvalidParameter("geodesic source set is empty");
  GeodesicDistanceField field;
  field.source_set.assign(sources.begin(), sources.end());
  field.dist.assign(g.num_vertices(), std::numeric_limits<double>::infinity());
  MinQueue queue;
  for (Vertex s : sources) {
    if (s >= g.num_vertices()) throw InvalidParameter("source vertex out of range");
    field.dist[s] = 0.0;
    queue.emplace(0.0, s);
  }
  dijkstra(g, queue, field.dist);
  return field;
}

void relax_from_source(const SparseGraph& g, Vertex source, std::vector<double>& dist) {
  if (source >= g.num_vertices()) throw InvalidParameter("source vertex out of range");
  dist[source] = 0.0;
  MinQueue queue;
  queue.emplace(0.0, source);
  dijkstra(g, queue, dist);
}

}  // namespace gsamp
