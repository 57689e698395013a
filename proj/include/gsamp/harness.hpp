#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsamp/eigen_oracle.hpp"
#include "gsamp/graph.hpp"
#include "gsamp/laplacian.hpp"
#include "gsamp/samplers.hpp"

namespace gsamp {

struct GraphModelSpec {
  std::string name;  // sensor_knn, barabasi_albert, community, watts_strogatz,
                     // erdos_renyi, grid, path
  nlohmann::json params = nlohmann::json::object();
};

struct ExperimentConfig {
  std::vector<GraphModelSpec> models;
  LaplacianKind laplacian = LaplacianKind::combinatorial;
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> s_list;
  std::size_t f = 50;
  std::vector<std::string> methods;
  std::size_t trials = 1;
  std::uint64_t seed_base = 0;
  std::string output_dir = "out";
  int threads = 1;

  // sampler settings
  double avm_c = 10.0;
  double avm_epsilon = 0.1;
  int filter_degree = 30;
  double dc_delta = 0.9;
  int sp_k = 4;
  std::size_t sp_dense_max_n = 64;
  double kernel_delta = 1.0;
  bool weighted_wrs = true;

  // timing sweep: SNR is only computed when n <= max_dense_n
  std::size_t max_dense_n = 2000;

  std::string external_baseline;
  bool include_external = false;

  // classification
  std::string points_csv;
  std::size_t knn_k = 10;
  std::size_t resamples = 10;
  std::size_t subset_size = 1000;

  // sample subcommand: an edge-list file instead of a generated graph
  std::string graph_file;

  std::vector<std::string> warnings;  // filled by validate()

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
  void validate();
};

const std::vector<std::string>& known_methods();

// Seed of one (model, n, trial) instance. The graph is generated from
// derive_seed(seed, 1) and the signal from derive_seed(seed, 2).
std::uint64_t trial_seed(std::uint64_t base, const std::string& model, std::size_t n,
                         std::size_t trial);

SparseGraph make_graph(const GraphModelSpec& model, std::size_t n, std::uint64_t seed);

// Runs one sampler the way the harness does. Oracle-based methods build the
// eigendecomposition themselves when `oracle` is null.
SamplingResult run_method(const std::string& method, const SparseGraph& g,
                          const Laplacian& lap, const EigenOracle* oracle,
                          std::size_t s, std::size_t f, std::uint64_t seed,
                          const ExperimentConfig& cfg);

struct ReportRow {
  std::string model;
  std::size_t n = 0;
  std::size_t s = 0;
  std::string method;
  std::size_t trial = 0;
  double snr_db = 0.0;        // against the noisy signal f
  double snr_clean_db = 0.0;  // against the noise-free part x
  double accuracy = 0.0;      // classification runs only
  double sample_time_s = 0.0;
  double recon_time_s = 0.0;
  std::string provenance = "internal";
  std::string error;
};

struct AggregateRow {
  std::string model;
  std::size_t n = 0;
  std::size_t s = 0;
  std::string method;
  std::size_t count = 0;
  double mean_snr_db = 0.0;
  double mean_snr_clean_db = 0.0;
  double mean_accuracy = 0.0;
  double mean_sample_time_s = 0.0;
  double median_sample_time_s = 0.0;
  double overhead_vs_wrs = 0.0;  // NaN without a wrs baseline
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<nlohmann::json> log;  // JSON-lines metadata records
};

// Columns whose values depend on wall-clock measurements.
const std::vector<std::string>& timing_columns();

void write_rows_csv(std::ostream& os, const std::vector<ReportRow>& rows);
void write_aggregates_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
// <dir>/<stem>.csv, <dir>/<stem>_summary.csv, <dir>/<stem>.jsonl
void write_report(const ExperimentReport& report, const std::string& dir,
                  const std::string& stem);

// Means over rows grouped by (model, n, s, method) in first-seen order;
// overhead_vs_wrs divides by the wrs group with the same (model, n, s).
std::vector<AggregateRow> aggregate(const std::vector<ReportRow>& rows,
                                    bool include_external);

ExperimentReport run_snr_sweep(const ExperimentConfig& cfg);

// Methods run in a rotating round-robin order: iteration t starts at method
// t mod |methods|.
ExperimentReport run_timing_sweep(const ExperimentConfig& cfg);

// Fraction of Gram energy on the diagonal for each prefix S_1 .. S_m.
std::vector<double> diag_energy_fraction(const EigenOracle& oracle,
                                         const std::vector<Vertex>& samples,
                                         const FrequencySet& freqs);

struct DiagEnergyRow {
  std::string model;
  std::size_t n = 0;
  std::size_t instance = 0;
  std::size_t m = 0;
  double fraction = 0.0;
};

// AVM with s = max(s_list) on `trials` instances per model and size; the
// Gram matrices use R = {1..f}.
std::vector<DiagEnergyRow> run_diag_energy(const ExperimentConfig& cfg);
void write_diag_energy_csv(std::ostream& os, const std::vector<DiagEnergyRow>& rows);

// Report-schema CSV from third-party tools. Rows get provenance "external".
std::vector<ReportRow> ingest_external_baseline(std::istream& is);
std::vector<ReportRow> ingest_external_baseline(const std::string& path);

ExperimentReport run_classification(const ExperimentConfig& cfg, const PointCloud& points);

}  // namespace gsamp
