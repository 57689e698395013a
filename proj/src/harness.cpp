#include "gsamp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "gsamp/errors.hpp"
#include "gsamp/reconstruction.hpp"
#include "gsamp/rng.hpp"
#include "gsamp/signal.hpp"
#include "gsamp/spectral.hpp"

namespace gsamp {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("config key '") + key + "': " + e.what());
  }
}

std::uint64_t model_stream(const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : name) h = (h ^ ch) * 1099511628211ULL;
  return h;
}

std::uint64_t method_stream(const std::string& method) {
  const auto& all = known_methods();
  auto it = std::find(all.begin(), all.end(), method);
  return 1000 + static_cast<std::uint64_t>(it - all.begin());
}

bool needs_oracle(const std::string& method) {
  return method == "sp_ideal" || method == "exact_greedy";
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

template <typename Task>
void parallel_for(std::size_t count, int threads, Task task) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) task(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct ReconOutcome {
  double snr = kNaN;
  double snr_clean = kNaN;
  double seconds = 0.0;
};

ReconOutcome reconstruct_and_score(const EigenOracle& oracle, const SyntheticSignal& sig,
                                   const SamplingResult& res, std::size_t f,
                                   const ExperimentConfig& cfg) {
  auto t0 = Clock::now();
  ReconstructionSpec spec;
  spec.bandwidth = f;
  if (res.method == "wrs" && cfg.weighted_wrs) {
    spec.mode = ReconstructionMode::weighted_ls;
    spec.weights = wrs_weights(res.probabilities);
  }
  Eigen::VectorXd observed(static_cast<Eigen::Index>(res.vertices.size()));
  for (std::size_t i = 0; i < res.vertices.size(); ++i) {
    observed(static_cast<Eigen::Index>(i)) = sig.values(static_cast<Eigen::Index>(res.vertices[i]));
  }
  Reconstruction rec = reconstruct(oracle, spec, res.vertices, observed);
  ReconOutcome out;
  out.seconds = seconds_since(t0);
  out.snr = snr_db(sig.values, rec.signal);
  out.snr_clean = snr_db(sig.clean, rec.signal);
  return out;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base, const std::string& model, std::size_t n,
                         std::size_t trial) {
  return derive_seed(derive_seed(derive_seed(base, model_stream(model)), n), trial);
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{"wrs",    "dc",           "avm",       "sp_ideal",
                                              "sp_k",   "exact_greedy", "avm_kernel"};
  return names;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw InvalidParameter("config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("graph_models")) {
    for (const auto& m : j.at("graph_models")) {
      GraphModelSpec spec;
      if (m.is_string()) {
        spec.name = m.get<std::string>();
      } else {
        spec.name = get_or<std::string>(m, "model", "");
        spec.params = m;
        spec.params.erase("model");
      }
      c.models.push_back(spec);
    }
  } else if (j.contains("graph_model")) {
    c.models.push_back({get_or<std::string>(j, "graph_model", ""),
                        get_or<json>(j, "graph_params", json::object())});
  }
  const std::string lap = get_or<std::string>(j, "laplacian", "combinatorial");
  if (lap == "combinatorial") {
    c.laplacian = LaplacianKind::combinatorial;
  } else if (lap == "normalized") {
    c.laplacian = LaplacianKind::normalized;
  } else {
    throw InvalidParameter("unknown laplacian kind '" + lap + "'");
  }
  c.n_list = get_or<std::vector<std::size_t>>(j, "n_list", {});
  c.s_list = get_or<std::vector<std::size_t>>(j, "s_list", {});
  c.f = get_or<std::size_t>(j, "f", c.f);
  c.methods = get_or<std::vector<std::string>>(j, "methods", {});
  c.trials = get_or<std::size_t>(j, "trials", c.trials);
  c.seed_base = get_or<std::uint64_t>(j, "seed_base", c.seed_base);
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
  c.threads = get_or<int>(j, "threads", c.threads);
  c.avm_c = get_or<double>(j, "avm_c", c.avm_c);
  c.avm_epsilon = get_or<double>(j, "avm_epsilon", c.avm_epsilon);
  c.filter_degree = get_or<int>(j, "filter_degree", c.filter_degree);
  c.dc_delta = get_or<double>(j, "dc_delta", c.dc_delta);
  c.sp_k = get_or<int>(j, "sp_k", c.sp_k);
  c.sp_dense_max_n = get_or<std::size_t>(j, "sp_dense_max_n", c.sp_dense_max_n);
  c.kernel_delta = get_or<double>(j, "kernel_delta", c.kernel_delta);
  c.weighted_wrs = get_or<bool>(j, "weighted_wrs", c.weighted_wrs);
  c.max_dense_n = get_or<std::size_t>(j, "max_dense_n", c.max_dense_n);
  c.external_baseline = get_or<std::string>(j, "external_baseline", c.external_baseline);
  c.include_external = get_or<bool>(j, "include_external", c.include_external);
  c.points_csv = get_or<std::string>(j, "points_csv", c.points_csv);
  c.knn_k = get_or<std::size_t>(j, "knn_k", c.knn_k);
  c.resamples = get_or<std::size_t>(j, "resamples", c.resamples);
  c.subset_size = get_or<std::size_t>(j, "subset_size", c.subset_size);
  c.graph_file = get_or<std::string>(j, "graph_file", c.graph_file);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config '") + path + "': " + e.what(), 0);
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json models_json = json::array();
  for (const auto& m : models) {
    json e = m.params;
    e["model"] = m.name;
    models_json.push_back(e);
  }
  return {{"graph_models", models_json},
          {"laplacian", laplacian == LaplacianKind::combinatorial ? "combinatorial" : "normalized"},
          {"n_list", n_list},
          {"s_list", s_list},
          {"f", f},
          {"methods", methods},
          {"trials", trials},
          {"seed_base", seed_base},
          {"output_dir", output_dir},
          {"threads", threads},
          {"avm_c", avm_c},
          {"avm_epsilon", avm_epsilon},
          {"filter_degree", filter_degree},
          {"dc_delta", dc_delta},
          {"sp_k", sp_k},
          {"sp_dense_max_n", sp_dense_max_n},
          {"kernel_delta", kernel_delta},
          {"weighted_wrs", weighted_wrs},
          {"max_dense_n", max_dense_n},
          {"external_baseline", external_baseline},
          {"include_external", include_external},
          {"points_csv", points_csv},
          {"knn_k", knn_k},
          {"resamples", resamples},
          {"subset_size", subset_size},
          {"graph_file", graph_file}};
}

void ExperimentConfig::validate() {
  warnings.clear();
  if (trials < 1) throw InvalidParameter("trials must be at least 1");
  if (s_list.empty()) throw InvalidParameter("s_list must not be empty");
  if (methods.empty()) throw InvalidParameter("methods must not be empty");
  for (const auto& m : methods) {
    const auto& all = known_methods();
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      throw InvalidParameter("unknown method '" + m + "'");
    }
  }
  for (std::size_t s : s_list) {
    if (s < 1) throw InvalidParameter("sample counts must be positive");
    if (f > s) {
      warnings.push_back("f=" + std::to_string(f) + " exceeds s=" + std::to_string(s) +
                         "; fewer samples than the bandwidth");
    }
  }
  if (threads < 1) throw InvalidParameter("threads must be at least 1");
}

SparseGraph make_graph(const GraphModelSpec& model, std::size_t n, std::uint64_t seed) {
  const json& p = model.params;
  if (model.name == "sensor_knn") {
    return gen_sensor_knn(n, get_or<std::size_t>(p, "k", 8), seed);
  }
  if (model.name == "barabasi_albert") {
    return gen_barabasi_albert(n, get_or<std::size_t>(p, "m", 8), seed);
  }
  if (model.name == "community") {
    CommunityParams cp;
    cp.p_intra = get_or<double>(p, "p_intra", cp.p_intra);
    cp.p_inter = get_or<double>(p, "p_inter", cp.p_inter);
    return gen_community(n, get_or<std::size_t>(p, "communities", 5), seed, cp);
  }
  if (model.name == "watts_strogatz") {
    return gen_watts_strogatz(n, get_or<std::size_t>(p, "k", 10), get_or<double>(p, "p", 0.2), seed);
  }
  if (model.name == "erdos_renyi") {
    return gen_erdos_renyi(n, get_or<double>(p, "p", 0.02), seed);
  }
  if (model.name == "grid") {
    std::size_t rows = get_or<std::size_t>(p, "rows", 0);
    if (rows == 0) {
      rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
      while (rows > 1 && n % rows != 0) --rows;
    }
    if (rows == 0 || n % rows != 0) {
      throw InvalidParameter("grid rows must divide n=" + std::to_string(n));
    }
    return gen_grid(rows, n / rows);
  }
  if (model.name == "path") return gen_path(n);
  throw InvalidParameter("unknown graph model '" + model.name + "'");
}

SamplingResult run_method(const std::string& method, const SparseGraph& g,
                          const Laplacian& lap, const EigenOracle* oracle,
                          std::size_t s, std::size_t f, std::uint64_t seed,
                          const ExperimentConfig& cfg) {
  auto coherence_for = [&](std::size_t target) {
    CoherenceOptions co;
    co.target_samples = std::min(target, lap.size());
    co.c = cfg.avm_c;
    co.epsilon = cfg.avm_epsilon;
    co.degree = cfg.filter_degree;
    co.seed = seed;
    return estimate_coherence(lap, co);
  };
  auto t0 = Clock::now();
  SamplingResult res;
  if (method == "wrs") {
    res = wrs_sample(coherence_for(f), s, derive_seed(seed, 1));
  } else if (method == "dc") {
    res = dc_sample(g, coherence_for(f), s, cfg.dc_delta);
  } else if (method == "avm") {
    AvmOptions o;
    o.s = s;
    o.c = cfg.avm_c;
    o.epsilon = cfg.avm_epsilon;
    o.degree = cfg.filter_degree;
    o.seed = seed;
    res = avm_sample(lap, o);
  } else if (method == "sp_k") {
    SpOptions o;
    o.s = s;
    o.k = cfg.sp_k;
    o.dense_max_n = cfg.sp_dense_max_n;
    res = sp_finite_k_sample(lap, o);
  } else if (method == "avm_kernel") {
    AvmKernelOptions o;
    o.s = s;
    o.c = cfg.avm_c;
    o.degree = cfg.filter_degree;
    o.seed = seed;
    res = avm_kernel_sample(lap, inverse_kernel(cfg.kernel_delta), o);
  } else if (needs_oracle(method)) {
    std::optional<EigenOracle> own;
    if (oracle == nullptr) oracle = &own.emplace(lap);
    res = method == "sp_ideal" ? sp_ideal_sample(*oracle, s)
                               : exact_greedy_sample(*oracle, s, first_frequencies(s));
  } else {
    throw InvalidParameter("unknown method '" + method + "'");
  }
  // Coherence estimation and any eigendecomposition count as sampling time.
  res.elapsed = seconds_since(t0);
  res.params["seed"] = seed;
  return res;
}

const std::vector<std::string>& timing_columns() {
  static const std::vector<std::string> cols{"sample_time_s", "recon_time_s"};
  return cols;
}

void write_rows_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "model,n,s,method,trial,snr_db,snr_clean_db,accuracy,sample_time_s,recon_time_s,"
        "provenance,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << r.model << ',' << r.n << ',' << r.s << ',' << r.method << ',' << r.trial << ','
       << fmt(r.snr_db) << ',' << fmt(r.snr_clean_db) << ',' << fmt(r.accuracy) << ','
       << fmt(r.sample_time_s) << ',' << fmt(r.recon_time_s) << ',' << r.provenance << ','
       << err << '\n';
  }
}

void write_aggregates_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "model,n,s,method,count,mean_snr_db,mean_snr_clean_db,mean_accuracy,"
        "mean_sample_time_s,median_sample_time_s,overhead_vs_wrs\n";
  for (const auto& a : rows) {
    os << a.model << ',' << a.n << ',' << a.s << ',' << a.method << ',' << a.count << ','
       << fmt(a.mean_snr_db) << ',' << fmt(a.mean_snr_clean_db) << ',' << fmt(a.mean_accuracy)
       << ',' << fmt(a.mean_sample_time_s) << ',' << fmt(a.median_sample_time_s) << ','
       << fmt(a.overhead_vs_wrs) << '\n';
  }
}

void write_report(const ExperimentReport& report, const std::string& dir,
                  const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw IoError("cannot write '" + name + "' in '" + dir + "'");
    return out;
  };
  {
    auto out = open(stem + ".csv");
    write_rows_csv(out, report.rows);
  }
  {
    auto out = open(stem + "_summary.csv");
    write_aggregates_csv(out, report.aggregates);
  }
  auto out = open(stem + ".jsonl");
  for (const auto& rec : report.log) out << rec.dump() << '\n';
}

std::vector<AggregateRow> aggregate(const std::vector<ReportRow>& rows, bool include_external) {
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ReportRow*>> groups;
  for (const auto& r : rows) {
    if (r.provenance == "external" && !include_external) continue;
    Key k{r.model, r.n, r.s, r.method};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(&r);
  }
  auto mean_of = [](const std::vector<const ReportRow*>& g, double ReportRow::*field) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (const auto* r : g) {
      if (std::isfinite(r->*field)) {
        sum += r->*field;
        ++cnt;
      }
    }
    return cnt ? sum / static_cast<double>(cnt) : kNaN;
  };
  std::vector<AggregateRow> out;
  for (const auto& k : order) {
    const auto& g = groups[k];
    AggregateRow a;
    std::tie(a.model, a.n, a.s, a.method) = k;
    a.count = g.size();
    a.mean_snr_db = mean_of(g, &ReportRow::snr_db);
    a.mean_snr_clean_db = mean_of(g, &ReportRow::snr_clean_db);
    a.mean_accuracy = mean_of(g, &ReportRow::accuracy);
    a.mean_sample_time_s = mean_of(g, &ReportRow::sample_time_s);
    std::vector<double> times;
    for (const auto* r : g) times.push_back(r->sample_time_s);
    a.median_sample_time_s = median(times);
    out.push_back(a);
  }
  for (auto& a : out) {
    a.overhead_vs_wrs = kNaN;
    for (const auto& b : out) {
      if (b.method == "wrs" && b.model == a.model && b.n == a.n && b.s == a.s &&
          b.mean_sample_time_s > 0.0) {
        a.overhead_vs_wrs = a.mean_sample_time_s / b.mean_sample_time_s;
      }
    }
  }
  return out;
}

ExperimentReport run_snr_sweep(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.models.empty() || cfg.n_list.empty()) {
    throw InvalidParameter("snr sweep needs graph_models and n_list");
  }
  struct Task {
    std::size_t model, n, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    for (std::size_t n : cfg.n_list) {
      for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({mi, n, t});
    }
  }
  std::vector<std::vector<ReportRow>> results(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    const GraphModelSpec& model = cfg.models[task.model];
    const std::uint64_t seed = trial_seed(cfg.seed_base, model.name, task.n, task.trial);
    SparseGraph g = make_graph(model, task.n, derive_seed(seed, 1));
    Laplacian lap = laplacian(g, cfg.laplacian);
    auto t0 = Clock::now();
    EigenOracle oracle(lap);
    const double oracle_time = seconds_since(t0);
    SyntheticSignal sig = gen_signal(oracle, std::min(cfg.f, task.n), derive_seed(seed, 2));
    for (std::size_t s : cfg.s_list) {
      for (const auto& method : cfg.methods) {
        ReportRow row;
        row.model = model.name;
        row.n = task.n;
        row.s = s;
        row.method = method;
        row.trial = task.trial;
        row.accuracy = kNaN;
        try {
          SamplingResult res = run_method(method, g, lap, &oracle, s, cfg.f,
                                          derive_seed(derive_seed(seed, method_stream(method)), s), cfg);
          row.sample_time_s = res.elapsed + (needs_oracle(method) ? oracle_time : 0.0);
          ReconOutcome rec = reconstruct_and_score(oracle, sig, res, cfg.f, cfg);
          row.snr_db = rec.snr;
          row.snr_clean_db = rec.snr_clean;
          row.recon_time_s = rec.seconds;
        } catch (const std::exception& e) {
          row.snr_db = row.snr_clean_db = kNaN;
          row.error = e.what();
        }
        results[i].push_back(row);
      }
    }
  });
  ExperimentReport report;
  for (auto& r : results) {
    for (auto& row : r) report.rows.push_back(std::move(row));
  }
  if (!cfg.external_baseline.empty()) {
    for (auto& row : ingest_external_baseline(cfg.external_baseline)) report.rows.push_back(row);
  }
  report.aggregates = aggregate(report.rows, cfg.include_external);
  report.log.push_back({{"record", "config"}, {"config", cfg.to_json()}});
  for (const auto& w : cfg.warnings) report.log.push_back({{"record", "warning"}, {"message", w}});
  return report;
}

ExperimentReport run_timing_sweep(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.models.empty() || cfg.n_list.empty()) {
    throw InvalidParameter("timing sweep needs graph_models and n_list");
  }
  ExperimentReport report;
  report.log.push_back({{"record", "config"}, {"config", cfg.to_json()}});
  for (const auto& w : cfg.warnings) report.log.push_back({{"record", "warning"}, {"message", w}});
  const std::size_t nm = cfg.methods.size();
  for (const auto& model : cfg.models) {
    for (std::size_t n : cfg.n_list) {
      const std::uint64_t seed = trial_seed(cfg.seed_base, model.name, n, 0);
      SparseGraph g = make_graph(model, n, derive_seed(seed, 1));
      Laplacian lap = laplacian(g, cfg.laplacian);
      std::optional<EigenOracle> oracle;
      std::optional<SyntheticSignal> sig;
      if (n <= cfg.max_dense_n) {
        oracle.emplace(lap);
        sig.emplace(gen_signal(*oracle, std::min(cfg.f, n), derive_seed(seed, 2)));
      }
      for (std::size_t s : cfg.s_list) {
        for (std::size_t it = 0; it < cfg.trials; ++it) {
          json order = json::array();
          for (std::size_t q = 0; q < nm; ++q) {
            const std::string& method = cfg.methods[(it + q) % nm];
            order.push_back(method);
            ReportRow row;
            row.model = model.name;
            row.n = n;
            row.s = s;
            row.method = method;
            row.trial = it;
            row.snr_db = row.snr_clean_db = row.accuracy = kNaN;
            try {
              // The oracle is not handed over, so eigendecomposition-based
              // methods pay for it inside the timed call.
              SamplingResult res = run_method(
                  method, g, lap, nullptr, s, cfg.f,
                  derive_seed(derive_seed(derive_seed(seed, method_stream(method)), s), it), cfg);
              row.sample_time_s = res.elapsed;
              if (oracle) {
                ReconOutcome rec = reconstruct_and_score(*oracle, *sig, res, cfg.f, cfg);
                row.snr_db = rec.snr;
                row.snr_clean_db = rec.snr_clean;
                row.recon_time_s = rec.seconds;
              }
            } catch (const std::exception& e) {
              row.sample_time_s = kNaN;
              row.error = e.what();
            }
            report.rows.push_back(row);
          }
          report.log.push_back({{"record", "round_robin"},
                                {"model", model.name},
                                {"n", n},
                                {"s", s},
                                {"iteration", it},
                                {"order", order}});
        }
      }
    }
  }
  report.aggregates = aggregate(report.rows, cfg.include_external);
  return report;
}

std::vector<double> diag_energy_fraction(const EigenOracle& oracle,
                                         const std::vector<Vertex>& samples,
                                         const FrequencySet& freqs) {
  if (samples.empty()) throw InvalidParameter("diag energy needs at least one sample");
  const Eigen::MatrixXd d = filtered_delta_matrix(oracle, freqs, samples);
  const Eigen::MatrixXd gram = d.transpose() * d;
  std::vector<double> out;
  double diag = 0.0, total = 0.0;
  for (Eigen::Index m = 0; m < gram.rows(); ++m) {
    diag += gram(m, m) * gram(m, m);
    total += gram(m, m) * gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i) total += 2.0 * gram(i, m) * gram(i, m);
    out.push_back(total > 0.0 ? diag / total : 1.0);
  }
  return out;
}

std::vector<DiagEnergyRow> run_diag_energy(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  const std::size_t s = *std::max_element(cfg.s_list.begin(), cfg.s_list.end());
  struct Task {
    std::size_t model, n, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    for (std::size_t n : cfg.n_list) {
      for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({mi, n, t});
    }
  }
  std::vector<std::vector<DiagEnergyRow>> results(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    const GraphModelSpec& model = cfg.models[task.model];
    const std::uint64_t seed = trial_seed(cfg.seed_base, model.name, task.n, task.trial);
    SparseGraph g = make_graph(model, task.n, derive_seed(seed, 1));
    Laplacian lap = laplacian(g, cfg.laplacian);
    EigenOracle oracle(lap);
    SamplingResult res = run_method("avm", g, lap, &oracle, s, cfg.f,
                                    derive_seed(seed, method_stream("avm")), cfg);
    std::vector<double> frac = diag_energy_fraction(oracle, res.vertices,
                                                    first_frequencies(std::min(cfg.f, task.n)));
    for (std::size_t m = 0; m < frac.size(); ++m) {
      results[i].push_back({model.name, task.n, task.trial, m + 1, frac[m]});
    }
  });
  std::vector<DiagEnergyRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

void write_diag_energy_csv(std::ostream& os, const std::vector<DiagEnergyRow>& rows) {
  os << "model,n,instance,m,fraction\n";
  for (const auto& r : rows) {
    os << r.model << ',' << r.n << ',' << r.instance << ',' << r.m << ',' << fmt(r.fraction) << '\n';
  }
}

std::vector<ReportRow> ingest_external_baseline(std::istream& is) {
  static const std::vector<std::string> required{"model", "n", "s", "method", "trial", "snr_db"};
  std::vector<ReportRow> rows;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (header.empty()) {
      header = cells;
      for (const auto& r : required) {
        if (std::find(header.begin(), header.end(), r) == header.end()) {
          throw ParseError("external baseline header lacks column '" + r + "'", lineno);
        }
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                           " fields, expected " + std::to_string(header.size()),
                       lineno);
    }
    ReportRow row;
    row.provenance = "external";
    row.snr_clean_db = row.accuracy = row.sample_time_s = row.recon_time_s = kNaN;
    try {
      for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& h = header[c];
        const std::string& v = cells[c];
        if (h == "model") row.model = v;
        else if (h == "method") row.method = v;
        else if (h == "n") row.n = std::stoull(v);
        else if (h == "s") row.s = std::stoull(v);
        else if (h == "trial") row.trial = std::stoull(v);
        else if (h == "snr_db") row.snr_db = std::stod(v);
        else if (h == "snr_clean_db") row.snr_clean_db = std::stod(v);
        else if (h == "accuracy") row.accuracy = std::stod(v);
        else if (h == "sample_time_s") row.sample_time_s = std::stod(v);
        else if (h == "recon_time_s") row.recon_time_s = std::stod(v);
      }
    } catch (const std::exception&) {
      throw ParseError("row " + std::to_string(lineno) + " has a malformed value", lineno);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ReportRow> ingest_external_baseline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open external baseline '" + path + "'");
  return ingest_external_baseline(in);
}

ExperimentReport run_classification(const ExperimentConfig& cfg_in, const PointCloud& points) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  if (points.labels.empty()) throw InvalidInput("classification needs a label column");
  const auto total = static_cast<std::size_t>(points.points.rows());
  if (points.labels.size() != total) throw InvalidInput("one label per point required");
  const int classes = *std::max_element(points.labels.begin(), points.labels.end()) + 1;
  if (*std::min_element(points.labels.begin(), points.labels.end()) < 0) {
    throw InvalidInput("labels must be non-negative integers");
  }
  const std::size_t subset = std::min(cfg.subset_size, total);

  ExperimentReport report;
  report.log.push_back({{"record", "config"}, {"config", cfg.to_json()}});
  for (const auto& w : cfg.warnings) report.log.push_back({{"record", "warning"}, {"message", w}});
  std::vector<std::vector<ReportRow>> results(cfg.resamples);
  parallel_for(cfg.resamples, cfg.threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(derive_seed(cfg.seed_base, 77), r);
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    SplitMix64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(subset);
    std::sort(idx.begin(), idx.end());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(subset), points.points.cols());
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(subset), classes);
    std::vector<int> truth(subset);
    for (std::size_t i = 0; i < subset; ++i) {
      x.row(static_cast<Eigen::Index>(i)) = points.points.row(static_cast<Eigen::Index>(idx[i]));
      truth[i] = points.labels[idx[i]];
      onehot(static_cast<Eigen::Index>(i), truth[i]) = 1.0;
    }
    SparseGraph g = build_knn_graph_from_points(x, cfg.knn_k);
    Laplacian lap = laplacian(g, LaplacianKind::normalized);
    EigenOracle oracle(lap);
    for (std::size_t s : cfg.s_list) {
      for (const auto& method : cfg.methods) {
        ReportRow row;
        row.model = "knn_points";
        row.n = subset;
        row.s = s;
        row.method = method;
        row.trial = r;
        row.snr_db = row.snr_clean_db = row.accuracy = kNaN;
        try {
          const std::size_t f = cfg.f == 0 ? s : std::min(cfg.f, s);
          SamplingResult res = run_method(method, g, lap, &oracle, s, f,
                                          derive_seed(derive_seed(seed, method_stream(method)), s), cfg);
          row.sample_time_s = res.elapsed;
          auto t0 = Clock::now();
          ReconstructionSpec spec;
          spec.bandwidth = std::min(f, subset);
          if (method == "wrs" && cfg.weighted_wrs) {
            spec.mode = ReconstructionMode::weighted_ls;
            spec.weights = wrs_weights(res.probabilities);
          }
          std::vector<int> pred = classify_one_vs_all(oracle, spec, res.vertices, onehot);
          row.recon_time_s = seconds_since(t0);
          std::size_t correct = 0;
          for (std::size_t i = 0; i < subset; ++i) correct += pred[i] == truth[i];
          row.accuracy = static_cast<double>(correct) / static_cast<double>(subset);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        results[r].push_back(row);
      }
    }
  });
  for (auto& r : results) {
    for (auto& row : r) report.rows.push_back(std::move(row));
  }
  report.aggregates = aggregate(report.rows, cfg.include_external);
  return report;
}

}  // namespace gsamp
