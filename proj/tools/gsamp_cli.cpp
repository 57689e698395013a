#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsamp/errors.hpp"
#include "gsamp/graph.hpp"
#include "gsamp/harness.hpp"
#include "gsamp/laplacian.hpp"
#include "gsamp/rng.hpp"

using namespace gsamp;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", f.seed, "seed base (overrides seed_base)");
  cmd->add_option("--threads", f.threads, "worker threads (overrides threads)")->check(CLI::PositiveNumber);
}

ExperimentConfig load_config(const CommonFlags& f) {
  ExperimentConfig cfg = ExperimentConfig::load(f.config);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.seed) cfg.seed_base = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  return cfg;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  std::ofstream out(std::filesystem::path(dir) / name);
  if (!out) throw IoError("cannot write '" + name + "' in '" + dir + "'");
  return out;
}

void print_written(const std::string& dir, const std::string& stem) {
  std::cout << json{{"status", "ok"}, {"output_dir", dir}, {"stem", stem}}.dump() << '\n';
}

void run_sample(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.methods.size() != 1) throw InvalidParameter("sample needs exactly one method");
  if (cfg.s_list.size() != 1) throw InvalidParameter("sample needs exactly one entry in s_list");
  const std::string& method = cfg.methods.front();
  const std::size_t s = cfg.s_list.front();

  SparseGraph g = [&] {
    if (!cfg.graph_file.empty()) {
      std::ifstream in(cfg.graph_file);
      if (!in) throw IoError("cannot open graph file '" + cfg.graph_file + "'");
      return read_edge_list(in);
    }
    if (cfg.models.size() != 1 || cfg.n_list.size() != 1) {
      throw InvalidParameter("sample needs graph_file or one graph model with one n");
    }
    const std::uint64_t seed = trial_seed(cfg.seed_base, cfg.models[0].name, cfg.n_list[0], 0);
    return make_graph(cfg.models[0], cfg.n_list[0], derive_seed(seed, 1));
  }();
  Laplacian lap = laplacian(g, cfg.laplacian);
  SamplingResult res = run_method(method, g, lap, nullptr, s, cfg.f, derive_seed(cfg.seed_base, 3), cfg);

  auto csv = open_out(cfg.output_dir, "sample.csv");
  res.write_csv(csv);
  auto meta = open_out(cfg.output_dir, "sample.jsonl");
  meta << res.metadata_json() << '\n';
  for (const auto& w : cfg.warnings) meta << json{{"record", "warning"}, {"message", w}}.dump() << '\n';
  print_written(cfg.output_dir, "sample");
}

void run_diag(const ExperimentConfig& cfg) {
  auto rows = run_diag_energy(cfg);
  auto csv = open_out(cfg.output_dir, "diag_energy.csv");
  write_diag_energy_csv(csv, rows);
  auto meta = open_out(cfg.output_dir, "diag_energy.jsonl");
  meta << json{{"record", "config"}, {"config", cfg.to_json()}}.dump() << '\n';
  print_written(cfg.output_dir, "diag_energy");
}

void run_classify(const ExperimentConfig& cfg) {
  if (cfg.points_csv.empty()) throw InvalidParameter("classify needs points_csv in the config");
  std::ifstream in(cfg.points_csv);
  if (!in) throw IoError("cannot open points file '" + cfg.points_csv + "'");
  PointCloud pc = read_point_csv(in, true);
  write_report(run_classification(cfg, pc), cfg.output_dir, "classification");
  print_written(cfg.output_dir, "classification");
}

int fail(const std::string& code, const std::string& message, std::optional<std::size_t> line,
         int status) {
  json err{{"error", code}, {"message", message}};
  if (line) err["line"] = *line;
  std::cerr << err.dump() << std::endl;
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph sampling experiments"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto* sample = app.add_subcommand("sample", "sample one graph with one method");
  auto* snr = app.add_subcommand("snr-sweep", "reconstruction SNR against sample count");
  auto* timing = app.add_subcommand("timing-sweep", "round-robin sampling time against graph size");
  auto* classify = app.add_subcommand("classify", "one-vs-all classification on a labeled point cloud");
  auto* diag = app.add_subcommand("diag-energy", "diagonal energy of AVM Gram matrices");
  for (auto* cmd : {sample, snr, timing, classify, diag}) add_common(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what(), std::nullopt, 64);
  }

  try {
    ExperimentConfig cfg = load_config(flags);
    if (sample->parsed()) {
      run_sample(cfg);
    } else if (snr->parsed()) {
      write_report(run_snr_sweep(cfg), cfg.output_dir, "snr_sweep");
      print_written(cfg.output_dir, "snr_sweep");
    } else if (timing->parsed()) {
      // parallel execution would distort the measurements
      cfg.threads = 1;
      write_report(run_timing_sweep(cfg), cfg.output_dir, "timing_sweep");
      print_written(cfg.output_dir, "timing_sweep");
    } else if (classify->parsed()) {
      run_classify(cfg);
    } else if (diag->parsed()) {
      run_diag(cfg);
    }
  } catch (const ParseError& e) {
    return fail(to_string(e.code()), e.what(), e.line(), 2);
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what(), std::nullopt, 2);
  } catch (const std::exception& e) {
    return fail("internal_error", e.what(), std::nullopt, 1);
  }
  return 0;
}
