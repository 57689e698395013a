#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsamp/eigen_oracle.hpp"
#include "gsamp/errors.hpp"
#include "gsamp/graph.hpp"
#include "gsamp/harness.hpp"
#include "gsamp/laplacian.hpp"
#include "gsamp/reconstruction.hpp"
#include "gsamp/samplers.hpp"
#include "gsamp/signal.hpp"
#include "gsamp/spectral.hpp"

namespace py = pybind11;
using namespace gsamp;

namespace {

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::list rows_to_py(const std::vector<ReportRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["model"] = r.model;
    d["n"] = r.n;
    d["s"] = r.s;
    d["method"] = r.method;
    d["trial"] = r.trial;
    d["snr_db"] = r.snr_db;
    d["snr_clean_db"] = r.snr_clean_db;
    d["accuracy"] = r.accuracy;
    d["sample_time_s"] = r.sample_time_s;
    d["recon_time_s"] = r.recon_time_s;
    d["provenance"] = r.provenance;
    d["error"] = r.error;
    out.append(d);
  }
  return out;
}

py::dict report_to_py(const ExperimentReport& rep) {
  py::list aggs;
  for (const auto& a : rep.aggregates) {
    py::dict d;
    d["model"] = a.model;
    d["n"] = a.n;
    d["s"] = a.s;
    d["method"] = a.method;
    d["count"] = a.count;
    d["mean_snr_db"] = a.mean_snr_db;
    d["mean_snr_clean_db"] = a.mean_snr_clean_db;
    d["mean_accuracy"] = a.mean_accuracy;
    d["mean_sample_time_s"] = a.mean_sample_time_s;
    d["median_sample_time_s"] = a.median_sample_time_s;
    d["overhead_vs_wrs"] = a.overhead_vs_wrs;
    aggs.append(d);
  }
  py::list log;
  for (const auto& rec : rep.log) log.append(to_py(rec));
  py::dict d;
  d["rows"] = rows_to_py(rep.rows);
  d["aggregates"] = aggs;
  d["log"] = log;
  return d;
}

LaplacianKind kind_of(const std::string& s) {
  if (s == "combinatorial") return LaplacianKind::combinatorial;
  if (s == "normalized") return LaplacianKind::normalized;
  throw InvalidParameter("unknown laplacian kind '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graph signal sampling: samplers, reconstruction and experiment harness";

  auto base = py::register_exception<Error>(m, "GsampError", PyExc_ValueError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<InvalidKernel>(m, "InvalidKernel", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<SparseGraph>(m, "Graph")
      .def(py::init([](std::size_t n, const std::vector<std::tuple<Vertex, Vertex, double>>& edges) {
             std::vector<Edge> e;
             for (const auto& [u, v, w] : edges) e.push_back({u, v, w});
             return SparseGraph::from_edges(n, e);
           }),
           py::arg("n"), py::arg("edges"))
      .def_property_readonly("num_vertices", &SparseGraph::num_vertices)
      .def_property_readonly("num_edges", &SparseGraph::num_edges)
      .def("num_components", &SparseGraph::num_components)
      .def("weight", &SparseGraph::weight)
      .def("edges",
           [](const SparseGraph& g) {
             std::vector<std::tuple<Vertex, Vertex, double>> out;
             for (const auto& e : g.edges()) out.emplace_back(e.u, e.v, e.w);
             return out;
           })
      .def("to_edge_list",
           [](const SparseGraph& g) {
             std::ostringstream os;
             write_edge_list(os, g);
             return os.str();
           })
      .def_static("from_edge_list", [](const std::string& text) {
        std::istringstream is(text);
        return read_edge_list(is);
      });

  m.def("sensor_knn", &gen_sensor_knn, py::arg("n"), py::arg("k"), py::arg("seed"));
  m.def("erdos_renyi", &gen_erdos_renyi, py::arg("n"), py::arg("p"), py::arg("seed"));
  m.def("barabasi_albert", &gen_barabasi_albert, py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def("watts_strogatz", &gen_watts_strogatz, py::arg("n"), py::arg("k"), py::arg("p"), py::arg("seed"));
  m.def("grid", &gen_grid, py::arg("rows"), py::arg("cols"));
  m.def("path", &gen_path, py::arg("n"));
  m.def("knn_graph", &build_knn_graph_from_points, py::arg("points"), py::arg("k"));

  py::class_<Laplacian>(m, "Laplacian")
      .def(py::init([](const SparseGraph& g, const std::string& kind) { return laplacian(g, kind_of(kind)); }),
           py::arg("graph"), py::arg("kind") = "combinatorial")
      .def_property_readonly("size", &Laplacian::size)
      .def_property_readonly("lambda_max_bound", &Laplacian::lambda_max_bound)
      .def("apply", py::overload_cast<const Eigen::VectorXd&>(&Laplacian::apply, py::const_))
      .def("to_dense", &Laplacian::to_dense);

  py::class_<EigenOracle>(m, "EigenOracle")
      .def(py::init<const Laplacian&>(), py::arg("laplacian"))
      .def_property_readonly("values", &EigenOracle::values)
      .def_property_readonly("vectors", &EigenOracle::vectors)
      .def("basis", [](const EigenOracle& o, std::size_t f) { return o.basis(first_frequencies(f)); })
      .def("coherence", [](const EigenOracle& o, std::size_t f) {
        return o.projector_diagonal(first_frequencies(f));
      });

  py::class_<SamplingResult>(m, "SamplingResult")
      .def_readonly("method", &SamplingResult::method)
      .def_readonly("vertices", &SamplingResult::vertices)
      .def_readonly("scores", &SamplingResult::scores)
      .def_readonly("probabilities", &SamplingResult::probabilities)
      .def_readonly("elapsed", &SamplingResult::elapsed)
      .def_property_readonly("params", [](const SamplingResult& r) { return to_py(r.params); })
      .def_property_readonly("diagnostics", [](const SamplingResult& r) { return to_py(r.diagnostics); })
      .def("to_csv", [](const SamplingResult& r) {
        std::ostringstream os;
        r.write_csv(os);
        return os.str();
      });

  m.def(
      "estimate_coherence",
      [](const Laplacian& lap, std::size_t s, double c, int degree, std::uint64_t seed) {
        CoherenceOptions o;
        o.target_samples = s;
        o.c = c;
        o.degree = degree;
        o.seed = seed;
        return estimate_coherence(lap, o).sq_coherence;
      },
      py::arg("laplacian"), py::arg("s"), py::arg("c") = 10.0, py::arg("degree") = 30,
      py::arg("seed") = 0);

  m.def(
      "sample",
      [](const std::string& method, const SparseGraph& g, std::size_t s, std::size_t f,
         std::uint64_t seed, const py::object& config, const std::string& kind) {
        ExperimentConfig cfg = config.is_none() ? ExperimentConfig{}
                                                : ExperimentConfig::from_json(from_py(config));
        Laplacian lap = laplacian(g, kind_of(kind));
        return run_method(method, g, lap, nullptr, s, f, seed, cfg);
      },
      py::arg("method"), py::arg("graph"), py::arg("s"), py::arg("f"), py::arg("seed") = 0,
      py::arg("config") = py::none(), py::arg("kind") = "combinatorial",
      "Runs one sampler with the harness settings (config keys as in the JSON config).");

  m.def(
      "avm",
      [](const Laplacian& lap, std::size_t s, double c, double epsilon, int degree, std::uint64_t seed) {
        AvmOptions o;
        o.s = s;
        o.c = c;
        o.epsilon = epsilon;
        o.degree = degree;
        o.seed = seed;
        return avm_sample(lap, o);
      },
      py::arg("laplacian"), py::arg("s"), py::arg("c") = 10.0, py::arg("epsilon") = 0.1,
      py::arg("degree") = 30, py::arg("seed") = 0);
  m.def("exact_greedy",
        [](const EigenOracle& o, std::size_t s, std::size_t r) {
          return exact_greedy_sample(o, s, first_frequencies(r));
        },
        py::arg("oracle"), py::arg("s"), py::arg("r"));
  m.def("sp_ideal", &sp_ideal_sample, py::arg("oracle"), py::arg("s"));
  m.def(
      "sp_k",
      [](const Laplacian& lap, std::size_t s, int k) {
        SpOptions o;
        o.s = s;
        o.k = k;
        return sp_finite_k_sample(lap, o);
      },
      py::arg("laplacian"), py::arg("s"), py::arg("k") = 4);

  m.def(
      "reconstruct",
      [](const EigenOracle& o, std::size_t bandwidth, const std::vector<Vertex>& samples,
         const Eigen::VectorXd& observed, const std::optional<std::vector<double>>& weights) {
        ReconstructionSpec spec;
        spec.bandwidth = bandwidth;
        if (weights) {
          spec.mode = ReconstructionMode::weighted_ls;
          spec.weights = *weights;
        }
        return reconstruct(o, spec, samples, observed).signal;
      },
      py::arg("oracle"), py::arg("bandwidth"), py::arg("samples"), py::arg("observed"),
      py::arg("weights") = py::none());
  m.def("snr_db", &snr_db, py::arg("reference"), py::arg("estimate"));
  m.def(
      "bandlimited_signal",
      [](const EigenOracle& o, std::size_t f, std::uint64_t seed, double noise_power) {
        SignalOptions opt;
        opt.noise_power = noise_power;
        SyntheticSignal sig = gen_signal(o, f, seed, opt);
        return std::make_pair(sig.values, sig.clean);
      },
      py::arg("oracle"), py::arg("f"), py::arg("seed"), py::arg("noise_power") = 0.1,
      "Returns (noisy, clean).");

  m.def("run_snr_sweep",
        [](const py::object& config) { return report_to_py(run_snr_sweep(ExperimentConfig::from_json(from_py(config)))); },
        py::arg("config"));
  m.def("run_timing_sweep",
        [](const py::object& config) {
          ExperimentConfig cfg = ExperimentConfig::from_json(from_py(config));
          cfg.threads = 1;
          return report_to_py(run_timing_sweep(cfg));
        },
        py::arg("config"));
  m.def(
      "diag_energy_fraction",
      [](const EigenOracle& o, const std::vector<Vertex>& samples, std::size_t f) {
        return diag_energy_fraction(o, samples, first_frequencies(f));
      },
      py::arg("oracle"), py::arg("samples"), py::arg("f"));
}
