#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "fediih/experiment.hpp"

namespace py = pybind11;
using namespace fediih;

namespace {

GraphData graph_from_parts(int n, int d, int c, std::vector<double> features,
                           std::vector<std::pair<int, int>> edges, std::vector<int> labels,
                           std::vector<long> node_ids) {
    return make_graph(n, d, c, std::move(features), std::move(edges), std::move(labels), std::move(node_ids));
}

SyntheticSpec spec_from_kwargs(int n, int d, int c, int k_true, const std::vector<std::vector<double>>& block_probs,
                               double noise_scale, uint64_t seed) {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    spec.c = c;
    spec.k_true = k_true;
    spec.block_probs = block_probs;
    spec.noise_scale = noise_scale;
    spec.seed = seed;
    return spec;
}

std::string run_experiment_json(const std::string& config_json, const std::string& out_dir) {
    ExperimentConfig cfg = config_from_json(nlohmann::json::parse(config_json));
    MetricsReport report = run_experiment(cfg);
    if (!out_dir.empty()) export_artifacts(report, out_dir);
    nlohmann::json j;
    j["mean_test"] = report.mean_test;
    j["std_test"] = report.std_test;
    j["aggregation_calls"] = report.aggregation_calls;
    j["wall_clock_sec"] = report.wall_clock_sec;
    j["per_seed"] = nlohmann::json::array();
    for (const auto& run : report.per_seed)
        j["per_seed"].push_back({{"seed", run.seed},
                                 {"best_round", run.best_round},
                                 {"val_at_best", run.val_at_best},
                                 {"test_at_best", run.test_at_best}});
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_fediih, m) {
    m.doc() = "federated subgraph learning simulator (C++ core)";

    py::class_<GraphData>(m, "GraphData")
        .def_readonly("n", &GraphData::n)
        .def_readonly("d", &GraphData::d)
        .def_readonly("c", &GraphData::c)
        .def_readonly("features", &GraphData::features)
        .def_readonly("edges", &GraphData::edges)
        .def_readonly("labels", &GraphData::labels)
        .def_readonly("node_ids", &GraphData::node_ids)
        .def("degree", &GraphData::degree)
        .def("undirected_edge_count", &GraphData::undirected_edge_count);

    py::class_<SplitMasks>(m, "SplitMasks")
        .def_readonly("train", &SplitMasks::train)
        .def_readonly("val", &SplitMasks::val)
        .def_readonly("test", &SplitMasks::test);

    py::class_<Partition>(m, "Partition")
        .def_readonly("client_count", &Partition::client_count)
        .def_readonly("assignments", &Partition::assignments);

    py::class_<Subgraph>(m, "Subgraph")
        .def_readonly("graph", &Subgraph::graph)
        .def_readonly("origin_index", &Subgraph::origin_index);

    py::class_<PosteriorSummary>(m, "PosteriorSummary")
        .def(py::init<>())
        .def_readwrite("mu_hat", &PosteriorSummary::mu_hat)
        .def_readwrite("var_hat", &PosteriorSummary::var_hat)
        .def_readwrite("node_count", &PosteriorSummary::node_count);

    m.def("make_graph", &graph_from_parts, py::arg("n"), py::arg("d"), py::arg("c"), py::arg("features"),
          py::arg("edges"), py::arg("labels"), py::arg("node_ids") = std::vector<long>{});
    m.def("load_graph", &load_graph, py::arg("node_path"), py::arg("edge_path"));
    m.def("save_graph", &save_graph, py::arg("graph"), py::arg("node_path"), py::arg("edge_path"));
    m.def("generate_synthetic",
          [](int n, int d, int c, int k_true, const std::vector<std::vector<double>>& block_probs, double noise_scale,
             uint64_t seed) { return generate_synthetic(spec_from_kwargs(n, d, c, k_true, block_probs, noise_scale, seed)); },
          py::arg("n"), py::arg("d"), py::arg("c"), py::arg("k_true"), py::arg("block_probs"),
          py::arg("noise_scale") = 0.1, py::arg("seed") = 0);
    m.def("make_splits",
          [](const GraphData& g, double tr, double va, double te, uint64_t seed) {
              return make_splits(g, tr, va, te, seed);
          },
          py::arg("graph"), py::arg("train_ratio"), py::arg("val_ratio"), py::arg("test_ratio"), py::arg("seed") = 0);
    m.def("induced_subgraph", &induced_subgraph, py::arg("graph"), py::arg("node_ids"));

    m.def("partition_nonoverlapping",
          [](const GraphData& g, int m_, uint64_t seed) { return partition_nonoverlapping(g, m_, seed); },
          py::arg("graph"), py::arg("clients"), py::arg("seed") = 0);
    m.def("partition_overlapping",
          [](const GraphData& g, int m_, uint64_t seed) { return partition_overlapping(g, m_, seed); },
          py::arg("graph"), py::arg("clients"), py::arg("seed") = 0);
    m.def("edge_cut", &edge_cut, py::arg("graph"), py::arg("partition"));

    m.def("js_divergence",
          [](const std::vector<double>& mp, const std::vector<double>& vp, const std::vector<double>& mq,
             const std::vector<double>& vq) { return js_divergence({mp, vp}, {mq, vq}); },
          py::arg("mean_p"), py::arg("var_p"), py::arg("mean_q"), py::arg("var_q"));
    m.def("federation_weights", &federation_weights, py::arg("similarity_row"), py::arg("tau") = 10.0);
    m.def("similarity_matrix", &similarity_matrix, py::arg("summaries"));
    m.def("update_global_alpha",
          [](const std::vector<PosteriorSummary>& summaries, double sigma2_alpha, double sigma2_h, bool sampled,
             uint64_t seed) {
              PriorConfig prior{sigma2_alpha, sigma2_h};
              return update_global_alpha(summaries, prior, sampled, seed).alpha_tilde;
          },
          py::arg("summaries"), py::arg("sigma2_alpha") = 1.0, py::arg("sigma2_h") = 0.25, py::arg("sampled") = false,
          py::arg("seed") = 0);

    m.def("accuracy", &accuracy, py::arg("logits"), py::arg("n"), py::arg("c"), py::arg("labels"), py::arg("mask"));
    m.def("auc", &auc, py::arg("scores"), py::arg("labels"), py::arg("mask"));
    m.def("ground_truth_similarity", &ground_truth_similarity, py::arg("shards"));

    m.def("run_experiment", &run_experiment_json, py::arg("config_json"), py::arg("out_dir") = std::string(),
          "Run a full experiment from a JSON config string; returns a JSON report string.");
}
