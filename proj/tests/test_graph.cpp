#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "fediih/graph.hpp"
#include "oracles.hpp"

using namespace fediih;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("fediih_graph_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

}  // namespace

TEST_CASE("loading symmetrizes and dedups") {
    TempDir dir;
    write_file(dir.file("nodes.tsv"), "0\t0\t1.0,2.0\n1\t1\t0.5,0.5\n2\t0\t0.0,1.0\n");

    SUBCASE("path graph gives four directed entries") {
        write_file(dir.file("edges.tsv"), "0\t1\n1\t2\n");
        GraphData g = load_graph(dir.file("nodes.tsv"), dir.file("edges.tsv"));
        CHECK(g.n == 3);
        CHECK(g.d == 2);
        CHECK(g.c == 2);
        CHECK(g.edges.size() == 4);
        CHECK(g.has_edge(0, 1));
        CHECK(g.has_edge(1, 0));
        CHECK(g.has_edge(2, 1));
    }

    SUBCASE("repeated self-loop is kept once") {
        write_file(dir.file("edges.tsv"), "0\t0\n0\t0\n");
        GraphData g = load_graph(dir.file("nodes.tsv"), dir.file("edges.tsv"));
        CHECK(g.edges.size() == 1);
        CHECK(g.has_edge(0, 0));
    }

    SUBCASE("malformed row reports the line number") {
        write_file(dir.file("edges.tsv"), "0\t1\nnot-an-edge\n");
        CHECK_THROWS_WITH_AS(load_graph(dir.file("nodes.tsv"), dir.file("edges.tsv")), doctest::Contains(":2:"),
                             std::runtime_error);
    }

    SUBCASE("dangling endpoint is a validation error") {
        write_file(dir.file("edges.tsv"), "0\t7\n");
        CHECK_THROWS_WITH_AS(load_graph(dir.file("nodes.tsv"), dir.file("edges.tsv")), doctest::Contains("7"),
                             std::runtime_error);
    }

    SUBCASE("save/load round trip is structurally identical") {
        write_file(dir.file("edges.tsv"), "0\t1\n1\t2\n2\t2\n");
        GraphData g = load_graph(dir.file("nodes.tsv"), dir.file("edges.tsv"));
        save_graph(g, dir.file("n2.tsv"), dir.file("e2.tsv"));
        GraphData g2 = load_graph(dir.file("n2.tsv"), dir.file("e2.tsv"));
        CHECK(g2.n == g.n);
        CHECK(g2.edges == g.edges);
        CHECK(g2.labels == g.labels);
        CHECK(g2.features == g.features);
    }
}

// Runs only when a Cora-format export is present (see README for the layout);
// the repository itself ships no public datasets.
TEST_CASE("cora export loads with the published dimensions") {
    const char* root = std::getenv("FEDIIH_DATA_DIR");
    std::string base = root && *root ? root : "data";
    std::string nodes = base + "/cora/nodes.tsv", edges = base + "/cora/edges.tsv";
    if (!fs::exists(nodes)) {
        MESSAGE("skipped: ", nodes, " not present");
        return;
    }
    GraphData g = load_graph(nodes, edges);
    CHECK(g.n == 2708);
    CHECK(g.d == 1433);
    CHECK(g.c == 7);
}

namespace {

SyntheticSpec two_layer_spec(int n = 60) {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = 8;
    spec.c = 2;
    spec.k_true = 2;
    // layer 0 homophilic, layer 1 heterophilic
    spec.block_probs = {{0.30, 0.02, 0.02, 0.30}, {0.02, 0.25, 0.25, 0.02}};
    spec.noise_scale = 0.05;
    spec.seed = 9;
    return spec;
}

}  // namespace

TEST_CASE("synthetic generation") {
    SUBCASE("same spec and seed give byte-identical graphs") {
        GraphData a = generate_synthetic(two_layer_spec());
        GraphData b = generate_synthetic(two_layer_spec());
        CHECK(a.edges == b.edges);
        CHECK(a.features == b.features);
        CHECK(a.labels == b.labels);
    }
    SUBCASE("zero noise with one class gives identical feature rows") {
        SyntheticSpec spec;
        spec.n = 10;
        spec.d = 4;
        spec.c = 1;
        spec.k_true = 1;
        spec.block_probs = {{0.3}};
        spec.noise_scale = 0.0;
        spec.seed = 3;
        GraphData g = generate_synthetic(spec);
        for (int i = 1; i < g.n; ++i)
            for (int j = 0; j < g.d; ++j)
                CHECK(g.features[static_cast<size_t>(i) * g.d + j] == doctest::Approx(g.features[j]));
    }
    SUBCASE("relation layers differ in homophily by more than 0.2") {
        SyntheticGraph sg = generate_synthetic_detailed(two_layer_spec(120));
        double h0 = oracle::homophily(sg.layer_edges[0], sg.graph.labels);
        double h1 = oracle::homophily(sg.layer_edges[1], sg.graph.labels);
        CHECK(h0 - h1 > 0.2);
    }
    SUBCASE("invalid probabilities are rejected") {
        SyntheticSpec spec = two_layer_spec();
        spec.block_probs[0][0] = 1.5;
        CHECK_THROWS_AS(generate_synthetic(spec), std::runtime_error);
    }
}

TEST_CASE("splits") {
    SyntheticSpec spec = two_layer_spec(100);
    spec.c = 4;
    spec.block_probs = {{0.3, 0.02, 0.02, 0.02, 0.02, 0.3, 0.02, 0.02, 0.02, 0.02, 0.3, 0.02, 0.02, 0.02, 0.02, 0.3},
                        std::vector<double>(16, 0.05)};
    GraphData g = generate_synthetic(spec);

    SUBCASE("20/40/40 on 100 nodes is exact") {
        SplitMasks m = make_splits(g, 0.2, 0.4, 0.4, 5);
        auto count = [](const std::vector<uint8_t>& v) { return std::count(v.begin(), v.end(), uint8_t{1}); };
        CHECK(count(m.train) == 20);
        CHECK(count(m.val) == 40);
        CHECK(count(m.test) == 40);
    }
    SUBCASE("everything into train at (1,0,0)") {
        SplitMasks m = make_splits(g, 1.0, 0.0, 0.0, 5);
        CHECK(std::count(m.train.begin(), m.train.end(), uint8_t{1}) == g.n);
    }
    SUBCASE("5/47.5/47.5 sizes verified by counting") {
        SplitMasks m = make_splits(g, 0.05, 0.475, 0.475, 5);
        long tr = std::count(m.train.begin(), m.train.end(), uint8_t{1});
        long va = std::count(m.val.begin(), m.val.end(), uint8_t{1});
        long te = std::count(m.test.begin(), m.test.end(), uint8_t{1});
        CHECK(tr == 5);
        CHECK(va + te == 95);
        CHECK(std::abs(va - te) <= 1);
    }
    SUBCASE("masks are disjoint and per-class train fraction within one node") {
        SplitMasks m = make_splits(g, 0.2, 0.4, 0.4, 17);
        std::vector<int> train_per_class(g.c, 0), size_per_class(g.c, 0);
        for (int i = 0; i < g.n; ++i) {
            CHECK(m.train[i] + m.val[i] + m.test[i] <= 1);
            size_per_class[g.labels[i]]++;
            if (m.train[i]) train_per_class[g.labels[i]]++;
        }
        for (int y = 0; y < g.c; ++y)
            CHECK(std::fabs(train_per_class[y] - 0.2 * size_per_class[y]) <= 1.0);
    }
    SUBCASE("deterministic per seed") {
        SplitMasks a = make_splits(g, 0.2, 0.4, 0.4, 23);
        SplitMasks b = make_splits(g, 0.2, 0.4, 0.4, 23);
        CHECK(a.train == b.train);
        CHECK(a.val == b.val);
        CHECK(a.test == b.test);
    }
    SUBCASE("a class too small for one train sample is an error") {
        GraphData tg = generate_synthetic(two_layer_spec(10));  // classes of size 5
        CHECK_THROWS_AS(make_splits(tg, 0.1, 0.4, 0.4, 1), std::runtime_error);
    }
}

TEST_CASE("induced subgraphs") {
    TempDir dir;
    write_file(dir.file("nodes.tsv"), "10\t0\t1,0\n20\t1\t0,1\n30\t0\t1,1\n");
    write_file(dir.file("edges.tsv"), "10\t20\n20\t30\n30\t10\n");  // triangle
    GraphData g = load_graph(dir.file("nodes.tsv"), dir.file("edges.tsv"));

    SUBCASE("all nodes reproduce the graph") {
        Subgraph s = induced_subgraph(g, {10, 20, 30});
        CHECK(s.graph.edges == g.edges);
        CHECK(s.graph.node_ids == g.node_ids);
        CHECK(s.graph.features == g.features);
    }
    SUBCASE("single isolated node") {
        Subgraph s = induced_subgraph(g, {20});
        CHECK(s.graph.n == 1);
        CHECK(s.graph.edges.empty());
        CHECK(s.graph.node_ids[0] == 20);
    }
    SUBCASE("two of three triangle nodes keep exactly one undirected edge") {
        Subgraph s = induced_subgraph(g, {10, 30});
        // brute-force filter over the parent edge list
        std::set<std::pair<long, long>> expected;
        for (const auto& [u, v] : g.edges) {
            long a = g.node_ids[u], b = g.node_ids[v];
            if ((a == 10 || a == 30) && (b == 10 || b == 30) && a <= b) expected.insert({a, b});
        }
        CHECK(expected.size() == 1);
        CHECK(s.graph.undirected_edge_count() == 1);
        CHECK(s.graph.has_edge(0, 1));
    }
    SUBCASE("unknown id is an error") { CHECK_THROWS_AS(induced_subgraph(g, {10, 99}), std::runtime_error); }
    SUBCASE("union of id sets covers each part's edges") {
        std::vector<long> s1{10, 20}, s2{20, 30}, s12{10, 20, 30};
        Subgraph u = induced_subgraph(g, s12);
        for (const auto& sub : {induced_subgraph(g, s1), induced_subgraph(g, s2)})
            for (const auto& [a, b] : sub.graph.edges) {
                long ga = sub.graph.node_ids[a], gb = sub.graph.node_ids[b];
                bool found = false;
                for (const auto& [x, y] : u.graph.edges)
                    if (u.graph.node_ids[x] == ga && u.graph.node_ids[y] == gb) found = true;
                CHECK(found);
            }
    }
    SUBCASE("mask slicing follows origin indices") {
        SplitMasks masks;
        masks.train = {1, 0, 0};
        masks.val = {0, 1, 0};
        masks.test = {0, 0, 1};
        Subgraph s = induced_subgraph(g, {20, 30});
        SplitMasks sliced = slice_masks(masks, s.origin_index);
        CHECK(sliced.train == std::vector<uint8_t>{0, 0});
        CHECK(sliced.val == std::vector<uint8_t>{1, 0});
        CHECK(sliced.test == std::vector<uint8_t>{0, 1});
    }
}

TEST_CASE("symmetrization is idempotent") {
    TempDir dir;
    write_file(dir.file("nodes.tsv"), "0\t0\t1\n1\t1\t2\n2\t0\t3\n3\t1\t4\n");
    write_file(dir.file("edges.tsv"), "0\t1\n1\t0\n2\t3\n3\t3\n");
    GraphData g = load_graph(dir.file("nodes.tsv"), dir.file("edges.tsv"));
    save_graph(g, dir.file("n2.tsv"), dir.file("e2.tsv"));
    GraphData g2 = load_graph(dir.file("n2.tsv"), dir.file("e2.tsv"));
    CHECK(g2.edges == g.edges);
    save_graph(g2, dir.file("n3.tsv"), dir.file("e3.tsv"));
    GraphData g3 = load_graph(dir.file("n3.tsv"), dir.file("e3.tsv"));
    CHECK(g3.edges == g2.edges);
}
