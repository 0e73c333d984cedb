#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "fediih/partition.hpp"
#include "oracles.hpp"

using namespace fediih;
namespace fs = std::filesystem;

namespace {

GraphData graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<double> feats(n, 0.0);
    std::vector<int> labels(n, 0);
    return make_graph(n, 1, 1, feats, edges, labels);
}

// two cliques of size n/2 joined by `bridges` edges
GraphData two_community(int n, int bridges) {
    std::vector<std::pair<int, int>> edges;
    int half = n / 2;
    for (int i = 0; i < half; ++i)
        for (int j = i + 1; j < half; ++j) {
            edges.push_back({i, j});
            edges.push_back({half + i, half + j});
        }
    for (int b = 0; b < bridges; ++b) edges.push_back({b, half + b});
    return graph_from_edges(n, edges);
}

GraphData random_graph(int n, double p, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (u(rng) < p) edges.push_back({i, j});
    return graph_from_edges(n, edges);
}

}  // namespace

TEST_CASE("non-overlapping partitioning") {
    SUBCASE("single client holds everything") {
        GraphData g = random_graph(12, 0.3, 1);
        Partition p = partition_nonoverlapping(g, 1, 0);
        CHECK(p.client_count == 1);
        CHECK(p.assignments[0].size() == 12);
    }
    SUBCASE("two equal components split exactly with zero cut") {
        GraphData g = two_community(16, 0);
        Partition p = partition_nonoverlapping(g, 2, 3);
        CHECK(edge_cut(g, p) == 0);
        CHECK(p.assignments[0].size() == 8);
        CHECK(p.assignments[1].size() == 8);
    }
    SUBCASE("more clients than nodes is an error") {
        GraphData g = random_graph(4, 0.5, 2);
        CHECK_THROWS_AS(partition_nonoverlapping(g, 5, 0), std::runtime_error);
    }
    SUBCASE("deterministic per seed") {
        GraphData g = random_graph(40, 0.15, 3);
        Partition a = partition_nonoverlapping(g, 4, 9);
        Partition b = partition_nonoverlapping(g, 4, 9);
        CHECK(a.assignments == b.assignments);
    }
    SUBCASE("34-node two-community cut within 1.5x of a randomized-greedy baseline") {
        GraphData g = two_community(34, 2);
        Partition p = partition_nonoverlapping(g, 4, 5);
        std::vector<std::pair<int, int>> und;
        for (const auto& [u, v] : g.edges)
            if (u < v) und.push_back({u, v});
        int cap = std::max(static_cast<int>(1.3 * 34 / 4), (34 + 3) / 4);
        long baseline = oracle::greedy_cut(und, 34, 4, cap, 1000, 77);
        CHECK(edge_cut(g, p) <= static_cast<long>(1.5 * baseline + 0.5));
    }
    SUBCASE("disjoint balanced cover on random graphs") {
        for (unsigned seed = 0; seed < 12; ++seed) {
            int n = 30 + static_cast<int>(seed) * 7;
            int m = 2 + seed % 4;
            GraphData g = random_graph(n, 0.1, seed + 100);
            Partition p = partition_nonoverlapping(g, m, seed);
            std::set<long> seen;
            size_t largest = 0;
            for (const auto& a : p.assignments) {
                largest = std::max(largest, a.size());
                for (long id : a) CHECK(seen.insert(id).second);
            }
            CHECK(static_cast<int>(seen.size()) == n);
            CHECK(static_cast<double>(largest) <= std::max(1.3 * n / m, std::ceil(static_cast<double>(n) / m)));
        }
    }
}

TEST_CASE("overlapping partitioning") {
    GraphData g = random_graph(40, 0.12, 4);

    SUBCASE("fewer than five clients is an error") {
        CHECK_THROWS_AS(partition_overlapping(g, 4, 0), std::runtime_error);
    }
    SUBCASE("m=10 gives two base parts with five samples each") {
        Partition p = partition_overlapping(g, 10, 1);
        CHECK(p.client_count == 10);
        CHECK(p.assignments.size() == 10);

        Partition base = partition_nonoverlapping(g, 2, 1);
        std::set<long> base0(base.assignments[0].begin(), base.assignments[0].end());
        std::set<long> base1(base.assignments[1].begin(), base.assignments[1].end());
        int in0 = 0, in1 = 0;
        for (const auto& a : p.assignments) {
            bool sub0 = std::all_of(a.begin(), a.end(), [&](long id) { return base0.count(id) > 0; });
            bool sub1 = std::all_of(a.begin(), a.end(), [&](long id) { return base1.count(id) > 0; });
            CHECK((sub0 || sub1));
            CHECK(!(sub0 && sub1));
            in0 += sub0;
            in1 += sub1;
            size_t parent = sub0 ? base0.size() : base1.size();
            CHECK(a.size() == (parent + 1) / 2);
        }
        CHECK(in0 == 5);
        CHECK(in1 == 5);
    }
    SUBCASE("even-size base part yields exactly half-size samples") {
        GraphData h = two_community(16, 2);
        Partition p = partition_overlapping(h, 10, 3);
        for (const auto& a : p.assignments) CHECK(a.size() == 4);
    }
    SUBCASE("mean per-node coverage within its part is about 2.5") {
        Partition p = partition_overlapping(g, 10, 7);
        Partition base = partition_nonoverlapping(g, 2, 7);
        for (const auto& part : base.assignments) {
            std::map<long, int> coverage;
            for (long id : part) coverage[id] = 0;
            for (const auto& a : p.assignments)
                if (coverage.count(a[0]))
                    for (long id : a) coverage[id]++;
            double mean = 0;
            for (auto& [id, cnt] : coverage) mean += cnt;
            mean /= coverage.size();
            // 5 samples of ceil(s/2) nodes each: expected coverage 5*ceil(s/2)/s
            double s = static_cast<double>(part.size());
            double expected = 5.0 * std::ceil(s / 2.0) / s;
            CHECK(mean == doctest::Approx(expected).epsilon(1e-12));
            CHECK(std::fabs(mean - 2.5) <= 0.25);
        }
    }
    SUBCASE("deterministic per seed") {
        Partition a = partition_overlapping(g, 10, 42);
        Partition b = partition_overlapping(g, 10, 42);
        CHECK(a.assignments == b.assignments);
    }
}

TEST_CASE("edge cut") {
    GraphData g = graph_from_edges(3, {{0, 1}, {1, 2}, {0, 2}});  // triangle
    SUBCASE("everything in one part gives zero") {
        Partition p = partition_nonoverlapping(g, 1, 0);
        CHECK(edge_cut(g, p) == 0);
    }
    SUBCASE("singletons count every undirected edge") {
        Partition p;
        p.client_count = 3;
        p.mode = PartitionMode::NonOverlapping;
        p.assignments = {{0}, {1}, {2}};
        CHECK(edge_cut(g, p) == g.undirected_edge_count());
    }
    SUBCASE("triangle split 1|2 cuts two edges, by enumeration") {
        Partition p;
        p.client_count = 2;
        p.mode = PartitionMode::NonOverlapping;
        p.assignments = {{0}, {1, 2}};
        long expected = 0;
        for (const auto& [u, v] : g.edges)
            if (u < v && ((u == 0) != (v == 0))) ++expected;
        CHECK(expected == 2);
        CHECK(edge_cut(g, p) == expected);
    }
    SUBCASE("overlapping partitions are rejected") {
        GraphData h = random_graph(20, 0.2, 9);
        Partition p = partition_overlapping(h, 5, 0);
        CHECK_THROWS_AS(edge_cut(h, p), std::runtime_error);
    }
}

TEST_CASE("partition files") {
    fs::path dir = fs::temp_directory_path() / ("fediih_part_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    GraphData g = graph_from_edges(3, {{0, 1}, {1, 2}});

    SUBCASE("explicit file maps lines to sorted node ids") {
        std::ofstream((dir / "p.txt").string()) << "0\n0\n1\n";
        Partition p = load_partition((dir / "p.txt").string(), g);
        CHECK(p.client_count == 2);
        CHECK(p.assignments[0] == std::vector<long>{0, 1});
        CHECK(p.assignments[1] == std::vector<long>{2});
    }
    SUBCASE("short file is an error") {
        std::ofstream((dir / "short.txt").string()) << "0\n1\n";
        CHECK_THROWS_AS(load_partition((dir / "short.txt").string(), g), std::runtime_error);
    }
    SUBCASE("save/load round trip") {
        GraphData h = random_graph(25, 0.2, 11);
        Partition p = partition_nonoverlapping(h, 3, 13);
        save_partition(p, h, (dir / "rt.txt").string());
        Partition q = load_partition((dir / "rt.txt").string(), h);
        CHECK(q.assignments == p.assignments);
    }
    fs::remove_all(dir);
}
