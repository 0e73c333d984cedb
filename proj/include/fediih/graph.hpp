#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fediih {

// One (sub)graph: undirected, unweighted, binary adjacency kept as a sorted
// list of directed entries (both directions stored; self-loops once).
// Immutable after construction; safe to share read-only across clients.
struct GraphData {
    int n = 0;  // node count
    int d = 0;  // feature dimension
    int c = 0;  // class count
    std::vector<double> features;               // n x d, row-major
    std::vector<std::pair<int, int>> edges;     // sorted, symmetric, deduped
    std::vector<int> labels;                    // size n, values in [0, c)
    std::vector<long> node_ids;                 // global identifiers, size n

    // CSR neighbor access derived from edges.
    std::vector<int> adj_offsets;  // size n+1
    std::vector<int> adj_targets;

    int degree(int u) const { return adj_offsets[u + 1] - adj_offsets[u]; }
    long undirected_edge_count() const;
    bool has_edge(int u, int v) const;
};

// Symmetrizes, dedups and validates; builds CSR. Edges are local indices.
GraphData make_graph(int n, int d, int c, std::vector<double> features, std::vector<std::pair<int, int>> raw_edges,
                     std::vector<int> labels, std::vector<long> node_ids = {});

void validate_graph(const GraphData& g);

// Text format: node file has lines "id<TAB>label<TAB>f1,f2,...",
// edge file has lines "u<TAB>v" referencing node ids. UTF-8, LF endings.
GraphData load_graph(const std::string& node_path, const std::string& edge_path);
void save_graph(const GraphData& g, const std::string& node_path, const std::string& edge_path);

// ---- synthetic generation ----------------------------------------------------

// Block-model generator with per-relation-type connection patterns.
struct SyntheticSpec {
    int n = 0;
    int d = 0;
    int c = 2;
    int k_true = 1;  // number of generative relation types
    // k_true matrices, each c*c row-major, entries in [0,1]:
    // probability of an edge of type k between classes (a,b).
    std::vector<std::vector<double>> block_probs;
    double noise_scale = 0.1;
    uint64_t seed = 0;
};

void validate_spec(const SyntheticSpec& spec);

struct SyntheticGraph {
    GraphData graph;
    // Per relation type, the undirected edges (u < v) it contributed.
    std::vector<std::vector<std::pair<int, int>>> layer_edges;
};

SyntheticGraph generate_synthetic_detailed(const SyntheticSpec& spec);
GraphData generate_synthetic(const SyntheticSpec& spec);

// ---- splits -------------------------------------------------------------------

struct SplitMasks {
    std::vector<uint8_t> train, val, test;  // boolean vectors of length n
};

// Stratified random assignment; per-class counts within one node of the
// global ratio. Deterministic per seed. Throws if some class is too small
// to supply a single training node.
SplitMasks make_splits(const GraphData& g, double train_ratio, double val_ratio, double test_ratio, uint64_t seed);

// ---- induced subgraphs ---------------------------------------------------------

struct Subgraph {
    GraphData graph;
    std::vector<int> origin_index;  // local index in the parent graph, per node
};

// Keeps exactly the requested global ids and all edges internal to them;
// node order follows the parent graph.
Subgraph induced_subgraph(const GraphData& g, const std::vector<long>& ids);

SplitMasks slice_masks(const SplitMasks& masks, const std::vector<int>& origin_index);

}  // namespace fediih
