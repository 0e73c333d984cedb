#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fediih/checkpoint.hpp"
#include "fediih/client.hpp"
#include "fediih/graph.hpp"
#include "fediih/metrics.hpp"
#include "fediih/partition.hpp"
#include "fediih/server.hpp"

namespace fediih {

struct ExperimentConfig {
    // dataset: either text files or a synthetic spec
    std::string node_file, edge_file;
    bool use_synthetic = false;
    SyntheticSpec synthetic;

    std::string partition_mode = "non-overlapping";  // non-overlapping | overlapping | file
    std::string partition_file;
    int clients = 5;

    int latent_factors = 2;  // K
    int hidden_dim = 64;     // d_out
    RoutingConfig routing;
    std::string classifier_input = "projected";  // projected | routed
    std::string activation = "leaky_relu";
    bool add_self_loops = false;

    int rounds = 50;
    int epochs = 1;
    double lr = 0.01;
    double weight_decay = 1e-6;
    double dropout = 0.0;
    double lambda_elbo = 1.0;
    double tau = 10.0;
    PriorConfig prior;
    bool sample_alpha = false;

    std::string method = "fediih";  // fediih | fedavg | local
    AblationFlags ablation;
    std::vector<uint64_t> seeds{0};
    double participation = 1.0;

    double train_ratio = 0.2, val_ratio = 0.4, test_ratio = 0.4;
    std::string metric = "accuracy";  // accuracy | auc
    int threads = 0;                  // 0: one per client up to hardware cores
    std::string out_dir;

    int effective_factors() const { return ablation.no_dis ? 1 : latent_factors; }
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
void validate_config(const ExperimentConfig& cfg);

struct RoundClientRecord {
    int seed_index = 0;
    int round = 0;
    int client = 0;
    bool participated = true;
    LossBreakdown loss;
    double val_metric = 0;
    double test_metric = 0;
};

struct SeedRunResult {
    uint64_t seed = 0;
    std::vector<RoundClientRecord> records;
    int best_round = -1;
    double val_at_best = 0;
    double test_at_best = 0;
    SimilarityState final_similarity;               // empty for local runs
    GlobalLatent final_alpha;
    std::vector<double> ground_truth;               // M*M shard-distribution similarity
    std::vector<std::vector<CheckpointEntry>> final_models;  // per client
    std::vector<long> shard_sizes;
    std::vector<std::vector<int>> shard_labels;     // per client, node labels (for analysis)
};

struct MetricsReport {
    ExperimentConfig config;
    std::vector<SeedRunResult> per_seed;
    double mean_test = 0;
    double std_test = 0;
    double wall_clock_sec = 0;
    long aggregation_calls = 0;
};

struct ShardContext {
    GraphData graph;
    SplitMasks masks;
};

// Loads or generates the global graph described by the config.
GraphData build_dataset(const ExperimentConfig& cfg);

// Partitions the global graph and slices masks per client.
std::vector<ShardContext> build_shards(const ExperimentConfig& cfg, const GraphData& graph, const SplitMasks& masks,
                                       uint64_t seed);

// Full federated simulation: R rounds of local training, upload,
// similarity-weighted (or plain) aggregation, and evaluation, repeated per
// seed. Deterministic for a fixed (config, seed) regardless of thread count.
MetricsReport run_experiment(const ExperimentConfig& cfg);

// Writes metrics.jsonl, summary.csv, per-factor similarity CSVs, ground
// truth CSVs, similarity_state.json and per-seed checkpoints into out_dir.
void export_artifacts(const MetricsReport& report, const std::string& out_dir);

// Re-derives the per-factor similarity CSVs from a run directory's
// similarity_state.json.
void export_heatmaps(const std::string& run_dir, const std::string& out_dir);

// Rebuilds models from a run directory and re-evaluates them; returns the
// per-client metrics as JSON.
nlohmann::json evaluate_checkpoint(const std::string& run_dir, int seed_index);

// CSV helpers (12 significant digits; reload agrees to 1e-9).
void write_csv_matrix(const std::string& path, const std::vector<double>& m, int rows, int cols);
std::vector<double> read_csv_matrix(const std::string& path, int& rows, int& cols);

}  // namespace fediih
