#pragma once

#include <vector>

#include "fediih/graph.hpp"
#include "fediih/server.hpp"

namespace fediih {

// Fraction of masked nodes whose argmax logit matches the label.
double accuracy(const std::vector<double>& logits, int n, int c, const std::vector<int>& labels,
                const std::vector<uint8_t>& mask);

// Rank-based (Mann-Whitney) AUC with ties averaged; binary labels.
// Throws when the mask selects a single class only.
double auc(const std::vector<double>& scores, const std::vector<int>& labels, const std::vector<uint8_t>& mask);

// Shard-distribution similarity used as ground truth for the learned
// similarities: per shard, a moment-matched diagonal Gaussian over
// (feature vector, normalized degree); entries are 1 - base-2 JS.
std::vector<double> ground_truth_similarity(const std::vector<GraphData>& shards);

}  // namespace fediih
