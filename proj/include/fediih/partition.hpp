#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fediih/graph.hpp"

namespace fediih {

enum class PartitionMode { NonOverlapping, Overlapping };

struct Partition {
    int client_count = 0;
    std::vector<std::vector<long>> assignments;  // node-id sets, sorted
    PartitionMode mode = PartitionMode::NonOverlapping;
};

// Deterministic multilevel-flavored partitioner: BFS-grown balanced seeds
// followed by boundary refinement passes (single-node moves, then swaps)
// until no cut-reducing balanced change exists.
// Part sizes stay within max(floor(balance*n/m), ceil(n/m)).
Partition partition_nonoverlapping(const GraphData& g, int m, uint64_t seed, double balance = 1.3);

// Splits into floor(m/5) base parts, then draws per-part half-node samples
// until m client sets exist (5 per base part when 5 divides m). Each base
// part uses its own seeded stream.
Partition partition_overlapping(const GraphData& g, int m, uint64_t seed, double balance = 1.3);

// Undirected edges crossing parts; defined for non-overlapping partitions.
long edge_cut(const GraphData& g, const Partition& p);

// File format: one part index per line; line order follows ascending node id.
Partition load_partition(const std::string& path, const GraphData& g);
void save_partition(const Partition& p, const GraphData& g, const std::string& path);

void validate_partition(const Partition& p, const GraphData& g);

}  // namespace fediih
