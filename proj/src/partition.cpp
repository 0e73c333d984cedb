#include "fediih/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "fediih/rng.hpp"

namespace fediih {

namespace {

int size_cap(int n, int m, double balance) {
    int cap = static_cast<int>(std::floor(balance * n / static_cast<double>(m)));
    int feasible = (n + m - 1) / m;  // ceil(n/m): always achievable
    return std::max(cap, feasible);
}

// Farthest-first seed selection; unreachable nodes count as infinitely far,
// so disconnected components get their own seeds.
std::vector<int> pick_seeds(const GraphData& g, int m, Rng& rng) {
    std::vector<int> seeds;
    seeds.push_back(rng.index(g.n));
    std::vector<int> dist(g.n);
    while (static_cast<int>(seeds.size()) < m) {
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<int> q;
        for (int s : seeds) {
            dist[s] = 0;
            q.push_back(s);
        }
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int e = g.adj_offsets[u]; e < g.adj_offsets[u + 1]; ++e) {
                int v = g.adj_targets[e];
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        int best = -1, best_dist = -1;
        for (int u = 0; u < g.n; ++u) {
            int du = dist[u] < 0 ? g.n + 1 : dist[u];  // unreachable beats everything
            if (du > best_dist) {
                best_dist = du;
                best = u;
            }
        }
        seeds.push_back(best);
    }
    return seeds;
}

// Round-robin BFS growth from the seeds, capped per part.
std::vector<int> grow_parts(const GraphData& g, const std::vector<int>& seeds, int cap) {
    const int m = static_cast<int>(seeds.size());
    std::vector<int> part(g.n, -1);
    std::vector<std::deque<int>> frontier(m);
    std::vector<int> sizes(m, 0);
    for (int p = 0; p < m; ++p) {
        part[seeds[p]] = p;
        sizes[p] = 1;
        frontier[p].push_back(seeds[p]);
    }
    int assigned = m;
    bool progress = true;
    while (assigned < g.n && progress) {
        progress = false;
        for (int p = 0; p < m; ++p) {
            if (sizes[p] >= cap) continue;
            while (!frontier[p].empty()) {
                int u = frontier[p].front();
                int claim = -1;
                for (int e = g.adj_offsets[u]; e < g.adj_offsets[u + 1]; ++e) {
                    int v = g.adj_targets[e];
                    if (part[v] < 0 && (claim < 0 || v < claim)) claim = v;
                }
                if (claim < 0) {
                    frontier[p].pop_front();
                    continue;
                }
                part[claim] = p;
                sizes[p]++;
                frontier[p].push_back(claim);
                assigned++;
                progress = true;
                break;
            }
        }
    }
    // leftovers (unreachable from any growing part): smallest part first
    for (int u = 0; u < g.n; ++u) {
        if (part[u] >= 0) continue;
        int best = 0;
        for (int p = 1; p < m; ++p)
            if (sizes[p] < sizes[best]) best = p;
        part[u] = best;
        sizes[best]++;
    }
    return part;
}

// Kernighan–Lin style boundary refinement: greedy single-node moves while a
// strictly cut-reducing balanced move exists, then pair swaps.
void refine(const GraphData& g, std::vector<int>& part, int m, int cap) {
    std::vector<int> sizes(m, 0);
    for (int p : part) sizes[p]++;

    auto degree_to = [&](int u, std::vector<int>& counts, std::vector<int>& touched) {
        for (int e = g.adj_offsets[u]; e < g.adj_offsets[u + 1]; ++e) {
            int v = g.adj_targets[e];
            if (v == u) continue;
            if (counts[part[v]] == 0) touched.push_back(part[v]);
            counts[part[v]]++;
        }
    };

    std::vector<int> counts(m, 0), touched;
    for (int pass = 0; pass < 200; ++pass) {
        bool improved = false;
        for (int u = 0; u < g.n; ++u) {
            touched.clear();
            degree_to(u, counts, touched);
            int from = part[u];
            int best_gain = 0, best_to = -1;
            for (int q : touched) {
                if (q == from) continue;
                if (sizes[q] + 1 > cap || sizes[from] - 1 < 1) continue;
                int gain = counts[q] - counts[from];
                if (gain > best_gain || (gain == best_gain && best_to >= 0 && q < best_to)) {
                    if (gain > 0) {
                        best_gain = gain;
                        best_to = q;
                    }
                }
            }
            if (best_to >= 0) {
                sizes[from]--;
                sizes[best_to]++;
                part[u] = best_to;
                improved = true;
            }
            for (int q : touched) counts[q] = 0;
        }
        if (!improved) break;
    }

    // swap phase: exchange endpoint pairs of cut edges when both parts are
    // at capacity and a move alone is blocked
    std::vector<int> cu(m, 0), cv(m, 0), tu, tv;
    for (int pass = 0; pass < 50; ++pass) {
        bool improved = false;
        for (const auto& [u, v] : g.edges) {
            if (u >= v || part[u] == part[v]) continue;
            tu.clear();
            tv.clear();
            degree_to(u, cu, tu);
            degree_to(v, cv, tv);
            int pu = part[u], pv = part[v];
            // gain of swapping u->pv, v->pu; u~v edge stays cut
            int gain = (cu[pv] - cu[pu]) + (cv[pu] - cv[pv]) - 2;
            if (gain > 0) {
                part[u] = pv;
                part[v] = pu;
                improved = true;
            }
            for (int q : tu) cu[q] = 0;
            for (int q : tv) cv[q] = 0;
        }
        if (!improved) break;
    }
}

Partition parts_to_partition(const GraphData& g, const std::vector<int>& part, int m) {
    Partition out;
    out.client_count = m;
    out.mode = PartitionMode::NonOverlapping;
    out.assignments.assign(m, {});
    for (int u = 0; u < g.n; ++u) out.assignments[part[u]].push_back(g.node_ids[u]);
    for (auto& a : out.assignments) std::sort(a.begin(), a.end());
    return out;
}

}  // namespace

Partition partition_nonoverlapping(const GraphData& g, int m, uint64_t seed, double balance) {
    if (m < 1) throw std::runtime_error("partition: client count must be >= 1");
    if (m > g.n)
        throw std::runtime_error("partition: " + std::to_string(m) + " clients exceed " + std::to_string(g.n) +
                                 " nodes");
    if (m == 1) {
        Partition out;
        out.client_count = 1;
        out.mode = PartitionMode::NonOverlapping;
        out.assignments.push_back(g.node_ids);
        std::sort(out.assignments[0].begin(), out.assignments[0].end());
        return out;
    }
    int cap = size_cap(g.n, m, balance);
    Rng rng(mix_seed(seed, 7));
    auto seeds = pick_seeds(g, m, rng);
    auto part = grow_parts(g, seeds, cap);
    refine(g, part, m, cap);
    auto out = parts_to_partition(g, part, m);
    validate_partition(out, g);
    return out;
}

Partition partition_overlapping(const GraphData& g, int m, uint64_t seed, double balance) {
    if (m < 5) throw std::runtime_error("partition: overlapping mode needs at least 5 clients");
    const int base_count = m / 5;
    Partition base = partition_nonoverlapping(g, base_count, seed, balance);

    // distribute m samples across base parts as evenly as possible
    std::vector<int> samples_per_part(base_count, m / base_count);
    for (int i = 0; i < m % base_count; ++i) samples_per_part[i]++;

    Partition out;
    out.client_count = m;
    out.mode = PartitionMode::Overlapping;
    for (int i = 0; i < base_count; ++i) {
        const auto& nodes = base.assignments[i];
        const int take = static_cast<int>((nodes.size() + 1) / 2);  // ceil(half)
        Rng rng(mix_seed(seed, 31, static_cast<uint64_t>(i)));
        for (int s = 0; s < samples_per_part[i]; ++s) {
            std::vector<long> pool = nodes;
            rng.shuffle(pool);
            std::vector<long> sample(pool.begin(), pool.begin() + take);
            std::sort(sample.begin(), sample.end());
            out.assignments.push_back(std::move(sample));
        }
    }
    return out;
}

long edge_cut(const GraphData& g, const Partition& p) {
    if (p.mode != PartitionMode::NonOverlapping)
        throw std::runtime_error("edge_cut: undefined for overlapping partitions");
    validate_partition(p, g);
    std::unordered_map<long, int> part_of;
    for (int i = 0; i < p.client_count; ++i)
        for (long id : p.assignments[i]) part_of[id] = i;
    long cut = 0;
    for (const auto& [u, v] : g.edges)
        if (u < v && part_of.at(g.node_ids[u]) != part_of.at(g.node_ids[v])) ++cut;
    return cut;
}

Partition load_partition(const std::string& path, const GraphData& g) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_partition: cannot open " + path);
    std::vector<long> ids = g.node_ids;
    std::sort(ids.begin(), ids.end());

    std::vector<int> indices;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            indices.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed part index");
        }
    }
    if (static_cast<int>(indices.size()) != g.n)
        throw std::runtime_error("load_partition: file has " + std::to_string(indices.size()) + " lines for " +
                                 std::to_string(g.n) + " nodes");
    int m = 0;
    for (int idx : indices) {
        if (idx < 0) throw std::runtime_error("load_partition: negative part index");
        m = std::max(m, idx + 1);
    }
    Partition out;
    out.client_count = m;
    out.mode = PartitionMode::NonOverlapping;
    out.assignments.assign(m, {});
    for (size_t i = 0; i < indices.size(); ++i) out.assignments[indices[i]].push_back(ids[i]);
    for (auto& a : out.assignments) std::sort(a.begin(), a.end());
    validate_partition(out, g);
    return out;
}

void save_partition(const Partition& p, const GraphData& g, const std::string& path) {
    if (p.mode != PartitionMode::NonOverlapping)
        throw std::runtime_error("save_partition: only non-overlapping partitions have a node order");
    std::unordered_map<long, int> part_of;
    for (int i = 0; i < p.client_count; ++i)
        for (long id : p.assignments[i]) part_of[id] = i;
    std::vector<long> ids = g.node_ids;
    std::sort(ids.begin(), ids.end());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_partition: cannot open " + path);
    for (long id : ids) f << part_of.at(id) << '\n';
}

void validate_partition(const Partition& p, const GraphData& g) {
    if (static_cast<int>(p.assignments.size()) != p.client_count)
        throw std::runtime_error("partition: assignment count != client count");
    std::set<long> known(g.node_ids.begin(), g.node_ids.end());
    std::set<long> seen;
    for (const auto& a : p.assignments) {
        if (a.empty()) throw std::runtime_error("partition: empty client set");
        for (long id : a) {
            if (!known.count(id)) throw std::runtime_error("partition: unknown node id " + std::to_string(id));
            if (p.mode == PartitionMode::NonOverlapping && seen.count(id))
                throw std::runtime_error("partition: node " + std::to_string(id) + " assigned twice");
            seen.insert(id);
        }
    }
    if (p.mode == PartitionMode::NonOverlapping && static_cast<int>(seen.size()) != g.n)
        throw std::runtime_error("partition: does not cover all nodes");
}

}  // namespace fediih
