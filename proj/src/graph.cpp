#include "fediih/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "fediih/rng.hpp"

namespace fediih {

long GraphData::undirected_edge_count() const {
    long count = 0;
    for (const auto& [u, v] : edges)
        if (u <= v) ++count;
    return count;
}

bool GraphData::has_edge(int u, int v) const {
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, v));
    return it != edges.end() && it->first == u && it->second == v;
}

GraphData make_graph(int n, int d, int c, std::vector<double> features, std::vector<std::pair<int, int>> raw_edges,
                     std::vector<int> labels, std::vector<long> node_ids) {
    GraphData g;
    g.n = n;
    g.d = d;
    g.c = c;
    g.features = std::move(features);
    g.labels = std::move(labels);
    if (node_ids.empty()) {
        g.node_ids.resize(n);
        for (int i = 0; i < n; ++i) g.node_ids[i] = i;
    } else {
        g.node_ids = std::move(node_ids);
    }

    for (const auto& [u, v] : raw_edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::runtime_error("make_graph: edge endpoint (" + std::to_string(u) + "," + std::to_string(v) +
                                     ") outside node range [0," + std::to_string(n) + ")");
        g.edges.emplace_back(u, v);
        if (u != v) g.edges.emplace_back(v, u);
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

    g.adj_offsets.assign(n + 1, 0);
    for (const auto& [u, v] : g.edges) g.adj_offsets[u + 1]++;
    for (int i = 0; i < n; ++i) g.adj_offsets[i + 1] += g.adj_offsets[i];
    g.adj_targets.reserve(g.edges.size());
    for (const auto& [u, v] : g.edges) g.adj_targets.push_back(v);

    validate_graph(g);
    return g;
}

void validate_graph(const GraphData& g) {
    if (static_cast<long>(g.features.size()) != static_cast<long>(g.n) * g.d)
        throw std::runtime_error("graph: feature matrix has " + std::to_string(g.features.size()) +
                                 " entries, expected " + std::to_string(static_cast<long>(g.n) * g.d));
    if (static_cast<int>(g.labels.size()) != g.n) throw std::runtime_error("graph: label vector length != n");
    if (static_cast<int>(g.node_ids.size()) != g.n) throw std::runtime_error("graph: node_ids length != n");
    for (int i = 0; i < g.n; ++i)
        if (g.labels[i] < 0 || g.labels[i] >= g.c)
            throw std::runtime_error("graph: node " + std::to_string(i) + " has label " + std::to_string(g.labels[i]) +
                                     " outside [0," + std::to_string(g.c) + ")");
    for (const auto& [u, v] : g.edges)
        if (u != v && !g.has_edge(v, u)) throw std::runtime_error("graph: adjacency not symmetric");
    std::unordered_set<long> seen(g.node_ids.begin(), g.node_ids.end());
    if (static_cast<int>(seen.size()) != g.n) throw std::runtime_error("graph: duplicate node ids");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == '\t' || ch == ' ') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

[[noreturn]] void parse_error(const std::string& path, int line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

GraphData load_graph(const std::string& node_path, const std::string& edge_path) {
    std::ifstream nf(node_path);
    if (!nf) throw std::runtime_error("load_graph: cannot open " + node_path);

    std::vector<long> ids;
    std::vector<int> labels;
    std::vector<double> features;
    int d = -1, max_label = -1;
    std::unordered_map<long, int> id_to_index;

    std::string line;
    int line_no = 0;
    while (std::getline(nf, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 3) parse_error(node_path, line_no, "expected 'id<TAB>label<TAB>f1,f2,...'");
        long id;
        int label;
        try {
            id = std::stol(fields[0]);
            label = std::stoi(fields[1]);
        } catch (const std::exception&) {
            parse_error(node_path, line_no, "malformed id or label");
        }
        std::vector<double> feats;
        std::stringstream fs(fields[2]);
        std::string tok;
        while (std::getline(fs, tok, ',')) {
            try {
                feats.push_back(std::stod(tok));
            } catch (const std::exception&) {
                parse_error(node_path, line_no, "malformed feature value '" + tok + "'");
            }
        }
        if (d < 0)
            d = static_cast<int>(feats.size());
        else if (static_cast<int>(feats.size()) != d)
            parse_error(node_path, line_no,
                        "feature count " + std::to_string(feats.size()) + " differs from earlier rows (" +
                            std::to_string(d) + ")");
        if (label < 0) parse_error(node_path, line_no, "negative label");
        if (id_to_index.count(id)) parse_error(node_path, line_no, "duplicate node id " + std::to_string(id));
        id_to_index[id] = static_cast<int>(ids.size());
        ids.push_back(id);
        labels.push_back(label);
        features.insert(features.end(), feats.begin(), feats.end());
        max_label = std::max(max_label, label);
    }
    if (ids.empty()) throw std::runtime_error("load_graph: " + node_path + " has no nodes");

    std::ifstream ef(edge_path);
    if (!ef) throw std::runtime_error("load_graph: cannot open " + edge_path);
    std::vector<std::pair<int, int>> edges;
    line_no = 0;
    while (std::getline(ef, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 2) parse_error(edge_path, line_no, "expected 'u<TAB>v'");
        long u, v;
        try {
            u = std::stol(fields[0]);
            v = std::stol(fields[1]);
        } catch (const std::exception&) {
            parse_error(edge_path, line_no, "malformed endpoint");
        }
        auto iu = id_to_index.find(u), iv = id_to_index.find(v);
        if (iu == id_to_index.end())
            parse_error(edge_path, line_no, "endpoint " + std::to_string(u) + " is not a known node id");
        if (iv == id_to_index.end())
            parse_error(edge_path, line_no, "endpoint " + std::to_string(v) + " is not a known node id");
        edges.emplace_back(iu->second, iv->second);
    }

    const int n = static_cast<int>(ids.size());
    return make_graph(n, d, max_label + 1, std::move(features), std::move(edges), std::move(labels), std::move(ids));
}

void save_graph(const GraphData& g, const std::string& node_path, const std::string& edge_path) {
    std::ofstream nf(node_path);
    if (!nf) throw std::runtime_error("save_graph: cannot open " + node_path);
    for (int i = 0; i < g.n; ++i) {
        nf << g.node_ids[i] << '\t' << g.labels[i] << '\t';
        for (int j = 0; j < g.d; ++j) {
            if (j) nf << ',';
            char buf[32];
            snprintf(buf, sizeof(buf), "%.12g", g.features[static_cast<size_t>(i) * g.d + j]);
            nf << buf;
        }
        nf << '\n';
    }
    std::ofstream ef(edge_path);
    if (!ef) throw std::runtime_error("save_graph: cannot open " + edge_path);
    for (const auto& [u, v] : g.edges)
        if (u <= v) ef << g.node_ids[u] << '\t' << g.node_ids[v] << '\n';
}

// ---- synthetic generation -------------------------------------------------------

void validate_spec(const SyntheticSpec& spec) {
    if (spec.n <= 0 || spec.d <= 0 || spec.c <= 0) throw std::runtime_error("synthetic spec: n, d, c must be positive");
    if (spec.k_true < 1) throw std::runtime_error("synthetic spec: k_true must be >= 1");
    if (static_cast<int>(spec.block_probs.size()) != spec.k_true)
        throw std::runtime_error("synthetic spec: need one block matrix per relation type");
    for (const auto& bp : spec.block_probs) {
        if (static_cast<int>(bp.size()) != spec.c * spec.c)
            throw std::runtime_error("synthetic spec: block matrix must be c*c");
        for (double p : bp)
            if (p < 0.0 || p > 1.0) throw std::runtime_error("synthetic spec: probability outside [0,1]");
    }
    if (spec.noise_scale < 0.0) throw std::runtime_error("synthetic spec: negative noise scale");
}

SyntheticGraph generate_synthetic_detailed(const SyntheticSpec& spec) {
    validate_spec(spec);
    const int n = spec.n, d = spec.d, c = spec.c, kt = spec.k_true;

    // labels in contiguous equal blocks
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = std::min(c - 1, i * c / n);

    // one stream per relation type so layers are independent
    SyntheticGraph out;
    out.layer_edges.resize(kt);
    std::set<std::pair<int, int>> merged;
    for (int k = 0; k < kt; ++k) {
        Rng rng(mix_seed(spec.seed, 1000 + k));
        const auto& bp = spec.block_probs[k];
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < bp[labels[i] * c + labels[j]]) {
                    out.layer_edges[k].emplace_back(i, j);
                    merged.insert({i, j});
                }
    }

    // features: class prototype + per-type class signal + noise
    Rng frng(mix_seed(spec.seed, 2));
    std::vector<std::vector<double>> proto(c, std::vector<double>(d));
    for (auto& p : proto)
        for (auto& x : p) x = frng.normal() / std::sqrt(static_cast<double>(d));
    std::vector<std::vector<double>> type_signal(static_cast<size_t>(kt) * c, std::vector<double>(d));
    for (auto& p : type_signal)
        for (auto& x : p) x = frng.normal() / std::sqrt(static_cast<double>(d));

    std::vector<double> features(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i) {
        int y = labels[i];
        for (int j = 0; j < d; ++j) {
            double v = proto[y][j];
            for (int k = 0; k < kt; ++k) v += type_signal[static_cast<size_t>(k) * c + y][j];
            v += spec.noise_scale * frng.normal();
            features[static_cast<size_t>(i) * d + j] = v;
        }
    }

    std::vector<std::pair<int, int>> edges(merged.begin(), merged.end());
    out.graph = make_graph(n, d, c, std::move(features), std::move(edges), std::move(labels));
    return out;
}

GraphData generate_synthetic(const SyntheticSpec& spec) { return generate_synthetic_detailed(spec).graph; }

// ---- splits -----------------------------------------------------------------------

namespace {

// Largest-remainder apportionment of `total` across classes proportional to
// class sizes, respecting remaining per-class capacity.
std::vector<int> apportion(const std::vector<int>& class_sizes, const std::vector<int>& capacity, double ratio,
                           int total) {
    const int nc = static_cast<int>(class_sizes.size());
    std::vector<int> out(nc, 0);
    std::vector<std::pair<double, int>> rema;
    int assigned = 0;
    for (int i = 0; i < nc; ++i) {
        double exact = ratio * class_sizes[i];
        out[i] = std::min(static_cast<int>(std::floor(exact + 1e-9)), capacity[i]);
        assigned += out[i];
        rema.push_back({exact - out[i], i});
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    int idx = 0;
    while (assigned < total && idx < nc * 4) {
        int i = rema[idx % nc].second;
        if (out[i] < capacity[i]) {
            out[i]++;
            assigned++;
        }
        idx++;
    }
    if (assigned < total) {
        for (int i = 0; i < nc && assigned < total; ++i)
            while (out[i] < capacity[i] && assigned < total) {
                out[i]++;
                assigned++;
            }
    }
    return out;
}

}  // namespace

SplitMasks make_splits(const GraphData& g, double train_ratio, double val_ratio, double test_ratio, uint64_t seed) {
    if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0)
        throw std::runtime_error("make_splits: negative ratio");
    if (train_ratio + val_ratio + test_ratio > 1.0 + 1e-9)
        throw std::runtime_error("make_splits: ratios sum to more than 1");

    std::vector<std::vector<int>> by_class(g.c);
    for (int i = 0; i < g.n; ++i) by_class[g.labels[i]].push_back(i);

    std::vector<int> class_sizes(g.c);
    for (int y = 0; y < g.c; ++y) {
        class_sizes[y] = static_cast<int>(by_class[y].size());
        if (train_ratio > 0 && class_sizes[y] > 0 &&
            static_cast<int>(std::floor(train_ratio * class_sizes[y] + 1e-9)) == 0)
            throw std::runtime_error("make_splits: class " + std::to_string(y) + " has only " +
                                     std::to_string(class_sizes[y]) + " nodes, too few for one train sample");
        Rng rng(mix_seed(seed, 100 + y));
        rng.shuffle(by_class[y]);
    }

    const double ratios[3] = {train_ratio, val_ratio, test_ratio};
    int totals[3];
    int assigned_total = 0;
    double rsum = train_ratio + val_ratio + test_ratio;
    for (int s = 0; s < 3; ++s) {
        totals[s] = static_cast<int>(std::floor(ratios[s] * g.n + 1e-9));
        assigned_total += totals[s];
    }
    if (rsum > 1.0 - 1e-9) {
        // ratios cover everything: distribute rounding leftovers by remainder
        std::vector<std::pair<double, int>> rema;
        for (int s = 0; s < 3; ++s) rema.push_back({ratios[s] * g.n - totals[s], s});
        std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (int i = 0; assigned_total < g.n && i < 3; ++i) {
            totals[rema[i].second]++;
            assigned_total++;
        }
    }

    SplitMasks masks;
    masks.train.assign(g.n, 0);
    masks.val.assign(g.n, 0);
    masks.test.assign(g.n, 0);
    std::vector<int> used(g.c, 0);
    std::vector<uint8_t>* mask_of[3] = {&masks.train, &masks.val, &masks.test};
    for (int s = 0; s < 3; ++s) {
        std::vector<int> capacity(g.c);
        for (int y = 0; y < g.c; ++y) capacity[y] = class_sizes[y] - used[y];
        auto counts = apportion(class_sizes, capacity, ratios[s], totals[s]);
        for (int y = 0; y < g.c; ++y) {
            for (int t = 0; t < counts[y]; ++t) (*mask_of[s])[by_class[y][used[y] + t]] = 1;
            used[y] += counts[y];
        }
    }
    return masks;
}

// ---- induced subgraphs ---------------------------------------------------------------

Subgraph induced_subgraph(const GraphData& g, const std::vector<long>& ids) {
    std::unordered_map<long, int> id_to_index;
    for (int i = 0; i < g.n; ++i) id_to_index[g.node_ids[i]] = i;

    std::unordered_set<long> wanted;
    for (long id : ids) {
        if (!id_to_index.count(id))
            throw std::runtime_error("induced_subgraph: unknown node id " + std::to_string(id));
        wanted.insert(id);
    }

    Subgraph out;
    std::vector<int> new_index(g.n, -1);
    for (int i = 0; i < g.n; ++i)
        if (wanted.count(g.node_ids[i])) {
            new_index[i] = static_cast<int>(out.origin_index.size());
            out.origin_index.push_back(i);
        }

    const int m = static_cast<int>(out.origin_index.size());
    std::vector<double> features(static_cast<size_t>(m) * g.d);
    std::vector<int> labels(m);
    std::vector<long> node_ids(m);
    for (int i = 0; i < m; ++i) {
        int src = out.origin_index[i];
        labels[i] = g.labels[src];
        node_ids[i] = g.node_ids[src];
        std::copy(g.features.begin() + static_cast<size_t>(src) * g.d,
                  g.features.begin() + static_cast<size_t>(src + 1) * g.d,
                  features.begin() + static_cast<size_t>(i) * g.d);
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& [u, v] : g.edges)
        if (u <= v && new_index[u] >= 0 && new_index[v] >= 0) edges.emplace_back(new_index[u], new_index[v]);

    out.graph = make_graph(m, g.d, g.c, std::move(features), std::move(edges), std::move(labels), std::move(node_ids));
    return out;
}

SplitMasks slice_masks(const SplitMasks& masks, const std::vector<int>& origin_index) {
    SplitMasks out;
    out.train.reserve(origin_index.size());
    for (int src : origin_index) {
        out.train.push_back(masks.train[src]);
        out.val.push_back(masks.val[src]);
        out.test.push_back(masks.test[src]);
    }
    return out;
}

}  // namespace fediih
