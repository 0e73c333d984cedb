#include "fediih/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fediih {

double accuracy(const std::vector<double>& logits, int n, int c, const std::vector<int>& labels,
                const std::vector<uint8_t>& mask) {
    long correct = 0, total = 0;
    for (int i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        int best = 0;
        for (int j = 1; j < c; ++j)
            if (logits[static_cast<size_t>(i) * c + j] > logits[static_cast<size_t>(i) * c + best]) best = j;
        correct += (best == labels[i]);
        total += 1;
    }
    if (total == 0) throw std::runtime_error("accuracy: mask selects no nodes");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels, const std::vector<uint8_t>& mask) {
    std::vector<std::pair<double, int>> pts;  // (score, label)
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) pts.push_back({scores[i], labels[i]});
    if (pts.empty()) throw std::runtime_error("auc: mask selects no nodes");
    long n_pos = 0;
    for (const auto& [s, y] : pts) n_pos += (y == 1);
    long n_neg = static_cast<long>(pts.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::runtime_error("auc: both classes must be present");

    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    // tie-averaged ranks, 1-based
    double rank_sum_pos = 0;
    size_t i = 0;
    while (i < pts.size()) {
        size_t j = i;
        while (j < pts.size() && pts[j].first == pts[i].first) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (size_t t = i; t < j; ++t)
            if (pts[t].second == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<double> ground_truth_similarity(const std::vector<GraphData>& shards) {
    const int m = static_cast<int>(shards.size());
    if (m == 0) throw std::invalid_argument("ground_truth_similarity: no shards");
    std::vector<DiagGaussian> dists;
    for (const auto& g : shards) {
        const int dim = g.d + 1;
        DiagGaussian dg;
        dg.mean.assign(dim, 0.0);
        dg.var.assign(dim, 0.0);
        for (int u = 0; u < g.n; ++u) {
            for (int j = 0; j < g.d; ++j) dg.mean[j] += g.features[static_cast<size_t>(u) * g.d + j];
            dg.mean[g.d] += g.n > 1 ? static_cast<double>(g.degree(u)) / (g.n - 1) : 0.0;
        }
        for (auto& v : dg.mean) v /= g.n;
        for (int u = 0; u < g.n; ++u) {
            for (int j = 0; j < g.d; ++j) {
                double diff = g.features[static_cast<size_t>(u) * g.d + j] - dg.mean[j];
                dg.var[j] += diff * diff;
            }
            double nd = g.n > 1 ? static_cast<double>(g.degree(u)) / (g.n - 1) : 0.0;
            dg.var[g.d] += (nd - dg.mean[g.d]) * (nd - dg.mean[g.d]);
        }
        for (auto& v : dg.var) v = std::max(v / g.n, 1e-8);
        dists.push_back(std::move(dg));
    }
    std::vector<double> out(static_cast<size_t>(m) * m, 1.0);
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            double s = 1.0 - js_divergence(dists[a], dists[b]);
            out[static_cast<size_t>(a) * m + b] = s;
            out[static_cast<size_t>(b) * m + a] = s;
        }
    return out;
}

}  // namespace fediih
