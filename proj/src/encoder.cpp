#include "fediih/encoder.hpp"

#include <stdexcept>

namespace fediih {

FactorizedParams make_factorized_params(int in_dim, int out_dim, int factor_count, Rng& rng) {
    if (factor_count < 1) throw std::invalid_argument("factorized params: factor count must be >= 1");
    if (out_dim % factor_count != 0)
        throw std::invalid_argument("factorized params: out_dim " + std::to_string(out_dim) +
                                    " not divisible by K=" + std::to_string(factor_count));
    FactorizedParams p;
    p.factor_count = factor_count;
    p.in_dim = in_dim;
    p.out_dim = out_dim;
    const int j = out_dim / factor_count;
    for (int k = 0; k < factor_count; ++k) {
        p.w.push_back(Tensor::glorot(in_dim, j, rng).set_requires_grad(true));
        p.b.push_back(Tensor::zeros(1, j).set_requires_grad(true));
    }
    return p;
}

void validate_routing_config(const RoutingConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("routing: iterations must be >= 1");
    if (cfg.layers < 1) throw std::invalid_argument("routing: layers must be >= 1");
    if (cfg.tau_p <= 0) throw std::invalid_argument("routing: tau_p must be positive");
}

SigmaHead make_sigma_head(int factor_count, int block_dim) {
    SigmaHead head;
    for (int k = 0; k < factor_count; ++k) {
        head.w.push_back(Tensor::zeros(block_dim, block_dim).set_requires_grad(true));
        head.b.push_back(Tensor::zeros(1, block_dim).set_requires_grad(true));
    }
    return head;
}

namespace {

Tensor activate(const Tensor& t, Activation act, double leaky_slope) {
    switch (act) {
        case Activation::LeakyRelu: return leaky_relu(t, leaky_slope);
        case Activation::Relu: return relu(t);
        case Activation::Tanh: return tanh_act(t);
        case Activation::Sigmoid: return sigmoid(t);
    }
    throw std::logic_error("unknown activation");
}

}  // namespace

std::vector<Tensor> project_to_subspaces(const Tensor& x, const FactorizedParams& params, Activation act,
                                         double leaky_slope) {
    if (x.cols() != params.in_dim)
        throw std::invalid_argument("project_to_subspaces: feature dim " + std::to_string(x.cols()) +
                                    " != parameter in_dim " + std::to_string(params.in_dim));
    std::vector<Tensor> z;
    z.reserve(params.factor_count);
    for (int k = 0; k < params.factor_count; ++k) {
        Tensor pre = add_rowvec(matmul(x, params.w[k]), params.b[k]);
        z.push_back(row_l2_normalize(activate(pre, act, leaky_slope)));
    }
    return z;
}

Tensor adjacency_dense(const GraphData& g) {
    Tensor a(g.n, g.n);
    for (const auto& [u, v] : g.edges) a.set(u, v, 1.0);
    return a;
}

std::vector<Tensor> neighborhood_routing(const std::vector<Tensor>& z_in, const GraphData& g,
                                         const RoutingConfig& cfg, RoutingProbe* probe) {
    validate_routing_config(cfg);
    const int k_count = static_cast<int>(z_in.size());
    if (k_count == 0) throw std::invalid_argument("routing: no factor blocks");
    for (const auto& zk : z_in)
        if (zk.rows() != g.n)
            throw std::invalid_argument("routing: block has " + std::to_string(zk.rows()) + " rows for " +
                                        std::to_string(g.n) + " nodes");

    Tensor mask = adjacency_dense(g);
    Tensor off_mask = Tensor::full(g.n, g.n, 1.0);
    for (size_t i = 0; i < off_mask.value().size(); ++i) off_mask.value()[i] -= mask.value()[i];

    const double inv_tau = 1.0 / cfg.tau_p;

    // softmax over factors of (scores/tau), restricted to the edge set
    auto edge_softmax = [&](const std::vector<Tensor>& scores) {
        std::vector<Tensor> expd;
        expd.reserve(k_count);
        for (const auto& s : scores) expd.push_back(mul_const(exp_op(scale(s, inv_tau)), mask));
        Tensor denom = expd[0];
        for (int k = 1; k < k_count; ++k) denom = add(denom, expd[k]);
        denom = add(denom, off_mask);  // avoid 0/0 where no edge
        std::vector<Tensor> probs;
        probs.reserve(k_count);
        for (int k = 0; k < k_count; ++k) probs.push_back(div(expd[k], denom));
        return probs;
    };

    std::vector<Tensor> z = z_in;
    std::vector<Tensor> routed;
    for (int layer = 0; layer < cfg.layers; ++layer) {
        if (layer > 0) {
            for (auto& zk : z) zk = row_l2_normalize(zk);
        }
        // initial assignment from center = z itself
        std::vector<Tensor> scores;
        scores.reserve(k_count);
        for (int k = 0; k < k_count; ++k) scores.push_back(matmul_nt(z[k], z[k]));
        std::vector<Tensor> probs = edge_softmax(scores);
        if (probe) probe->probs.push_back(probs);

        for (int t = 0; t < cfg.iterations; ++t) {
            routed.clear();
            for (int k = 0; k < k_count; ++k)
                routed.push_back(row_l2_normalize(add(z[k], matmul(probs[k], z[k]))));
            std::vector<Tensor> new_scores;
            new_scores.reserve(k_count);
            for (int k = 0; k < k_count; ++k) new_scores.push_back(matmul_nt(routed[k], z[k]));
            probs = edge_softmax(new_scores);
            if (probe) probe->probs.push_back(probs);
        }
        z = routed;
    }
    return z;
}

Tensor concat_factors(const std::vector<Tensor>& blocks) { return concat_cols(blocks); }

MuSigma encode_mu_sigma(const std::vector<Tensor>& z, const GraphData& g, const SigmaHead& head,
                        const RoutingConfig& cfg) {
    if (z.size() != head.w.size())
        throw std::invalid_argument("encode_mu_sigma: factor count mismatch between projection and sigma head");
    MuSigma out;
    out.mu = neighborhood_routing(z, g, cfg);
    for (size_t k = 0; k < out.mu.size(); ++k) {
        Tensor s = add_rowvec(matmul(out.mu[k], head.w[k]), head.b[k]);
        out.log_sigma.push_back(s);
        out.sigma.push_back(exp_op(s));
    }
    return out;
}

}  // namespace fediih
