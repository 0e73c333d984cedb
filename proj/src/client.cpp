#include "fediih/client.hpp"

#include <cmath>
#include <stdexcept>

namespace fediih {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::vector<Tensor> ClientModel::trainable_params() {
    std::vector<Tensor> out;
    for (auto& t : factorized.w) out.push_back(t);
    for (auto& t : factorized.b) out.push_back(t);
    for (auto& t : sigma_head.w) out.push_back(t);
    for (auto& t : sigma_head.b) out.push_back(t);
    out.push_back(w_cls);
    out.push_back(b_cls);
    for (auto& t : alpha_hat) out.push_back(t);
    return out;
}

std::vector<Tensor> ClientModel::decayed_params() {
    std::vector<Tensor> out;
    for (auto& t : factorized.w) out.push_back(t);
    for (auto& t : factorized.b) out.push_back(t);
    for (auto& t : sigma_head.w) out.push_back(t);
    for (auto& t : sigma_head.b) out.push_back(t);
    out.push_back(w_cls);
    out.push_back(b_cls);
    return out;
}

std::vector<std::pair<std::string, Tensor>> ClientModel::named_params(const std::string& prefix) {
    std::vector<std::pair<std::string, Tensor>> out;
    for (size_t k = 0; k < factorized.w.size(); ++k) {
        out.push_back({prefix + "w" + std::to_string(k), factorized.w[k]});
        out.push_back({prefix + "b" + std::to_string(k), factorized.b[k]});
    }
    for (size_t k = 0; k < sigma_head.w.size(); ++k) {
        out.push_back({prefix + "sigma_w" + std::to_string(k), sigma_head.w[k]});
        out.push_back({prefix + "sigma_b" + std::to_string(k), sigma_head.b[k]});
    }
    out.push_back({prefix + "w_cls", w_cls});
    out.push_back({prefix + "b_cls", b_cls});
    for (size_t k = 0; k < alpha_hat.size(); ++k)
        out.push_back({prefix + "alpha_hat" + std::to_string(k), alpha_hat[k]});
    return out;
}

ClientModel make_client_model(int in_dim, int out_dim, int factor_count, int class_count, Rng& rng) {
    ClientModel m;
    m.factorized = make_factorized_params(in_dim, out_dim, factor_count, rng);
    m.sigma_head = make_sigma_head(factor_count, m.factorized.block_dim());
    m.w_cls = Tensor::glorot(class_count, out_dim, rng).set_requires_grad(true);
    m.b_cls = Tensor::zeros(1, class_count).set_requires_grad(true);
    for (int k = 0; k < factor_count; ++k)
        m.alpha_hat.push_back(Tensor::zeros(1, m.factorized.block_dim()).set_requires_grad(true));
    return m;
}

std::vector<Tensor> reparameterize(const std::vector<Tensor>& mu, const std::vector<Tensor>& sigma,
                                   const std::vector<Tensor>& noise) {
    if (mu.size() != sigma.size() || mu.size() != noise.size())
        throw std::invalid_argument("reparameterize: factor count mismatch");
    std::vector<Tensor> out;
    out.reserve(mu.size());
    for (size_t k = 0; k < mu.size(); ++k) out.push_back(add(mu[k], mul(sigma[k], noise[k])));
    return out;
}

Tensor reconstruction_loglik(const Tensor& h_tilde_cat, const Tensor& adjacency) {
    if (adjacency.rows() != h_tilde_cat.rows() || adjacency.cols() != h_tilde_cat.rows())
        throw std::invalid_argument("reconstruction_loglik: adjacency must be n x n");
    Tensor logits = clamp(matmul_nt(h_tilde_cat, h_tilde_cat), -30.0, 30.0);
    // A*x - softplus(x) == A*log(sigmoid(x)) + (1-A)*log(1-sigmoid(x))
    Tensor pos = sum(mul_const(logits, adjacency));
    Tensor neg = sum(softplus(logits));
    return sub(pos, neg);
}

Tensor kl_latent_term(const Tensor& mu, const Tensor& log_sigma, const Tensor& alpha_tilde_row,
                      const PriorConfig& prior, int node_count) {
    if (prior.sigma2_h <= 0 || prior.sigma2_alpha <= 0)
        throw std::invalid_argument("prior variances must be positive");
    Tensor diff = add_rowvec(mu, scale(alpha_tilde_row, -1.0));
    Tensor var = exp_op(scale(log_sigma, 2.0));
    Tensor quad = scale(add(var, mul(diff, diff)), 1.0 / prior.sigma2_h);
    // 0.5 * (log sigma2_h - 2 log sigma + quad - 1), per entry
    Tensor inner = add_scalar(sub(quad, scale(log_sigma, 2.0)), std::log(prior.sigma2_h) - 1.0);
    return scale(sum(inner), 0.5 / static_cast<double>(node_count));
}

Tensor alpha_log_prior_term(const Tensor& alpha_hat, const PriorConfig& prior) {
    const int j = alpha_hat.cols();
    Tensor sq = scale(sum(mul(alpha_hat, alpha_hat)), -0.5 / prior.sigma2_alpha);
    return add_scalar(sq, -0.5 * j * std::log(kTwoPi * prior.sigma2_alpha));
}

Tensor alpha_kl_term(const Tensor& alpha_hat, const Tensor& alpha_tilde_row) {
    Tensor diff = sub(alpha_hat, alpha_tilde_row);
    return scale(sum(mul(diff, diff)), 0.5);
}

Tensor classify(const Tensor& h_input, const Tensor& w_cls, const Tensor& b_cls) {
    return add_rowvec(matmul_nt(h_input, w_cls), b_cls);
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels, const std::vector<uint8_t>& mask) {
    std::vector<int> rows;
    std::vector<int> row_labels;
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) {
            rows.push_back(static_cast<int>(i));
            row_labels.push_back(labels[i]);
        }
    if (rows.empty()) throw std::runtime_error("cross_entropy: mask selects no nodes");
    Tensor picked = gather_rows(logits, rows);
    Tensor lse = row_log_sum_exp(picked);
    Tensor gold = select_cols(picked, row_labels);
    return mean(sub(lse, gold));
}

PosteriorSummary summarize_posterior(const MuSigma& enc) {
    PosteriorSummary out;
    const int k_count = static_cast<int>(enc.mu.size());
    if (k_count == 0) throw std::invalid_argument("summarize_posterior: empty encoding");
    out.node_count = enc.mu[0].rows();
    for (int k = 0; k < k_count; ++k) {
        const Tensor& mu = enc.mu[k];
        const Tensor& sigma = enc.sigma[k];
        const int n = mu.rows(), j = mu.cols();
        std::vector<double> mean_mu(j, 0.0), mean_second(j, 0.0);
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < j; ++t) {
                double m = mu.at(i, t), s = sigma.at(i, t);
                mean_mu[t] += m;
                mean_second[t] += s * s + m * m;
            }
        std::vector<double> var(j);
        for (int t = 0; t < j; ++t) {
            mean_mu[t] /= n;
            mean_second[t] /= n;
            var[t] = std::max(mean_second[t] - mean_mu[t] * mean_mu[t], 1e-8);
        }
        out.mu_hat.push_back(std::move(mean_mu));
        out.var_hat.push_back(std::move(var));
    }
    return out;
}

namespace {

Tensor alpha_tilde_tensor(const std::vector<std::vector<double>>& alpha_tilde, int k, int j, bool zero) {
    if (zero || alpha_tilde.empty()) return Tensor::zeros(1, j);
    if (static_cast<int>(alpha_tilde[k].size()) != j)
        throw std::invalid_argument("alpha_tilde block has wrong dimension");
    return Tensor::from(1, j, alpha_tilde[k]);
}

}  // namespace

ForwardResult client_forward(const ClientModel& model, const GraphData& g, const SplitMasks& masks,
                             const std::vector<std::vector<double>>& alpha_tilde, const PriorConfig& prior,
                             const ClientHyper& hyper, const std::vector<Tensor>& noise,
                             const Tensor* dropout_mask) {
    const int k_count = model.factorized.factor_count;
    const AblationFlags& ab = hyper.ablation;
    if (ab.no_dis && k_count != 1)
        throw std::runtime_error("ablated model without disentanglement must use a single factor");

    ForwardResult res;
    Tensor x = Tensor::from(g.n, g.d, g.features);
    std::vector<Tensor> z = project_to_subspaces(x, model.factorized, hyper.activation, hyper.leaky_slope);
    if (dropout_mask) {
        Tensor zc = mul_const(concat_factors(z), *dropout_mask);
        std::vector<Tensor> dropped;
        const int j = model.factorized.block_dim();
        for (int k = 0; k < k_count; ++k) dropped.push_back(slice_cols(zc, k * j, (k + 1) * j));
        z = dropped;
    }

    res.enc = encode_mu_sigma(z, g, model.sigma_head, hyper.routing);

    Tensor cls_input = hyper.classify_on_routed ? concat_factors(res.enc.mu) : concat_factors(z);
    res.logits = classify(cls_input, model.w_cls, model.b_cls);
    Tensor ce = cross_entropy(res.logits, g.labels, masks.train);

    std::vector<Tensor> h_tilde;
    if (ab.no_vi) {
        h_tilde = res.enc.mu;
    } else {
        if (static_cast<int>(noise.size()) != k_count)
            throw std::invalid_argument("client_forward: need one noise block per factor");
        h_tilde = reparameterize(res.enc.mu, res.enc.sigma, noise);
    }
    Tensor adjacency = adjacency_dense(g);
    Tensor recon = reconstruction_loglik(concat_factors(h_tilde), adjacency);

    Tensor kl = Tensor::zeros(1, 1);
    if (!ab.no_vi) {
        for (int k = 0; k < k_count; ++k) {
            Tensor at = alpha_tilde_tensor(alpha_tilde, k, model.factorized.block_dim(), ab.no_hm);
            kl = add(kl, kl_latent_term(res.enc.mu[k], res.enc.log_sigma[k], at, prior, g.n));
        }
    }

    Tensor alpha_prior = Tensor::zeros(1, 1);
    Tensor alpha_kl = Tensor::zeros(1, 1);
    if (!ab.no_hm) {
        for (int k = 0; k < k_count; ++k) {
            Tensor at = alpha_tilde_tensor(alpha_tilde, k, model.factorized.block_dim(), false);
            alpha_prior = add(alpha_prior, alpha_log_prior_term(model.alpha_hat[k], prior));
            alpha_kl = add(alpha_kl, alpha_kl_term(model.alpha_hat[k], at));
        }
    }

    // total = CE + lambda * (KL + alpha KL - reconstruction - alpha log prior)
    Tensor elbo_pieces = sub(sub(add(kl, alpha_kl), recon), alpha_prior);
    res.loss = add(ce, scale(elbo_pieces, hyper.lambda_elbo));

    res.breakdown.cross_entropy = ce.scalar();
    res.breakdown.reconstruction = recon.scalar();
    res.breakdown.kl_latent = kl.scalar();
    res.breakdown.alpha_log_prior = alpha_prior.scalar();
    res.breakdown.alpha_kl = alpha_kl.scalar();
    res.breakdown.total = res.loss.scalar();

    std::string bad;
    auto check = [&](const char* name, double v) {
        if (!std::isfinite(v)) bad += bad.empty() ? name : std::string(", ") + name;
    };
    check("cross_entropy", res.breakdown.cross_entropy);
    check("reconstruction", res.breakdown.reconstruction);
    check("kl_latent", res.breakdown.kl_latent);
    check("alpha_log_prior", res.breakdown.alpha_log_prior);
    check("alpha_kl", res.breakdown.alpha_kl);
    if (!bad.empty()) throw std::runtime_error("client_forward: non-finite loss terms: " + bad);
    return res;
}

namespace {

Tensor draw_dropout_mask(int rows, int cols, double rate, Rng& rng) {
    Tensor m = Tensor::full(rows, cols, 1.0);
    if (rate <= 0) return m;
    const double keep = 1.0 - rate;
    for (auto& v : m.value()) v = (rng.uniform() < keep) ? 1.0 / keep : 0.0;
    return m;
}

std::vector<Tensor> draw_noise(int k_count, int rows, int cols, Rng& rng) {
    std::vector<Tensor> noise;
    for (int k = 0; k < k_count; ++k) noise.push_back(Tensor::randn(rows, cols, rng));
    return noise;
}

}  // namespace

LossBreakdown client_train_epoch(ClientModel& model, const GraphData& g, const SplitMasks& masks,
                                 const std::vector<std::vector<double>>& alpha_tilde, const PriorConfig& prior,
                                 const ClientHyper& hyper, OptimizerState& opt, Rng& rng) {
    const int k_count = model.factorized.factor_count;
    const int j = model.factorized.block_dim();

    Tensor dropout_mask = draw_dropout_mask(g.n, model.factorized.out_dim, hyper.dropout, rng);
    std::vector<Tensor> noise;
    if (!hyper.ablation.no_vi) noise = draw_noise(k_count, g.n, j, rng);

    Tape tape;
    ForwardResult res = client_forward(model, g, masks, alpha_tilde, prior, hyper, noise,
                                       hyper.dropout > 0 ? &dropout_mask : nullptr);
    tape.backward(res.loss);

    opt.lr = hyper.lr;
    opt.weight_decay = 0.0;
    // decoupled decay applied here so alpha_hat stays exempt
    if (hyper.weight_decay > 0)
        for (auto& p : model.decayed_params())
            for (auto& v : p.value()) v -= hyper.lr * hyper.weight_decay * v;
    auto params = model.trainable_params();
    optimizer_step(params, opt);
    return res.breakdown;
}

Tensor client_eval_logits(const ClientModel& model, const GraphData& g, const ClientHyper& hyper) {
    Tensor x = Tensor::from(g.n, g.d, g.features);
    std::vector<Tensor> z = project_to_subspaces(x, model.factorized, hyper.activation, hyper.leaky_slope);
    Tensor cls_input;
    if (hyper.classify_on_routed) {
        cls_input = concat_factors(neighborhood_routing(z, g, hyper.routing));
    } else {
        cls_input = concat_factors(z);
    }
    return classify(cls_input, model.w_cls, model.b_cls);
}

PosteriorSummary client_posterior(const ClientModel& model, const GraphData& g, const ClientHyper& hyper) {
    Tensor x = Tensor::from(g.n, g.d, g.features);
    std::vector<Tensor> z = project_to_subspaces(x, model.factorized, hyper.activation, hyper.leaky_slope);
    MuSigma enc = encode_mu_sigma(z, g, model.sigma_head, hyper.routing);
    if (hyper.ablation.no_vi)
        for (auto& s : enc.sigma) s = Tensor::zeros(s.rows(), s.cols());
    return summarize_posterior(enc);
}

}  // namespace fediih
