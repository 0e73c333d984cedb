#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fediih/encoder.hpp"
#include "fediih/graph.hpp"
#include "fediih/tensor.hpp"

namespace fediih {

struct PriorConfig {
    double sigma2_alpha = 1.0;  // variance of the top-level latent prior
    double sigma2_h = 0.25;     // variance of the node-latent prior around it
};

// Per-client, per-factor diagonal-Gaussian summary of the node posterior;
// the only distributional payload a client uploads.
struct PosteriorSummary {
    std::vector<std::vector<double>> mu_hat;   // K x J
    std::vector<std::vector<double>> var_hat;  // K x J, strictly positive
    long node_count = 0;
};

struct LossBreakdown {
    double cross_entropy = 0;
    double reconstruction = 0;    // graph log-likelihood (<= 0)
    double kl_latent = 0;         // node-averaged, summed over factors
    double alpha_log_prior = 0;   // sum over factors
    double alpha_kl = 0;          // sum over factors
    double total = 0;
};

struct AblationFlags {
    bool no_hm = false;   // drop the global-latent terms, pin alpha_tilde at 0
    bool no_vi = false;   // deterministic latents, drop the latent KL
    bool no_dis = false;  // single factor
};

struct ClientHyper {
    double lr = 0.01;
    double weight_decay = 0.0;
    double dropout = 0.0;
    double lambda_elbo = 1.0;
    double leaky_slope = 0.01;
    Activation activation = Activation::LeakyRelu;
    RoutingConfig routing;
    bool classify_on_routed = false;  // default: classifier reads the projected embeddings
    AblationFlags ablation;
};

// Everything one simulated client trains. alpha_hat stays local; the
// projection blocks and the classifier are what federation touches.
struct ClientModel {
    FactorizedParams factorized;
    SigmaHead sigma_head;
    Tensor w_cls;  // c x d_out
    Tensor b_cls;  // 1 x c
    std::vector<Tensor> alpha_hat;  // K row vectors, 1 x J

    int class_count() const { return w_cls.rows(); }
    std::vector<Tensor> trainable_params();
    // parameters subject to weight decay (excludes alpha_hat)
    std::vector<Tensor> decayed_params();
    std::vector<std::pair<std::string, Tensor>> named_params(const std::string& prefix = "");
};

ClientModel make_client_model(int in_dim, int out_dim, int factor_count, int class_count, Rng& rng);

// ---- loss pieces ---------------------------------------------------------------

// H_tilde = mu + sigma .* eps, per factor.
std::vector<Tensor> reparameterize(const std::vector<Tensor>& mu, const std::vector<Tensor>& sigma,
                                   const std::vector<Tensor>& noise);

// Full n^2 Bernoulli log-likelihood of the adjacency under inner-product
// decoding; logits clamped to +-30.
Tensor reconstruction_loglik(const Tensor& h_tilde_cat, const Tensor& adjacency);

// Node-averaged KL(N(mu_row, sigma_row^2) || N(alpha_tilde, sigma2_h I)).
Tensor kl_latent_term(const Tensor& mu, const Tensor& log_sigma, const Tensor& alpha_tilde_row,
                      const PriorConfig& prior, int node_count);

// log N(alpha_hat; 0, sigma2_alpha I)
Tensor alpha_log_prior_term(const Tensor& alpha_hat, const PriorConfig& prior);
// 0.5 * ||alpha_hat - alpha_tilde||^2
Tensor alpha_kl_term(const Tensor& alpha_hat, const Tensor& alpha_tilde_row);

Tensor classify(const Tensor& h_input, const Tensor& w_cls, const Tensor& b_cls);
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels, const std::vector<uint8_t>& mask);

PosteriorSummary summarize_posterior(const MuSigma& enc);

// ---- forward/training ------------------------------------------------------------

struct ForwardResult {
    Tensor loss;
    LossBreakdown breakdown;
    MuSigma enc;
    Tensor logits;
};

// One differentiable pass over the whole loss. `noise` supplies the
// reparameterization draws (K blocks, n x J); ignored under no_vi.
// `dropout_mask` (n x d_out scale mask) is applied to the projected
// embeddings when given.
ForwardResult client_forward(const ClientModel& model, const GraphData& g, const SplitMasks& masks,
                             const std::vector<std::vector<double>>& alpha_tilde, const PriorConfig& prior,
                             const ClientHyper& hyper, const std::vector<Tensor>& noise,
                             const Tensor* dropout_mask = nullptr);

// Lines 4-12 of the per-round client loop: forward, backward, one optimizer
// pass. Deterministic given the rng state.
LossBreakdown client_train_epoch(ClientModel& model, const GraphData& g, const SplitMasks& masks,
                                 const std::vector<std::vector<double>>& alpha_tilde, const PriorConfig& prior,
                                 const ClientHyper& hyper, OptimizerState& opt, Rng& rng);

// Evaluation pass (no tape, no dropout): logits for metric computation.
Tensor client_eval_logits(const ClientModel& model, const GraphData& g, const ClientHyper& hyper);

// Post-training summary upload (no tape, no dropout).
PosteriorSummary client_posterior(const ClientModel& model, const GraphData& g, const ClientHyper& hyper);

}  // namespace fediih
