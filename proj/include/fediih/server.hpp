#pragma once

#include <cstdint>
#include <vector>

#include "fediih/client.hpp"

namespace fediih {

struct DiagGaussian {
    std::vector<double> mean;
    std::vector<double> var;
};

// KL(P || Q) between diagonal Gaussians, in nats.
double kl_diag(const DiagGaussian& p, const DiagGaussian& q);

// Base-2 Jensen-Shannon divergence, approximated by moment-matching the
// midpoint mixture to a diagonal Gaussian; symmetric, clamped to [0,1],
// exactly 0 for identical inputs.
double js_divergence(const DiagGaussian& p, const DiagGaussian& q);

// Seeded Monte-Carlo estimate of the exact base-2 JS, for cross-validation.
double js_divergence_mc(const DiagGaussian& p, const DiagGaussian& q, int samples, uint64_t seed);

// Per-factor client-similarity matrices S[k], entries 1 - JS in [0,1],
// symmetric with unit diagonal.
std::vector<std::vector<double>> similarity_matrix(const std::vector<PosteriorSummary>& summaries);

// Softmax of tau-scaled similarities, computed with max subtraction.
std::vector<double> federation_weights(const std::vector<double>& s_row, double tau);

struct SimilarityState {
    int client_count = 0;
    std::vector<std::vector<double>> s;     // K matrices, M*M row-major
    std::vector<std::vector<double>> beta;  // K row-stochastic matrices, M*M
};

SimilarityState build_similarity_state(const std::vector<PosteriorSummary>& summaries, double tau);

// Value snapshot of the parameters a client uploads each round.
struct ParamSnapshot {
    int factor_count = 0;
    int in_dim = 0, out_dim = 0, class_count = 0;
    std::vector<std::vector<double>> w;  // K blocks, d*(d_out/K)
    std::vector<std::vector<double>> b;  // K blocks, d_out/K
    std::vector<double> w_cls;           // c*d_out row-major
    std::vector<double> b_cls;           // c
    long node_count = 0;
};

ParamSnapshot snapshot_params(const ClientModel& model, long node_count);
void load_snapshot(ClientModel& model, const ParamSnapshot& snap);

// Per-factor weighted averaging of the projection blocks and the matching
// classifier column blocks; returns one personalized set per client.
// The classifier bias is not touched here (see fedavg_bias).
std::vector<ParamSnapshot> separate_federate(const std::vector<ParamSnapshot>& uploads, const SimilarityState& sim);

// Size-weighted averaging of the classifier bias, broadcast to every client.
std::vector<double> fedavg_bias(const std::vector<ParamSnapshot>& uploads);

// Plain size-weighted averaging of every federated parameter (the FedAvg
// baseline); returns the single shared set.
ParamSnapshot fedavg_all(const std::vector<ParamSnapshot>& uploads);

struct GlobalLatent {
    std::vector<std::vector<double>> alpha_tilde;  // K x J
};

// Closed-form update of the global latent means from the uploaded summaries;
// optional sampling draws one unit-variance perturbation around it.
GlobalLatent update_global_alpha(const std::vector<PosteriorSummary>& summaries, const PriorConfig& prior,
                                 bool sampled, uint64_t seed);

}  // namespace fediih
