#pragma once

#include <vector>

#include "fediih/graph.hpp"
#include "fediih/tensor.hpp"

namespace fediih {

enum class Activation { LeakyRelu, Relu, Tanh, Sigmoid };

// Per-factor projection blocks; the federated encoder parameters.
struct FactorizedParams {
    int factor_count = 1;  // K
    int in_dim = 0;        // d
    int out_dim = 0;       // d_out, divisible by K
    std::vector<Tensor> w;  // K blocks, d x (d_out/K)
    std::vector<Tensor> b;  // K row vectors, 1 x (d_out/K)

    int block_dim() const { return out_dim / factor_count; }
};

FactorizedParams make_factorized_params(int in_dim, int out_dim, int factor_count, Rng& rng);

struct RoutingConfig {
    int iterations = 6;  // T
    int layers = 1;      // L
    double tau_p = 1.0;  // assignment hardness
};

void validate_routing_config(const RoutingConfig& cfg);

// Per-factor affine maps producing log standard deviations; local to each
// client, not federated. Zero-initialized so sigma starts at 1.
struct SigmaHead {
    std::vector<Tensor> w;  // K blocks, J x J
    std::vector<Tensor> b;  // K row vectors, 1 x J
};

SigmaHead make_sigma_head(int factor_count, int block_dim);

// Projects features into K subspaces and L2-normalizes each row (Z blocks).
std::vector<Tensor> project_to_subspaces(const Tensor& x, const FactorizedParams& params, Activation act,
                                         double leaky_slope = 0.01);

// Captured per-iteration neighbor-assignment probabilities, for inspection.
// probs[i][k] is the n x n probability matrix of factor k after step i
// (step 0 is the initialization); entries are zero off the edge set.
struct RoutingProbe {
    std::vector<std::vector<Tensor>> probs;
};

// Iterative neighbor-to-factor soft assignment. Each of the L layers runs T
// rounds of: aggregate neighbors weighted by the current assignment, then
// re-score assignments against the new aggregates (softmax over factors).
// Differentiable through every iteration.
std::vector<Tensor> neighborhood_routing(const std::vector<Tensor>& z, const GraphData& g, const RoutingConfig& cfg,
                                         RoutingProbe* probe = nullptr);

Tensor concat_factors(const std::vector<Tensor>& blocks);

// Dense n x n adjacency indicator built from the edge list.
Tensor adjacency_dense(const GraphData& g);

struct MuSigma {
    std::vector<Tensor> mu;         // routed factor outputs
    std::vector<Tensor> log_sigma;  // sigma-head outputs
    std::vector<Tensor> sigma;      // exp(log_sigma), strictly positive
};

// Shared projection feeds both branches; the mu branch is the routed output
// itself, the sigma branch adds the local per-factor affine head.
// `z` must come from project_to_subspaces (optionally after dropout).
MuSigma encode_mu_sigma(const std::vector<Tensor>& z, const GraphData& g, const SigmaHead& head,
                        const RoutingConfig& cfg);

}  // namespace fediih
