#include "fediih/server.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fediih {

namespace {
const double kLn2 = 0.69314718055994530941723212145818;

void check_gaussian(const DiagGaussian& g, const char* who) {
    if (g.mean.size() != g.var.size()) throw std::invalid_argument(std::string(who) + ": mean/var length mismatch");
    for (double v : g.var)
        if (v <= 0) throw std::invalid_argument(std::string(who) + ": non-positive variance");
}
}  // namespace

double kl_diag(const DiagGaussian& p, const DiagGaussian& q) {
    check_gaussian(p, "kl_diag");
    check_gaussian(q, "kl_diag");
    if (p.mean.size() != q.mean.size()) throw std::invalid_argument("kl_diag: dimension mismatch");
    double acc = 0;
    for (size_t j = 0; j < p.mean.size(); ++j) {
        double dm = p.mean[j] - q.mean[j];
        acc += std::log(q.var[j] / p.var[j]) + (p.var[j] + dm * dm) / q.var[j] - 1.0;
    }
    return 0.5 * acc;
}

double js_divergence(const DiagGaussian& p, const DiagGaussian& q) {
    check_gaussian(p, "js_divergence");
    check_gaussian(q, "js_divergence");
    if (p.mean.size() != q.mean.size()) throw std::invalid_argument("js_divergence: dimension mismatch");
    DiagGaussian mid;
    mid.mean.resize(p.mean.size());
    mid.var.resize(p.mean.size());
    for (size_t j = 0; j < p.mean.size(); ++j) {
        double dm = p.mean[j] - q.mean[j];
        mid.mean[j] = 0.5 * (p.mean[j] + q.mean[j]);
        // mixture variance written so identical inputs give exactly var
        mid.var[j] = 0.5 * (p.var[j] + q.var[j]) + 0.25 * dm * dm;
    }
    double js_nats = 0.5 * kl_diag(p, mid) + 0.5 * kl_diag(q, mid);
    double js_bits = js_nats / kLn2;
    return std::min(1.0, std::max(0.0, js_bits));
}

double js_divergence_mc(const DiagGaussian& p, const DiagGaussian& q, int samples, uint64_t seed) {
    check_gaussian(p, "js_divergence_mc");
    check_gaussian(q, "js_divergence_mc");
    Rng rng(seed);
    auto log_pdf = [](const DiagGaussian& g, const std::vector<double>& x) {
        double acc = 0;
        for (size_t j = 0; j < g.mean.size(); ++j) {
            double d = x[j] - g.mean[j];
            acc += -0.5 * std::log(2.0 * M_PI * g.var[j]) - 0.5 * d * d / g.var[j];
        }
        return acc;
    };
    auto half = [&](const DiagGaussian& from) {
        double acc = 0;
        std::vector<double> x(from.mean.size());
        for (int s = 0; s < samples; ++s) {
            for (size_t j = 0; j < x.size(); ++j) x[j] = from.mean[j] + std::sqrt(from.var[j]) * rng.normal();
            double lp = log_pdf(p, x), lq = log_pdf(q, x);
            double lf = (&from == &p) ? lp : lq;
            double lm = std::max(lp, lq) + std::log1p(std::exp(-std::fabs(lp - lq))) - kLn2;
            acc += (lf - lm) / kLn2;
        }
        return acc / samples;
    };
    double js = 0.5 * half(p) + 0.5 * half(q);
    return std::min(1.0, std::max(0.0, js));
}

namespace {

DiagGaussian factor_gaussian(const PosteriorSummary& s, int k) {
    return DiagGaussian{s.mu_hat[k], s.var_hat[k]};
}

}  // namespace

std::vector<std::vector<double>> similarity_matrix(const std::vector<PosteriorSummary>& summaries) {
    const int m = static_cast<int>(summaries.size());
    if (m == 0) throw std::invalid_argument("similarity_matrix: no summaries");
    const size_t k_count = summaries[0].mu_hat.size();
    for (const auto& s : summaries) {
        if (s.mu_hat.size() != k_count || s.var_hat.size() != k_count)
            throw std::invalid_argument("similarity_matrix: summary missing factors for some client");
        for (size_t k = 0; k < k_count; ++k)
            if (s.mu_hat[k].size() != summaries[0].mu_hat[k].size())
                throw std::invalid_argument("similarity_matrix: summary dimensions disagree");
    }
    std::vector<std::vector<double>> s_mats(k_count, std::vector<double>(static_cast<size_t>(m) * m, 0.0));
    for (size_t k = 0; k < k_count; ++k) {
        for (int a = 0; a < m; ++a) {
            s_mats[k][static_cast<size_t>(a) * m + a] = 1.0;
            for (int b = a + 1; b < m; ++b) {
                double sim = 1.0 - js_divergence(factor_gaussian(summaries[a], static_cast<int>(k)),
                                                 factor_gaussian(summaries[b], static_cast<int>(k)));
                s_mats[k][static_cast<size_t>(a) * m + b] = sim;
                s_mats[k][static_cast<size_t>(b) * m + a] = sim;
            }
        }
    }
    return s_mats;
}

std::vector<double> federation_weights(const std::vector<double>& s_row, double tau) {
    if (s_row.empty()) throw std::invalid_argument("federation_weights: empty row");
    for (double s : s_row)
        if (!std::isfinite(s)) throw std::invalid_argument("federation_weights: non-finite similarity");
    double mx = tau * s_row[0];
    for (double s : s_row) mx = std::max(mx, tau * s);
    std::vector<double> w(s_row.size());
    double z = 0;
    for (size_t i = 0; i < s_row.size(); ++i) {
        w[i] = std::exp(tau * s_row[i] - mx);
        z += w[i];
    }
    for (auto& x : w) x /= z;
    return w;
}

SimilarityState build_similarity_state(const std::vector<PosteriorSummary>& summaries, double tau) {
    SimilarityState st;
    st.client_count = static_cast<int>(summaries.size());
    st.s = similarity_matrix(summaries);
    const int m = st.client_count;
    for (const auto& s_mat : st.s) {
        std::vector<double> beta(static_cast<size_t>(m) * m);
        for (int a = 0; a < m; ++a) {
            std::vector<double> row(s_mat.begin() + static_cast<size_t>(a) * m,
                                    s_mat.begin() + static_cast<size_t>(a + 1) * m);
            auto w = federation_weights(row, tau);
            std::copy(w.begin(), w.end(), beta.begin() + static_cast<size_t>(a) * m);
        }
        st.beta.push_back(std::move(beta));
    }
    return st;
}

ParamSnapshot snapshot_params(const ClientModel& model, long node_count) {
    ParamSnapshot s;
    s.factor_count = model.factorized.factor_count;
    s.in_dim = model.factorized.in_dim;
    s.out_dim = model.factorized.out_dim;
    s.class_count = model.class_count();
    s.node_count = node_count;
    for (int k = 0; k < s.factor_count; ++k) {
        s.w.push_back(model.factorized.w[k].value());
        s.b.push_back(model.factorized.b[k].value());
    }
    s.w_cls = model.w_cls.value();
    s.b_cls = model.b_cls.value();
    return s;
}

void load_snapshot(ClientModel& model, const ParamSnapshot& snap) {
    if (model.factorized.factor_count != snap.factor_count || model.factorized.out_dim != snap.out_dim ||
        model.factorized.in_dim != snap.in_dim || model.class_count() != snap.class_count)
        throw std::invalid_argument("load_snapshot: shape mismatch");
    for (int k = 0; k < snap.factor_count; ++k) {
        model.factorized.w[k].value() = snap.w[k];
        model.factorized.b[k].value() = snap.b[k];
    }
    model.w_cls.value() = snap.w_cls;
    model.b_cls.value() = snap.b_cls;
}

namespace {

void check_uniform_shapes(const std::vector<ParamSnapshot>& uploads) {
    if (uploads.empty()) throw std::invalid_argument("federation: no uploads");
    const auto& ref = uploads[0];
    for (const auto& u : uploads) {
        if (u.factor_count != ref.factor_count || u.in_dim != ref.in_dim || u.out_dim != ref.out_dim ||
            u.class_count != ref.class_count)
            throw std::invalid_argument("federation: parameter shapes differ across clients");
        for (int k = 0; k < ref.factor_count; ++k)
            if (u.w[k].size() != ref.w[k].size() || u.b[k].size() != ref.b[k].size())
                throw std::invalid_argument("federation: parameter shapes differ across clients");
        if (u.w_cls.size() != ref.w_cls.size() || u.b_cls.size() != ref.b_cls.size())
            throw std::invalid_argument("federation: parameter shapes differ across clients");
    }
}

}  // namespace

std::vector<ParamSnapshot> separate_federate(const std::vector<ParamSnapshot>& uploads, const SimilarityState& sim) {
    check_uniform_shapes(uploads);
    const int m = static_cast<int>(uploads.size());
    if (sim.client_count != m) throw std::invalid_argument("separate_federate: similarity state is for a different client count");
    const int k_count = uploads[0].factor_count;
    if (static_cast<int>(sim.beta.size()) != k_count)
        throw std::invalid_argument("separate_federate: factor count mismatch");
    const int c = uploads[0].class_count;
    const int d_out = uploads[0].out_dim;
    const int j = d_out / k_count;

    std::vector<ParamSnapshot> out(m);
    for (int a = 0; a < m; ++a) {
        ParamSnapshot fed = uploads[a];  // keeps shapes, b_cls, node_count
        for (int k = 0; k < k_count; ++k) {
            std::fill(fed.w[k].begin(), fed.w[k].end(), 0.0);
            std::fill(fed.b[k].begin(), fed.b[k].end(), 0.0);
        }
        std::fill(fed.w_cls.begin(), fed.w_cls.end(), 0.0);
        for (int k = 0; k < k_count; ++k) {
            const auto& beta = sim.beta[k];
            for (int b = 0; b < m; ++b) {
                double wgt = beta[static_cast<size_t>(a) * m + b];
                const auto& src = uploads[b];
                for (size_t t = 0; t < fed.w[k].size(); ++t) fed.w[k][t] += wgt * src.w[k][t];
                for (size_t t = 0; t < fed.b[k].size(); ++t) fed.b[k][t] += wgt * src.b[k][t];
                // classifier columns belonging to factor k
                for (int row = 0; row < c; ++row)
                    for (int col = k * j; col < (k + 1) * j; ++col)
                        fed.w_cls[static_cast<size_t>(row) * d_out + col] +=
                            wgt * src.w_cls[static_cast<size_t>(row) * d_out + col];
            }
        }
        out[a] = std::move(fed);
    }
    return out;
}

std::vector<double> fedavg_bias(const std::vector<ParamSnapshot>& uploads) {
    check_uniform_shapes(uploads);
    double total = 0;
    for (const auto& u : uploads) total += static_cast<double>(u.node_count);
    if (total <= 0) throw std::invalid_argument("fedavg_bias: non-positive total size");
    std::vector<double> out(uploads[0].b_cls.size(), 0.0);
    for (const auto& u : uploads) {
        double wgt = static_cast<double>(u.node_count) / total;
        for (size_t i = 0; i < out.size(); ++i) out[i] += wgt * u.b_cls[i];
    }
    return out;
}

ParamSnapshot fedavg_all(const std::vector<ParamSnapshot>& uploads) {
    check_uniform_shapes(uploads);
    double total = 0;
    for (const auto& u : uploads) total += static_cast<double>(u.node_count);
    if (total <= 0) throw std::invalid_argument("fedavg_all: non-positive total size");
    ParamSnapshot out = uploads[0];
    for (int k = 0; k < out.factor_count; ++k) {
        std::fill(out.w[k].begin(), out.w[k].end(), 0.0);
        std::fill(out.b[k].begin(), out.b[k].end(), 0.0);
    }
    std::fill(out.w_cls.begin(), out.w_cls.end(), 0.0);
    std::fill(out.b_cls.begin(), out.b_cls.end(), 0.0);
    for (const auto& u : uploads) {
        double wgt = static_cast<double>(u.node_count) / total;
        for (int k = 0; k < out.factor_count; ++k) {
            for (size_t t = 0; t < out.w[k].size(); ++t) out.w[k][t] += wgt * u.w[k][t];
            for (size_t t = 0; t < out.b[k].size(); ++t) out.b[k][t] += wgt * u.b[k][t];
        }
        for (size_t t = 0; t < out.w_cls.size(); ++t) out.w_cls[t] += wgt * u.w_cls[t];
        for (size_t t = 0; t < out.b_cls.size(); ++t) out.b_cls[t] += wgt * u.b_cls[t];
    }
    return out;
}

GlobalLatent update_global_alpha(const std::vector<PosteriorSummary>& summaries, const PriorConfig& prior,
                                 bool sampled, uint64_t seed) {
    if (summaries.empty()) throw std::invalid_argument("update_global_alpha: no summaries");
    const size_t k_count = summaries[0].mu_hat.size();
    const double m = static_cast<double>(summaries.size());
    const double denom = m + prior.sigma2_h / prior.sigma2_alpha;
    GlobalLatent out;
    Rng rng(seed);
    for (size_t k = 0; k < k_count; ++k) {
        const size_t j = summaries[0].mu_hat[k].size();
        std::vector<double> alpha(j, 0.0);
        for (const auto& s : summaries)
            for (size_t t = 0; t < j; ++t) alpha[t] += s.mu_hat[k][t];
        for (auto& v : alpha) v /= denom;
        if (sampled)
            for (auto& v : alpha) v += rng.normal();
        out.alpha_tilde.push_back(std::move(alpha));
    }
    return out;
}

}  // namespace fediih
