#include <doctest.h>

#include <cmath>
#include <random>

#include "fediih/server.hpp"
#include "oracles.hpp"

using namespace fediih;

namespace {

DiagGaussian random_gaussian(int dim, Rng& rng) {
    DiagGaussian g;
    for (int i = 0; i < dim; ++i) {
        g.mean.push_back(rng.normal());
        g.var.push_back(0.2 + std::fabs(rng.normal()));
    }
    return g;
}

PosteriorSummary random_summary(int k, int j, Rng& rng) {
    PosteriorSummary s;
    for (int f = 0; f < k; ++f) {
        std::vector<double> mu(j), var(j);
        for (int t = 0; t < j; ++t) {
            mu[t] = rng.normal();
            var[t] = 0.1 + std::fabs(rng.normal());
        }
        s.mu_hat.push_back(mu);
        s.var_hat.push_back(var);
    }
    s.node_count = 10;
    return s;
}

ParamSnapshot random_snapshot(int k, int d, int d_out, int c, long nodes, Rng& rng) {
    ParamSnapshot s;
    s.factor_count = k;
    s.in_dim = d;
    s.out_dim = d_out;
    s.class_count = c;
    s.node_count = nodes;
    const int j = d_out / k;
    for (int f = 0; f < k; ++f) {
        std::vector<double> w(static_cast<size_t>(d) * j), b(j);
        for (auto& v : w) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        s.w.push_back(w);
        s.b.push_back(b);
    }
    s.w_cls.resize(static_cast<size_t>(c) * d_out);
    for (auto& v : s.w_cls) v = rng.normal();
    s.b_cls.resize(c);
    for (auto& v : s.b_cls) v = rng.normal();
    return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double snapshot_distance(const ParamSnapshot& a, const ParamSnapshot& b) {
    double m = 0;
    for (int k = 0; k < a.factor_count; ++k) {
        m = std::max(m, max_abs_diff(a.w[k], b.w[k]));
        m = std::max(m, max_abs_diff(a.b[k], b.b[k]));
    }
    m = std::max(m, max_abs_diff(a.w_cls, b.w_cls));
    return m;
}

}  // namespace

TEST_CASE("KL and JS identities") {
    Rng rng(1);
    SUBCASE("KL of a distribution against itself is exactly zero") {
        for (int t = 0; t < 10; ++t) {
            DiagGaussian p = random_gaussian(3, rng);
            CHECK(kl_diag(p, p) == 0.0);
        }
    }
    SUBCASE("JS of identical inputs is exactly zero") {
        for (int t = 0; t < 10; ++t) {
            DiagGaussian p = random_gaussian(4, rng);
            CHECK(js_divergence(p, p) == 0.0);
        }
    }
    SUBCASE("JS is symmetric and bounded") {
        for (int t = 0; t < 30; ++t) {
            DiagGaussian p = random_gaussian(3, rng), q = random_gaussian(3, rng);
            double ab = js_divergence(p, q), ba = js_divergence(q, p);
            CHECK(std::fabs(ab - ba) <= 1e-12);
            CHECK(ab >= 0.0);
            CHECK(ab <= 1.0);
        }
    }
    SUBCASE("non-positive variance is rejected") {
        DiagGaussian p{{0.0}, {1.0}}, bad{{0.0}, {0.0}};
        CHECK_THROWS_AS(js_divergence(p, bad), std::invalid_argument);
    }
    SUBCASE("well-separated unit Gaussians stay close to the quadrature value") {
        DiagGaussian p{{0.0}, {1.0}}, q{{4.0}, {1.0}};
        double approx = js_divergence(p, q);
        double exact = oracle::js_quadrature(0.0, 1.0, 4.0, 1.0);
        CHECK(std::fabs(approx - exact) <= 0.05);
    }
    SUBCASE("twenty random 1-D pairs stay within 0.05 of quadrature") {
        Rng prng(7);
        for (int t = 0; t < 20; ++t) {
            double m1 = prng.uniform(-2, 2), m2 = prng.uniform(-2, 2);
            double v1 = prng.uniform(0.3, 3.0), v2 = prng.uniform(0.3, 3.0);
            double approx = js_divergence({{m1}, {v1}}, {{m2}, {v2}});
            double exact = oracle::js_quadrature(m1, v1, m2, v2);
            CHECK(std::fabs(approx - exact) <= 0.05);
        }
    }
    SUBCASE("seeded Monte-Carlo estimator agrees loosely") {
        DiagGaussian p{{0.0, 1.0}, {1.0, 0.5}}, q{{0.5, 0.8}, {0.7, 0.9}};
        double mm = js_divergence(p, q);
        double mc = js_divergence_mc(p, q, 200000, 99);
        CHECK(std::fabs(mm - mc) <= 0.05);
    }
}

TEST_CASE("similarity matrices") {
    Rng rng(3);
    SUBCASE("identical summaries give the all-ones matrix") {
        PosteriorSummary s = random_summary(2, 3, rng);
        auto mats = similarity_matrix({s, s, s});
        for (const auto& m : mats)
            for (double v : m) CHECK(v == doctest::Approx(1.0));
    }
    SUBCASE("symmetric with unit diagonal") {
        std::vector<PosteriorSummary> sums;
        for (int i = 0; i < 4; ++i) sums.push_back(random_summary(2, 3, rng));
        auto mats = similarity_matrix(sums);
        for (const auto& m : mats)
            for (int a = 0; a < 4; ++a) {
                CHECK(m[a * 4 + a] == 1.0);
                for (int b = 0; b < 4; ++b) CHECK(m[a * 4 + b] == m[b * 4 + a]);
            }
    }
    SUBCASE("three-client entries match an elementwise recomputation") {
        std::vector<PosteriorSummary> sums;
        for (int i = 0; i < 3; ++i) sums.push_back(random_summary(2, 4, rng));
        auto mats = similarity_matrix(sums);
        for (int k = 0; k < 2; ++k)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    double expected =
                        a == b ? 1.0
                               : 1.0 - js_divergence({sums[a].mu_hat[k], sums[a].var_hat[k]},
                                                     {sums[b].mu_hat[k], sums[b].var_hat[k]});
                    CHECK(std::fabs(mats[k][a * 3 + b] - expected) < 1e-12);
                }
    }
    SUBCASE("a malformed upload is an error") {
        PosteriorSummary good = random_summary(2, 3, rng);
        PosteriorSummary missing = random_summary(1, 3, rng);
        CHECK_THROWS_AS(similarity_matrix({good, missing}), std::invalid_argument);
    }
}

TEST_CASE("federation weights") {
    SUBCASE("equal similarities give the uniform distribution") {
        auto w = federation_weights({0.8, 0.8, 0.8, 0.8}, 10.0);
        for (double v : w) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("rows are stochastic and positive") {
        Rng rng(5);
        for (int t = 0; t < 25; ++t) {
            std::vector<double> row(6);
            for (auto& v : row) v = rng.uniform();
            auto w = federation_weights(row, 10.0);
            double s = 0;
            for (double v : w) {
                CHECK(v > 0);
                s += v;
            }
            CHECK(std::fabs(s - 1.0) < 1e-9);
        }
    }
    SUBCASE("matches a long-double softmax at tau 10") {
        std::vector<double> row{1.0, 0.5, 0.0};
        auto w = federation_weights(row, 10.0);
        long double z = 0;
        std::vector<long double> e;
        for (double s : row) {
            e.push_back(expl(10.0L * static_cast<long double>(s)));
            z += e.back();
        }
        for (int i = 0; i < 3; ++i) CHECK(std::fabs(w[i] - static_cast<double>(e[i] / z)) < 1e-14);
    }
}

TEST_CASE("separate federation") {
    Rng rng(7);
    const int k = 2, d = 3, d_out = 4, c = 3;

    SUBCASE("identical parameters are a fixed point") {
        ParamSnapshot s = random_snapshot(k, d, d_out, c, 10, rng);
        std::vector<ParamSnapshot> ups{s, s, s};
        SimilarityState sim = build_similarity_state(
            {random_summary(k, 2, rng), random_summary(k, 2, rng), random_summary(k, 2, rng)}, 10.0);
        auto fed = separate_federate(ups, sim);
        for (const auto& f : fed) CHECK(snapshot_distance(f, s) <= 1e-12);
    }
    SUBCASE("an indicator row keeps the client's own parameters") {
        std::vector<ParamSnapshot> ups;
        for (int i = 0; i < 3; ++i) ups.push_back(random_snapshot(k, d, d_out, c, 10, rng));
        SimilarityState sim;
        sim.client_count = 3;
        std::vector<double> self(9, 0.0);
        for (int i = 0; i < 3; ++i) self[i * 3 + i] = 1.0;
        sim.s = {self, self};
        sim.beta = {self, self};
        auto fed = separate_federate(ups, sim);
        for (int i = 0; i < 3; ++i) CHECK(snapshot_distance(fed[i], ups[i]) == 0.0);
    }
    SUBCASE("two clients with fixed weights combine elementwise") {
        ParamSnapshot a = random_snapshot(k, d, d_out, c, 10, rng);
        ParamSnapshot b = random_snapshot(k, d, d_out, c, 10, rng);
        SimilarityState sim;
        sim.client_count = 2;
        std::vector<double> beta{0.25, 0.75, 0.25, 0.75};
        sim.s = {beta, beta};
        sim.beta = {beta, beta};
        auto fed = separate_federate({a, b}, sim);
        for (int f = 0; f < k; ++f)
            for (size_t t = 0; t < a.w[f].size(); ++t)
                CHECK(fed[0].w[f][t] == doctest::Approx(0.25 * a.w[f][t] + 0.75 * b.w[f][t]).epsilon(1e-12));
        for (size_t t = 0; t < a.w_cls.size(); ++t)
            CHECK(fed[0].w_cls[t] == doctest::Approx(0.25 * a.w_cls[t] + 0.75 * b.w_cls[t]).epsilon(1e-12));
    }
    SUBCASE("shape mismatches are rejected") {
        ParamSnapshot a = random_snapshot(k, d, d_out, c, 10, rng);
        ParamSnapshot b = random_snapshot(k, d, d_out + k, c, 10, rng);
        SimilarityState sim;
        sim.client_count = 2;
        CHECK_THROWS_AS(separate_federate({a, b}, sim), std::invalid_argument);
    }
    SUBCASE("federation contracts the parameter spread") {
        std::vector<ParamSnapshot> ups;
        std::vector<PosteriorSummary> sums;
        Rng srng(11);
        for (int i = 0; i < 4; ++i) {
            ups.push_back(random_snapshot(k, d, d_out, c, 10, rng));
            sums.push_back(random_summary(k, 2, srng));
        }
        SimilarityState sim = build_similarity_state(sums, 10.0);
        auto fed = separate_federate(ups, sim);
        double before = 0, after = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                before = std::max(before, snapshot_distance(ups[a], ups[b]));
                after = std::max(after, snapshot_distance(fed[a], fed[b]));
            }
        CHECK(after <= before + 1e-12);
    }
    SUBCASE("tiny tau recovers the unweighted mean") {
        std::vector<ParamSnapshot> ups;
        std::vector<PosteriorSummary> sums;
        Rng srng(13);
        for (int i = 0; i < 3; ++i) {
            ups.push_back(random_snapshot(k, d, d_out, c, 10, rng));
            sums.push_back(random_summary(k, 2, srng));
        }
        SimilarityState sim = build_similarity_state(sums, 1e-9);
        auto fed = separate_federate(ups, sim);
        for (int f = 0; f < k; ++f)
            for (size_t t = 0; t < ups[0].w[f].size(); ++t) {
                double mean = (ups[0].w[f][t] + ups[1].w[f][t] + ups[2].w[f][t]) / 3.0;
                CHECK(std::fabs(fed[0].w[f][t] - mean) < 1e-6);
            }
    }
}

TEST_CASE("bias federation") {
    Rng rng(17);
    SUBCASE("identical biases stay put") {
        ParamSnapshot s = random_snapshot(2, 3, 4, 3, 10, rng);
        auto out = fedavg_bias({s, s});
        CHECK(max_abs_diff(out, s.b_cls) == 0.0);
    }
    SUBCASE("size weighting follows the node counts") {
        ParamSnapshot a = random_snapshot(1, 2, 2, 1, 1, rng);
        ParamSnapshot b = a;
        a.b_cls = {0.0};
        b.b_cls = {4.0};
        b.node_count = 3;
        auto out = fedavg_bias({a, b});
        CHECK(out[0] == doctest::Approx(3.0));
    }
    SUBCASE("random case matches the scalar weighted mean") {
        std::vector<ParamSnapshot> ups;
        for (int i = 0; i < 3; ++i) ups.push_back(random_snapshot(2, 3, 4, 3, 5 + i, rng));
        auto out = fedavg_bias(ups);
        double total = 5 + 6 + 7;
        for (int j = 0; j < 3; ++j) {
            double ref = (5 * ups[0].b_cls[j] + 6 * ups[1].b_cls[j] + 7 * ups[2].b_cls[j]) / total;
            CHECK(std::fabs(out[j] - ref) < 1e-12);
        }
    }
}

TEST_CASE("global latent updates") {
    PriorConfig prior;  // variance ratio 0.25
    SUBCASE("three clients with a forced sum match the closed form") {
        PosteriorSummary a, b, c;
        a.mu_hat = {{1.0, 2.0}};
        b.mu_hat = {{1.25, 2.5}};
        c.mu_hat = {{1.0, 2.0}};
        for (auto* s : {&a, &b, &c}) {
            s->var_hat = {{1.0, 1.0}};
            s->node_count = 5;
        }
        GlobalLatent g = update_global_alpha({a, b, c}, prior, false, 0);
        CHECK(g.alpha_tilde[0][0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.alpha_tilde[0][1] == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("zero summaries give zero") {
        PosteriorSummary s;
        s.mu_hat = {{0.0, 0.0, 0.0}};
        s.var_hat = {{1.0, 1.0, 1.0}};
        s.node_count = 3;
        GlobalLatent g = update_global_alpha({s, s}, prior, false, 0);
        for (double v : g.alpha_tilde[0]) CHECK(v == 0.0);
    }
    SUBCASE("closed form maximizes the variational objective") {
        Rng rng(21);
        for (int trial = 0; trial < 10; ++trial) {
            const int m = 2 + trial % 4, j = 1 + trial % 3;
            std::vector<PosteriorSummary> sums;
            for (int i = 0; i < m; ++i) sums.push_back(random_summary(1, j, rng));
            GlobalLatent g = update_global_alpha(sums, prior, false, 0);

            auto objective = [&](const std::vector<double>& alpha) {
                double acc = 0;
                for (const auto& s : sums)
                    for (int t = 0; t < j; ++t) {
                        double dm = s.mu_hat[0][t] - alpha[t];
                        acc -= dm * dm / prior.sigma2_h;
                    }
                for (int t = 0; t < j; ++t) acc -= alpha[t] * alpha[t] / prior.sigma2_alpha;
                return acc;
            };
            auto best = oracle::golden_section_max(objective, j, -10.0, 10.0);
            for (int t = 0; t < j; ++t) CHECK(std::fabs(g.alpha_tilde[0][t] - best[t]) < 1e-6);
        }
    }
    SUBCASE("client order does not matter in deterministic mode") {
        Rng rng(23);
        std::vector<PosteriorSummary> sums;
        for (int i = 0; i < 4; ++i) sums.push_back(random_summary(2, 3, rng));
        GlobalLatent a = update_global_alpha(sums, prior, false, 0);
        std::reverse(sums.begin(), sums.end());
        GlobalLatent b = update_global_alpha(sums, prior, false, 0);
        for (int k = 0; k < 2; ++k)
            for (int t = 0; t < 3; ++t)
                CHECK(a.alpha_tilde[k][t] == doctest::Approx(b.alpha_tilde[k][t]).epsilon(1e-12));
    }
    SUBCASE("sampled mode is seeded and centered on the closed form") {
        Rng rng(25);
        std::vector<PosteriorSummary> sums{random_summary(1, 2, rng), random_summary(1, 2, rng)};
        GlobalLatent det = update_global_alpha(sums, prior, false, 0);
        GlobalLatent s1 = update_global_alpha(sums, prior, true, 42);
        GlobalLatent s2 = update_global_alpha(sums, prior, true, 42);
        CHECK(s1.alpha_tilde == s2.alpha_tilde);
        bool differs = false;
        for (int t = 0; t < 2; ++t) differs = differs || s1.alpha_tilde[0][t] != det.alpha_tilde[0][t];
        CHECK(differs);
    }
}
