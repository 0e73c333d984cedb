#include "fediih/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fediih/checkpoint.hpp"
#include "fediih/rng.hpp"

namespace fediih {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config ----------------------------------------------------------------

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("dataset")) {
        cfg.node_file = j["dataset"].at("nodes").get<std::string>();
        cfg.edge_file = j["dataset"].at("edges").get<std::string>();
    }
    if (j.contains("synthetic")) {
        cfg.use_synthetic = true;
        const auto& s = j["synthetic"];
        cfg.synthetic.n = s.at("n").get<int>();
        cfg.synthetic.d = s.at("d").get<int>();
        cfg.synthetic.c = s.at("c").get<int>();
        cfg.synthetic.k_true = s.at("k_true").get<int>();
        cfg.synthetic.noise_scale = s.value("noise_scale", 0.1);
        cfg.synthetic.seed = s.value("seed", 0);
        for (const auto& mat : s.at("block_probs")) {
            std::vector<double> flat;
            for (const auto& row : mat)
                for (const auto& p : row) flat.push_back(p.get<double>());
            cfg.synthetic.block_probs.push_back(std::move(flat));
        }
    }
    cfg.partition_mode = j.value("partition_mode", cfg.partition_mode);
    cfg.partition_file = j.value("partition_file", cfg.partition_file);
    cfg.clients = j.value("clients", cfg.clients);
    cfg.latent_factors = j.value("latent_factors", cfg.latent_factors);
    cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
    cfg.routing.iterations = j.value("routing_iterations", cfg.routing.iterations);
    cfg.routing.layers = j.value("routing_layers", cfg.routing.layers);
    cfg.routing.tau_p = j.value("tau_p", cfg.routing.tau_p);
    cfg.classifier_input = j.value("classifier_input", cfg.classifier_input);
    cfg.activation = j.value("activation", cfg.activation);
    cfg.add_self_loops = j.value("add_self_loops", cfg.add_self_loops);
    cfg.rounds = j.value("rounds", cfg.rounds);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.lambda_elbo = j.value("lambda_elbo", cfg.lambda_elbo);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.prior.sigma2_alpha = j.value("sigma2_alpha", cfg.prior.sigma2_alpha);
    cfg.prior.sigma2_h = j.value("sigma2_h", cfg.prior.sigma2_h);
    cfg.sample_alpha = j.value("sample_alpha", cfg.sample_alpha);
    cfg.method = j.value("method", cfg.method);
    if (j.contains("ablation")) {
        cfg.ablation.no_hm = j["ablation"].value("no_hm", false);
        cfg.ablation.no_vi = j["ablation"].value("no_vi", false);
        cfg.ablation.no_dis = j["ablation"].value("no_dis", false);
    }
    if (j.contains("seeds")) {
        cfg.seeds.clear();
        for (const auto& s : j["seeds"]) cfg.seeds.push_back(s.get<uint64_t>());
    }
    cfg.participation = j.value("participation", cfg.participation);
    cfg.train_ratio = j.value("train_ratio", cfg.train_ratio);
    cfg.val_ratio = j.value("val_ratio", cfg.val_ratio);
    cfg.test_ratio = j.value("test_ratio", cfg.test_ratio);
    cfg.metric = j.value("metric", cfg.metric);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    validate_config(cfg);
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    if (!cfg.node_file.empty()) j["dataset"] = {{"nodes", cfg.node_file}, {"edges", cfg.edge_file}};
    if (cfg.use_synthetic) {
        json bp = json::array();
        for (const auto& mat : cfg.synthetic.block_probs) {
            json rows = json::array();
            for (int r = 0; r < cfg.synthetic.c; ++r) {
                json row = json::array();
                for (int c = 0; c < cfg.synthetic.c; ++c) row.push_back(mat[static_cast<size_t>(r) * cfg.synthetic.c + c]);
                rows.push_back(row);
            }
            bp.push_back(rows);
        }
        j["synthetic"] = {{"n", cfg.synthetic.n},     {"d", cfg.synthetic.d},
                          {"c", cfg.synthetic.c},     {"k_true", cfg.synthetic.k_true},
                          {"block_probs", bp},        {"noise_scale", cfg.synthetic.noise_scale},
                          {"seed", cfg.synthetic.seed}};
    }
    j["partition_mode"] = cfg.partition_mode;
    if (!cfg.partition_file.empty()) j["partition_file"] = cfg.partition_file;
    j["clients"] = cfg.clients;
    j["latent_factors"] = cfg.latent_factors;
    j["hidden_dim"] = cfg.hidden_dim;
    j["routing_iterations"] = cfg.routing.iterations;
    j["routing_layers"] = cfg.routing.layers;
    j["tau_p"] = cfg.routing.tau_p;
    j["classifier_input"] = cfg.classifier_input;
    j["activation"] = cfg.activation;
    j["add_self_loops"] = cfg.add_self_loops;
    j["rounds"] = cfg.rounds;
    j["epochs"] = cfg.epochs;
    j["lr"] = cfg.lr;
    j["weight_decay"] = cfg.weight_decay;
    j["dropout"] = cfg.dropout;
    j["lambda_elbo"] = cfg.lambda_elbo;
    j["tau"] = cfg.tau;
    j["sigma2_alpha"] = cfg.prior.sigma2_alpha;
    j["sigma2_h"] = cfg.prior.sigma2_h;
    j["sample_alpha"] = cfg.sample_alpha;
    j["method"] = cfg.method;
    j["ablation"] = {{"no_hm", cfg.ablation.no_hm}, {"no_vi", cfg.ablation.no_vi}, {"no_dis", cfg.ablation.no_dis}};
    j["seeds"] = cfg.seeds;
    j["participation"] = cfg.participation;
    j["train_ratio"] = cfg.train_ratio;
    j["val_ratio"] = cfg.val_ratio;
    j["test_ratio"] = cfg.test_ratio;
    j["metric"] = cfg.metric;
    j["threads"] = cfg.threads;
    if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir;
    return j;
}

void validate_config(const ExperimentConfig& cfg) {
    if (!cfg.use_synthetic && cfg.node_file.empty())
        throw std::runtime_error("config: need either 'dataset' files or a 'synthetic' spec");
    if (cfg.clients < 1) throw std::runtime_error("config: clients must be positive");
    if (cfg.rounds < 0 || cfg.epochs < 0) throw std::runtime_error("config: rounds/epochs must be non-negative");
    if (cfg.latent_factors < 1) throw std::runtime_error("config: latent_factors must be >= 1");
    if (cfg.hidden_dim % cfg.effective_factors() != 0)
        throw std::runtime_error("config: hidden_dim must be divisible by the factor count");
    if (cfg.method != "fediih" && cfg.method != "fedavg" && cfg.method != "local")
        throw std::runtime_error("config: unknown method '" + cfg.method + "'");
    if (cfg.partition_mode != "non-overlapping" && cfg.partition_mode != "overlapping" && cfg.partition_mode != "file")
        throw std::runtime_error("config: unknown partition_mode '" + cfg.partition_mode + "'");
    if (cfg.partition_mode == "file" && cfg.partition_file.empty())
        throw std::runtime_error("config: partition_mode 'file' needs partition_file");
    if (cfg.metric != "accuracy" && cfg.metric != "auc")
        throw std::runtime_error("config: unknown metric '" + cfg.metric + "'");
    if (cfg.classifier_input != "projected" && cfg.classifier_input != "routed")
        throw std::runtime_error("config: classifier_input must be 'projected' or 'routed'");
    if (cfg.participation <= 0 || cfg.participation > 1)
        throw std::runtime_error("config: participation must be in (0,1]");
    if (cfg.seeds.empty()) throw std::runtime_error("config: need at least one seed");
    validate_routing_config(cfg.routing);
}

// ---- dataset and shards -------------------------------------------------------

GraphData build_dataset(const ExperimentConfig& cfg) {
    if (cfg.use_synthetic) return generate_synthetic(cfg.synthetic);
    return load_graph(cfg.node_file, cfg.edge_file);
}

namespace {

GraphData with_self_loops(const GraphData& g) {
    std::vector<std::pair<int, int>> edges;
    for (const auto& [u, v] : g.edges)
        if (u <= v) edges.emplace_back(u, v);
    for (int i = 0; i < g.n; ++i) edges.emplace_back(i, i);
    return make_graph(g.n, g.d, g.c, g.features, std::move(edges), g.labels, g.node_ids);
}

Activation parse_activation(const std::string& name) {
    if (name == "leaky_relu") return Activation::LeakyRelu;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw std::runtime_error("config: unknown activation '" + name + "'");
}

ClientHyper hyper_from_config(const ExperimentConfig& cfg) {
    ClientHyper h;
    h.lr = cfg.lr;
    h.weight_decay = cfg.weight_decay;
    h.dropout = cfg.dropout;
    h.lambda_elbo = cfg.lambda_elbo;
    h.activation = parse_activation(cfg.activation);
    h.routing = cfg.routing;
    h.classify_on_routed = cfg.classifier_input == "routed";
    h.ablation = cfg.ablation;
    return h;
}

}  // namespace

std::vector<ShardContext> build_shards(const ExperimentConfig& cfg, const GraphData& graph, const SplitMasks& masks,
                                       uint64_t seed) {
    Partition part;
    if (cfg.partition_mode == "file") {
        part = load_partition(cfg.partition_file, graph);
        if (part.client_count != cfg.clients)
            throw std::runtime_error("partition file has " + std::to_string(part.client_count) + " parts for " +
                                     std::to_string(cfg.clients) + " clients");
    } else if (cfg.partition_mode == "overlapping") {
        part = partition_overlapping(graph, cfg.clients, mix_seed(seed, 11));
    } else {
        part = partition_nonoverlapping(graph, cfg.clients, mix_seed(seed, 11));
    }
    std::vector<ShardContext> shards;
    for (const auto& ids : part.assignments) {
        Subgraph sub = induced_subgraph(graph, ids);
        ShardContext ctx;
        ctx.masks = slice_masks(masks, sub.origin_index);
        ctx.graph = cfg.add_self_loops ? with_self_loops(sub.graph) : std::move(sub.graph);
        shards.push_back(std::move(ctx));
    }
    return shards;
}

// ---- simulation -----------------------------------------------------------------

namespace {

double eval_metric(const ExperimentConfig& cfg, const Tensor& logits, const GraphData& g,
                   const std::vector<uint8_t>& mask) {
    if (cfg.metric == "auc") {
        if (g.c != 2) throw std::runtime_error("auc metric needs exactly two classes");
        std::vector<double> scores(g.n);
        for (int i = 0; i < g.n; ++i) {
            double a = logits.at(i, 0), b = logits.at(i, 1);
            double mx = std::max(a, b);
            scores[i] = std::exp(b - mx) / (std::exp(a - mx) + std::exp(b - mx));
        }
        return auc(scores, g.labels, mask);
    }
    return accuracy(logits.value(), g.n, g.c, g.labels, mask);
}

std::vector<CheckpointEntry> model_entries(ClientModel& model, const std::string& prefix) {
    std::vector<CheckpointEntry> out;
    for (auto& [name, t] : model.named_params(prefix))
        out.push_back({name, t.rows(), t.cols(), t.value()});
    return out;
}

struct ClientSlot {
    ClientModel model;
    OptimizerState opt;
    LossBreakdown last_loss;
    double val_metric = 0, test_metric = 0;
    ParamSnapshot upload;
    PosteriorSummary summary;
    bool participated = false;
};

void run_clients_parallel(int count, int threads, const std::function<void(int)>& work) {
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < count; i += threads) work(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    auto t0 = std::chrono::steady_clock::now();

    MetricsReport report;
    report.config = cfg;

    GraphData graph = build_dataset(cfg);
    const int k_eff = cfg.effective_factors();
    ClientHyper hyper = hyper_from_config(cfg);
    const int m = cfg.clients;

    int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::min<unsigned>(
                      m, std::max(1u, std::thread::hardware_concurrency())));

    for (size_t si = 0; si < cfg.seeds.size(); ++si) {
        const uint64_t seed = cfg.seeds[si];
        SeedRunResult run;
        run.seed = seed;

        SplitMasks masks = make_splits(graph, cfg.train_ratio, cfg.val_ratio, cfg.test_ratio, mix_seed(seed, 1));
        std::vector<ShardContext> shards = build_shards(cfg, graph, masks, seed);

        std::vector<GraphData> shard_graphs;
        for (auto& s : shards) {
            shard_graphs.push_back(s.graph);
            run.shard_sizes.push_back(s.graph.n);
            run.shard_labels.push_back(s.graph.labels);
        }
        run.ground_truth = ground_truth_similarity(shard_graphs);

        // identical shared initialization on every client
        std::vector<ClientSlot> slots(m);
        for (int i = 0; i < m; ++i) {
            Rng init_rng(mix_seed(seed, 2));
            slots[i].model = make_client_model(graph.d, cfg.hidden_dim, k_eff, graph.c, init_rng);
        }

        GlobalLatent alpha;
        alpha.alpha_tilde.assign(k_eff, std::vector<double>(cfg.hidden_dim / k_eff, 0.0));
        run.final_alpha = alpha;

        bool have_uploads = false;
        std::vector<int> last_participants;

        for (int round = 1; round <= cfg.rounds; ++round) {
            // aggregate previous round's uploads
            if (round > 1 && have_uploads && cfg.method != "local") {
                std::vector<ParamSnapshot> uploads;
                std::vector<PosteriorSummary> summaries;
                for (int i : last_participants) {
                    uploads.push_back(slots[i].upload);
                    summaries.push_back(slots[i].summary);
                }
                if (cfg.method == "fediih") {
                    SimilarityState sim = build_similarity_state(summaries, cfg.tau);
                    auto fed = separate_federate(uploads, sim);
                    auto bias = fedavg_bias(uploads);
                    for (size_t t = 0; t < last_participants.size(); ++t) {
                        fed[t].b_cls = bias;
                        load_snapshot(slots[last_participants[t]].model, fed[t]);
                    }
                    run.final_similarity = sim;
                } else {  // fedavg
                    ParamSnapshot shared = fedavg_all(uploads);
                    for (int i : last_participants) load_snapshot(slots[i].model, shared);
                }
                if (!cfg.ablation.no_hm)
                    alpha = update_global_alpha(summaries, cfg.prior, cfg.sample_alpha,
                                                mix_seed(seed, 3, static_cast<uint64_t>(round)));
                run.final_alpha = alpha;
                report.aggregation_calls++;
            }

            // pick participants
            std::vector<int> participants;
            if (cfg.participation >= 1.0) {
                participants.resize(m);
                std::iota(participants.begin(), participants.end(), 0);
            } else {
                int take = std::max(1, static_cast<int>(std::lround(cfg.participation * m)));
                std::vector<int> all(m);
                std::iota(all.begin(), all.end(), 0);
                Rng prng(mix_seed(seed, 4, static_cast<uint64_t>(round)));
                prng.shuffle(all);
                participants.assign(all.begin(), all.begin() + take);
                std::sort(participants.begin(), participants.end());
            }
            for (auto& s : slots) s.participated = false;
            for (int i : participants) slots[i].participated = true;

            // local training + evaluation + uploads, one isolated context each
            run_clients_parallel(m, threads, [&](int i) {
                ClientSlot& slot = slots[i];
                const ShardContext& shard = shards[i];
                if (slot.participated) {
                    Rng rng(mix_seed(seed, static_cast<uint64_t>(i + 10), static_cast<uint64_t>(round)));
                    for (int e = 0; e < cfg.epochs; ++e)
                        slot.last_loss = client_train_epoch(slot.model, shard.graph, shard.masks, alpha.alpha_tilde,
                                                            cfg.prior, hyper, slot.opt, rng);
                    slot.upload = snapshot_params(slot.model, shard.graph.n);
                    slot.summary = client_posterior(slot.model, shard.graph, hyper);
                }
                Tensor logits = client_eval_logits(slot.model, shard.graph, hyper);
                slot.val_metric = eval_metric(cfg, logits, shard.graph, shard.masks.val);
                slot.test_metric = eval_metric(cfg, logits, shard.graph, shard.masks.test);
            });
            if (!participants.empty()) {
                have_uploads = true;
                last_participants = participants;
            }

            for (int i = 0; i < m; ++i) {
                RoundClientRecord rec;
                rec.seed_index = static_cast<int>(si);
                rec.round = round;
                rec.client = i;
                rec.participated = slots[i].participated;
                rec.loss = slots[i].last_loss;
                rec.val_metric = slots[i].val_metric;
                rec.test_metric = slots[i].test_metric;
                run.records.push_back(rec);
            }

            double mean_val = 0, mean_test = 0;
            for (int i = 0; i < m; ++i) {
                mean_val += slots[i].val_metric;
                mean_test += slots[i].test_metric;
            }
            mean_val /= m;
            mean_test /= m;
            if (run.best_round < 0 || mean_val > run.val_at_best) {
                run.best_round = round;
                run.val_at_best = mean_val;
                run.test_at_best = mean_test;
            }
        }

        for (int i = 0; i < m; ++i)
            run.final_models.push_back(model_entries(slots[i].model, "client" + std::to_string(i) + "/"));
        report.per_seed.push_back(std::move(run));
    }

    double sum = 0;
    for (const auto& r : report.per_seed) sum += r.test_at_best;
    report.mean_test = sum / static_cast<double>(report.per_seed.size());
    double ss = 0;
    for (const auto& r : report.per_seed) ss += (r.test_at_best - report.mean_test) * (r.test_at_best - report.mean_test);
    report.std_test = report.per_seed.size() > 1 ? std::sqrt(ss / (report.per_seed.size() - 1)) : 0.0;

    report.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// ---- artifact export --------------------------------------------------------------

namespace {

std::string fmt12(double v) {
    char buf[40];
    snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void write_csv_matrix(const std::string& path, const std::vector<double>& m, int rows, int cols) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_csv_matrix: cannot open " + path);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c) f << ',';
            f << fmt12(m[static_cast<size_t>(r) * cols + c]);
        }
        f << '\n';
    }
}

std::vector<double> read_csv_matrix(const std::string& path, int& rows, int& cols) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_csv_matrix: cannot open " + path);
    std::vector<double> out;
    std::string line;
    rows = 0;
    cols = -1;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        int this_cols = 0;
        while (std::getline(ss, tok, ',')) {
            out.push_back(std::stod(tok));
            ++this_cols;
        }
        if (cols < 0)
            cols = this_cols;
        else if (cols != this_cols)
            throw std::runtime_error("read_csv_matrix: ragged rows in " + path);
        ++rows;
    }
    return out;
}

void export_artifacts(const MetricsReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const ExperimentConfig& cfg = report.config;
    const int m = cfg.clients;

    {
        std::ofstream f(out_dir + "/metrics.jsonl");
        if (!f) throw std::runtime_error("export_artifacts: cannot open metrics.jsonl in " + out_dir);
        json header = {{"type", "header"},
                       {"config", config_to_json(cfg)},
                       {"fields", {"seed_index", "round", "client", "participated", "cross_entropy", "reconstruction",
                                   "kl_latent", "alpha_log_prior", "alpha_kl", "total", "val_metric", "test_metric"}}};
        f << header.dump() << '\n';
        for (const auto& run : report.per_seed)
            for (const auto& rec : run.records) {
                json r = {{"type", "round"},
                          {"seed_index", rec.seed_index},
                          {"round", rec.round},
                          {"client", rec.client},
                          {"participated", rec.participated},
                          {"cross_entropy", rec.loss.cross_entropy},
                          {"reconstruction", rec.loss.reconstruction},
                          {"kl_latent", rec.loss.kl_latent},
                          {"alpha_log_prior", rec.loss.alpha_log_prior},
                          {"alpha_kl", rec.loss.alpha_kl},
                          {"total", rec.loss.total},
                          {"val_metric", rec.val_metric},
                          {"test_metric", rec.test_metric}};
                f << r.dump() << '\n';
            }
    }

    {
        std::ofstream f(out_dir + "/summary.csv");
        f << "seed_index,seed,best_round,val_at_best,test_at_best\n";
        for (size_t si = 0; si < report.per_seed.size(); ++si) {
            const auto& run = report.per_seed[si];
            f << si << ',' << run.seed << ',' << run.best_round << ',' << fmt12(run.val_at_best) << ','
              << fmt12(run.test_at_best) << '\n';
        }
        f << "mean,,," << ',' << fmt12(report.mean_test) << '\n';
        f << "std,,," << ',' << fmt12(report.std_test) << '\n';
    }

    {
        json state;
        state["clients"] = m;
        state["seeds"] = json::array();
        for (const auto& run : report.per_seed) {
            json s;
            s["seed"] = run.seed;
            s["similarity"] = run.final_similarity.s;
            s["beta"] = run.final_similarity.beta;
            s["alpha_tilde"] = run.final_alpha.alpha_tilde;
            s["ground_truth"] = run.ground_truth;
            state["seeds"].push_back(s);
        }
        std::ofstream f(out_dir + "/similarity_state.json");
        f << state.dump(2) << '\n';
    }

    for (size_t si = 0; si < report.per_seed.size(); ++si) {
        const auto& run = report.per_seed[si];
        for (size_t k = 0; k < run.final_similarity.s.size(); ++k)
            write_csv_matrix(out_dir + "/similarity_seed" + std::to_string(si) + "_factor" + std::to_string(k) + ".csv",
                             run.final_similarity.s[k], m, m);
        write_csv_matrix(out_dir + "/ground_truth_seed" + std::to_string(si) + ".csv", run.ground_truth, m, m);

        std::vector<CheckpointEntry> entries;
        for (const auto& client_entries : run.final_models)
            entries.insert(entries.end(), client_entries.begin(), client_entries.end());
        for (size_t k = 0; k < run.final_alpha.alpha_tilde.size(); ++k)
            entries.push_back({"server/alpha_tilde" + std::to_string(k), 1,
                               static_cast<int>(run.final_alpha.alpha_tilde[k].size()),
                               run.final_alpha.alpha_tilde[k]});
        save_checkpoint(out_dir + "/checkpoint_seed" + std::to_string(si) + ".bin",
                        out_dir + "/checkpoint_seed" + std::to_string(si) + ".json", entries);
    }

    {
        json rep;
        rep["mean_test"] = report.mean_test;
        rep["std_test"] = report.std_test;
        rep["wall_clock_sec"] = report.wall_clock_sec;
        rep["aggregation_calls"] = report.aggregation_calls;
        rep["per_seed"] = json::array();
        for (const auto& run : report.per_seed)
            rep["per_seed"].push_back({{"seed", run.seed},
                                       {"best_round", run.best_round},
                                       {"val_at_best", run.val_at_best},
                                       {"test_at_best", run.test_at_best},
                                       {"shard_sizes", run.shard_sizes}});
        rep["config"] = config_to_json(cfg);
        std::ofstream f(out_dir + "/report.json");
        f << rep.dump(2) << '\n';
    }
}

void export_heatmaps(const std::string& run_dir, const std::string& out_dir) {
    std::ifstream f(run_dir + "/similarity_state.json");
    if (!f) throw std::runtime_error("export_heatmaps: no similarity_state.json in " + run_dir);
    json state = json::parse(f);
    fs::create_directories(out_dir);
    const int m = state.at("clients").get<int>();
    int si = 0;
    for (const auto& s : state.at("seeds")) {
        auto sims = s.at("similarity").get<std::vector<std::vector<double>>>();
        for (size_t k = 0; k < sims.size(); ++k)
            write_csv_matrix(out_dir + "/similarity_seed" + std::to_string(si) + "_factor" + std::to_string(k) + ".csv",
                             sims[k], m, m);
        auto gt = s.at("ground_truth").get<std::vector<double>>();
        write_csv_matrix(out_dir + "/ground_truth_seed" + std::to_string(si) + ".csv", gt, m, m);
        ++si;
    }
}

nlohmann::json evaluate_checkpoint(const std::string& run_dir, int seed_index) {
    std::ifstream mf(run_dir + "/metrics.jsonl");
    if (!mf) throw std::runtime_error("evaluate_checkpoint: no metrics.jsonl in " + run_dir);
    std::string header_line;
    std::getline(mf, header_line);
    json header = json::parse(header_line);
    ExperimentConfig cfg = config_from_json(header.at("config"));
    if (seed_index < 0 || seed_index >= static_cast<int>(cfg.seeds.size()))
        throw std::runtime_error("evaluate_checkpoint: seed index out of range");
    const uint64_t seed = cfg.seeds[seed_index];

    GraphData graph = build_dataset(cfg);
    SplitMasks masks = make_splits(graph, cfg.train_ratio, cfg.val_ratio, cfg.test_ratio, mix_seed(seed, 1));
    std::vector<ShardContext> shards = build_shards(cfg, graph, masks, seed);
    ClientHyper hyper = hyper_from_config(cfg);

    auto entries = load_checkpoint(run_dir + "/checkpoint_seed" + std::to_string(seed_index) + ".bin",
                                   run_dir + "/checkpoint_seed" + std::to_string(seed_index) + ".json");

    json out;
    out["clients"] = json::array();
    double mean_val = 0, mean_test = 0;
    for (int i = 0; i < cfg.clients; ++i) {
        Rng rng(mix_seed(seed, 2));
        ClientModel model = make_client_model(graph.d, cfg.hidden_dim, cfg.effective_factors(), graph.c, rng);
        for (auto& [name, t] : model.named_params("client" + std::to_string(i) + "/")) {
            auto it = entries.find(name);
            if (it == entries.end()) throw std::runtime_error("evaluate_checkpoint: missing entry " + name);
            if (it->second.rows != t.rows() || it->second.cols != t.cols())
                throw std::runtime_error("evaluate_checkpoint: shape mismatch for " + name);
            t.value() = it->second.data;
        }
        Tensor logits = client_eval_logits(model, shards[i].graph, hyper);
        double v = eval_metric(cfg, logits, shards[i].graph, shards[i].masks.val);
        double t = eval_metric(cfg, logits, shards[i].graph, shards[i].masks.test);
        mean_val += v;
        mean_test += t;
        out["clients"].push_back({{"client", i}, {"val_metric", v}, {"test_metric", t}});
    }
    out["mean_val"] = mean_val / cfg.clients;
    out["mean_test"] = mean_test / cfg.clients;
    out["seed_index"] = seed_index;
    return out;
}

}  // namespace fediih
