#include "gea/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "gea/errors.hpp"
#include "gea/kernels.hpp"
#include "gea/learners.hpp"
#include "gea/rng.hpp"

#ifndef GEA_CODE_VERSION
#define GEA_CODE_VERSION "unknown"
#endif

namespace gea {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kEvalTol = 1e-10;

std::string format_uint(std::uint64_t x) {
    char buf[24];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::vector<bool> coverage_mask(const TabularMdp& mdp) {
    auto mask = reachable_states(mdp, mdp.initial_state());
    for (auto t : mdp.terminal_states()) mask[t] = false;
    return mask;
}

// Removes the files it tracks unless released.
class OutputGuard {
  public:
    void track(fs::path p) { files_.push_back(std::move(p)); }
    void release() { files_.clear(); }
    ~OutputGuard() {
        std::error_code ec;
        for (const auto& f : files_) fs::remove(f, ec);
    }

  private:
    std::vector<fs::path> files_;
};

std::ofstream open_output(const fs::path& p, OutputGuard& guard) {
    guard.track(p);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    return out;
}

std::size_t depth_column(const RunConfig& cfg) {
    return cfg.environment.kind == EnvironmentKind::deep_sea ? cfg.environment.depth : 0;
}

void write_regret(std::ostream& out, const RunConfig& cfg, const std::vector<ReplicationResult>& results) {
    out << kRegretHeader << '\n';
    const std::string prefix_tail =
        "," + format_uint(depth_column(cfg)) + "," + std::string(algorithm_name(cfg.algorithm.kind)) + ",";
    for (const auto& r : results) {
        const std::string prefix = cfg.run.name + "," + format_uint(r.replication) + prefix_tail;
        const auto& led = r.ledger;
        for (std::size_t e = 0; e < led.filled(); ++e) {
            const std::string ep = format_uint(e);
            for (std::size_t k = 0; k < led.num_agents(); ++k)
                out << prefix << ep << ',' << k << ',' << format_number(led.instant(e, k)) << ','
                    << format_number(led.cumulative(e, k)) << '\n';
            out << prefix << ep << ",all," << format_number(led.mean_instant(e)) << ','
                << format_number(led.total(e)) << '\n';
        }
    }
}

void write_coverage(std::ostream& out, const RunConfig& cfg, const std::vector<ReplicationResult>& results) {
    out << kCoverageHeader << '\n';
    for (const auto& r : results)
        for (const auto& c : r.coverage)
            out << cfg.run.name << ',' << r.replication << ',' << c.step << ',' << format_number(c.fraction) << ','
                << c.min_count << '\n';
}

void write_traces(std::ostream& out, const std::vector<ReplicationResult>& results) {
    out << kTracesHeader << '\n';
    for (const auto& r : results)
        for (const auto& t : r.traces)
            out << r.replication << ',' << t.step << ',' << t.record.agent << ',' << t.record.state << ','
                << t.record.action << ',' << format_number(t.record.sigma_mean) << ','
                << format_number(t.record.beta) << ',' << format_number(t.record.delta) << '\n';
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::string format_number(double x) {
    if (!std::isfinite(x)) throw std::runtime_error("refusing to write a non-finite value");
    if (x == 0.0) x = 0.0;  // drop the sign of -0
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::uint64_t replication_seed(const RunConfig& cfg, std::size_t replication) {
    return cfg.run.base_seed + replication;
}

std::uint64_t stream_seed(const RunConfig& cfg, std::size_t replication, std::uint64_t stream) {
    return derive_seed(replication_seed(cfg, replication), replication, stream);
}

std::shared_ptr<const TabularMdp> build_environment(const RunConfig& cfg, std::size_t replication) {
    const auto& e = cfg.environment;
    if (e.kind == EnvironmentKind::deep_sea) {
        DeepSeaSpec spec;
        spec.depth = e.depth;
        spec.move_right_cost = e.move_right_cost;
        spec.treasure_reward = e.treasure_reward;
        spec.discount = cfg.gamma;
        return std::make_shared<const TabularMdp>(deep_sea_build(spec));
    }
    const auto seed = e.seed.value_or(stream_seed(cfg, replication, kEnvStream));
    return std::make_shared<const TabularMdp>(random_mdp(e.num_states, e.num_actions, e.sparsity, seed, cfg.gamma));
}

std::shared_ptr<const Graph> build_graph(const RunConfig& cfg, std::size_t replication) {
    const auto& g = cfg.graph;
    return std::make_shared<const Graph>(build_topology(g.kind, g.num_agents, g.extra_edge_prob,
                                                        stream_seed(cfg, replication, kGraphStream),
                                                        g.self_inclusive));
}

std::unique_ptr<Population> build_population(const RunConfig& cfg, std::shared_ptr<const TabularMdp> mdp,
                                             std::shared_ptr<const Graph> graph, std::size_t replication) {
    std::vector<std::uint64_t> seeds(graph->num_agents());
    for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = stream_seed(cfg, replication, k);

    GeaSettings settings;
    settings.schedule = cfg.schedule;
    settings.exploration = cfg.exploration;
    settings.sigma_q_sq = cfg.init.variance();

    const auto& a = cfg.algorithm;
    switch (a.kind) {
        case AlgorithmKind::gea_discrete:
            return std::make_unique<TabularGeaPopulation>(mdp, graph, std::move(seeds), cfg.init, settings);
        case AlgorithmKind::gea_continuous: {
            std::shared_ptr<const FeatureMap> fm;
            if (a.feature_map == FeatureKind::one_hot)
                fm = std::make_shared<OneHotFeatures>(mdp->num_states(), mdp->num_actions());
            else
                fm = std::make_shared<DeepSeaTileCoding>(cfg.environment.depth, a.tilings, a.tiles_per_dim,
                                                         mdp->num_actions());
            if (a.dimension && *a.dimension != fm->dimension())
                throw ConfigError("algorithm.d", "does not match the feature map dimension " +
                                                     std::to_string(fm->dimension()));
            return std::make_unique<LinearGeaPopulation>(mdp, graph, std::move(seeds), fm, cfg.init, settings);
        }
        case AlgorithmKind::gucb: {
            auto params = make_gucb_params(*graph, a.beta_const, static_cast<double>(cfg.steps_per_episode()), a.iota,
                                           a.w_mode);
            return std::make_unique<GucbPopulation>(mdp, graph, std::move(seeds), cfg.init, cfg.schedule,
                                                    std::move(params));
        }
        case AlgorithmKind::epsilon_greedy:
            return std::make_unique<EpsilonGreedyPopulation>(mdp, graph, std::move(seeds), cfg.init, cfg.schedule,
                                                             a.epsilon);
    }
    throw InvalidSpec("unknown algorithm");
}

ReplicationResult run_replication(const RunConfig& cfg, std::size_t replication) {
    const auto mdp = build_environment(cfg, replication);
    const auto graph = build_graph(cfg, replication);
    auto pop = build_population(cfg, mdp, graph, replication);

    const std::size_t num_agents = graph->num_agents();
    const std::size_t episodes = cfg.run.episodes;
    const std::size_t horizon = cfg.steps_per_episode();
    const std::size_t cadence = cfg.eval_cadence();
    const StateId s0 = mdp->initial_state();
    const double v_star = value_iteration(*mdp, kEvalTol).values.at(s0);
    const auto mask = coverage_mask(*mdp);

    ReplicationResult out;
    out.replication = replication;
    out.seed = replication_seed(cfg, replication);
    out.ledger = RegretLedger(num_agents, episodes);

    PolicyEvaluator evaluator(*mdp);
    std::vector<double> instant(num_agents);
    std::uint64_t step = 0;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        pop->reset_episode();
        const bool evaluate = is_evaluation_episode(ep, episodes, cadence);
        if (evaluate) {
            for (AgentId k = 0; k < num_agents; ++k) {
                const auto r = regret_update(evaluator, pop->behavior_policy(k), v_star, s0, kEvalTol);
                instant[k] = r.value;
                if (r.clipped) out.ledger.note_clipped();
            }
            out.ledger.add_evaluation(ep, instant);
        }
        for (std::size_t t = 0; t < horizon; ++t) {
            const auto& records = pop->iterate();
            if (records.empty()) break;
            ++step;
            if (cfg.output.emit_traces)
                for (const auto& rec : records) out.traces.push_back({step, rec});
        }
        if (evaluate) {
            const auto cov = coverage_report(pop->all_visits(), cfg.run.coverage_threshold, &mask);
            out.coverage.push_back({step, cov.fraction, cov.min_count});
        }
    }
    out.iterations = step;
    for (AgentId k = 0; k < num_agents; ++k) out.greedy.push_back(pop->greedy_policy(k));
    return out;
}

RunSummary run_experiment(const RunConfig& cfg_in, const RunOptions& options) {
    RunConfig cfg = cfg_in;
    validate_config(cfg);
    const auto start = std::chrono::steady_clock::now();

    const fs::path dir = cfg.output.directory;
    fs::create_directories(dir);
    OutputGuard guard;

    std::vector<ReplicationResult> results(cfg.run.replications);
    std::mutex log_mutex;
    parallel_for(cfg.run.replications, options.threads, [&](std::size_t r) {
        results[r] = run_replication(cfg, r);
        if (!options.quiet) {
            std::lock_guard lock(log_mutex);
            const auto& led = results[r].ledger;
            std::cerr << cfg.run.name << ": replication " << r << " done";
            if (led.filled() > 0) std::cerr << ", regret " << led.total(led.filled() - 1);
            std::cerr << '\n';
        }
    });

    {
        auto out = open_output(dir / "regret.csv", guard);
        write_regret(out, cfg, results);
        if (!out) throw std::runtime_error("write failed for regret.csv");
    }
    {
        auto out = open_output(dir / "coverage.csv", guard);
        write_coverage(out, cfg, results);
        if (!out) throw std::runtime_error("write failed for coverage.csv");
    }
    if (cfg.output.emit_traces) {
        auto out = open_output(dir / "traces.csv", guard);
        write_traces(out, results);
        if (!out) throw std::runtime_error("write failed for traces.csv");
    }

    RunSummary summary;
    summary.directory = dir;
    summary.run_id = cfg.run.name;
    std::size_t clipped = 0;
    json reps = json::array();
    for (const auto& r : results) {
        summary.final_regret.push_back(r.ledger.filled() ? r.ledger.total(r.ledger.filled() - 1) : 0.0);
        clipped += r.ledger.clipped_count();
        json agents = json::array();
        for (std::size_t k = 0; k < cfg.graph.num_agents; ++k) agents.push_back(stream_seed(cfg, r.replication, k));
        reps.push_back({{"replication", r.replication},
                        {"seed", r.seed},
                        {"agent_seeds", agents},
                        {"graph_seed", stream_seed(cfg, r.replication, kGraphStream)},
                        {"iterations", r.iterations}});
    }
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json meta = {{"schema_version", kSchemaVersion},
                 {"run_id", cfg.run.name},
                 {"code_version", GEA_CODE_VERSION},
                 {"config", to_json(cfg)},
                 {"seeds", {{"base_seed", cfg.run.base_seed}, {"replications", reps}}},
                 {"eval_cadence", cfg.eval_cadence()},
                 {"kernel_backend", kernels::backend_name(kernels::active_backend())},
                 {"threads", options.threads},
                 {"warnings", cfg.warnings},
                 {"clipped_regret_terms", clipped},
                 {"wall_time_seconds", summary.wall_seconds}};
    {
        auto out = open_output(dir / "meta.json", guard);
        out << meta.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed for meta.json");
    }
    guard.release();
    return summary;
}

std::vector<RunSummary> sweep(const RunConfig& base, const std::vector<std::size_t>& depths, const RunOptions& options) {
    if (base.environment.kind != EnvironmentKind::deep_sea)
        throw ConfigError("environment.kind", "sweeps vary the deep sea depth");
    if (depths.empty()) throw ConfigError("depths", "at least one depth is required");
    for (auto h : depths)
        if (h < 2) throw ConfigError("depths", "every depth must be >= 2");

    const fs::path root = base.output.directory;
    fs::create_directories(root);
    std::vector<RunSummary> out;
    json runs = json::array();
    for (auto h : depths) {
        RunConfig cfg = base;
        cfg.environment.depth = h;
        cfg.run.max_steps_per_episode.reset();
        cfg.run.name = base.run.name + "_depth" + std::to_string(h);
        cfg.output.directory = (root / ("depth_" + std::to_string(h))).string();
        out.push_back(run_experiment(cfg, options));
        runs.push_back({{"run_id", cfg.run.name},
                        {"depth", h},
                        {"algorithm", algorithm_name(cfg.algorithm.kind)},
                        {"directory", "depth_" + std::to_string(h)},
                        {"regret_csv", "depth_" + std::to_string(h) + "/regret.csv"},
                        {"coverage_csv", "depth_" + std::to_string(h) + "/coverage.csv"},
                        {"meta_json", "depth_" + std::to_string(h) + "/meta.json"}});
    }
    json manifest = {{"schema_version", kSchemaVersion}, {"name", base.run.name}, {"runs", runs}};
    std::ofstream m(root / "manifest.json", std::ios::binary | std::ios::trunc);
    m << manifest.dump(2) << '\n';
    if (!m) throw std::runtime_error("cannot write manifest.json");
    return out;
}

}  // namespace gea
