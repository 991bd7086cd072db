#include "gea/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "gea/errors.hpp"
#include "gea/metrics.hpp"

namespace gea {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads one object; every key must be consumed before finish().
class ObjectReader {
  public:
    ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ConfigError(path_, "must be an object");
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (!doc_.contains(key)) return;
        seen_.insert(key);
        out = convert<T>(doc_.at(key), join(path_, key));
    }

    template <typename T>
    void read(const std::string& key, std::optional<T>& out) {
        if (!doc_.contains(key)) return;
        seen_.insert(key);
        const auto& v = doc_.at(key);
        if (v.is_null()) {
            out.reset();
            return;
        }
        out = convert<T>(v, join(path_, key));
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        return doc_.at(key);
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    void finish() const {
        for (const auto& item : doc_.items())
            if (!seen_.count(item.key())) throw ConfigError(join(path_, item.key()), "unknown key");
    }

  private:
    template <typename T>
    static T convert(const json& v, const std::string& field) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(field, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
            if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
            const auto x = v.get<std::int64_t>();
            if (x < 0) throw ConfigError(field, "must be >= 0");
            return static_cast<T>(x);
        } else {
            if (!v.is_number()) throw ConfigError(field, "expected a number");
            return v.get<T>();
        }
    }

    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string read_kind(ObjectReader& r, const std::string& fallback) {
    std::string kind = fallback;
    r.read("kind", kind);
    return kind;
}

void parse_environment(const json& doc, EnvironmentConfig& env) {
    ObjectReader r(doc, "environment");
    const auto kind = read_kind(r, "deep_sea");
    if (kind == "deep_sea") {
        env.kind = EnvironmentKind::deep_sea;
        r.read("depth", env.depth);
        r.read("move_right_cost", env.move_right_cost);
        r.read("treasure_reward", env.treasure_reward);
    } else if (kind == "random_mdp") {
        env.kind = EnvironmentKind::random_mdp;
        r.read("S", env.num_states);
        r.read("A", env.num_actions);
        r.read("sparsity", env.sparsity);
        r.read("seed", env.seed);
    } else {
        throw ConfigError("environment.kind", "expected deep_sea or random_mdp, got '" + kind + "'");
    }
    r.finish();
}

void parse_graph(const json& doc, GraphConfig& g) {
    ObjectReader r(doc, "graph");
    const auto kind = read_kind(r, std::string(topology_name(g.kind)));
    try {
        g.kind = parse_topology(kind);
    } catch (const std::exception&) {
        throw ConfigError("graph.kind", "expected ring, star, complete or random_connected, got '" + kind + "'");
    }
    r.read("K", g.num_agents);
    r.read("self_inclusive", g.self_inclusive);
    r.read("extra_edge_prob", g.extra_edge_prob);
    r.finish();
}

void parse_algorithm_block(const json& doc, AlgorithmConfig& a) {
    ObjectReader r(doc, "algorithm");
    const auto kind = read_kind(r, std::string(algorithm_name(a.kind)));
    try {
        a.kind = parse_algorithm(kind);
    } catch (const std::exception&) {
        throw ConfigError("algorithm.kind",
                          "expected gea_discrete, gea_continuous, gucb or epsilon_greedy, got '" + kind + "'");
    }
    switch (a.kind) {
        case AlgorithmKind::gea_discrete:
            break;
        case AlgorithmKind::gea_continuous: {
            std::string fm = a.feature_map == FeatureKind::one_hot ? "one_hot" : "tile_coding";
            r.read("feature_map", fm);
            if (fm == "one_hot")
                a.feature_map = FeatureKind::one_hot;
            else if (fm == "tile_coding")
                a.feature_map = FeatureKind::tile_coding;
            else
                throw ConfigError("algorithm.feature_map", "expected one_hot or tile_coding, got '" + fm + "'");
            r.read("tilings", a.tilings);
            r.read("tiles_per_dim", a.tiles_per_dim);
            r.read("d", a.dimension);
            break;
        }
        case AlgorithmKind::gucb: {
            r.read("beta_const", a.beta_const);
            r.read("iota", a.iota);
            std::string mode = a.w_mode == GucbWeightMode::unit ? "unit" : "neighborhood";
            r.read("w_mode", mode);
            if (mode == "unit")
                a.w_mode = GucbWeightMode::unit;
            else if (mode == "neighborhood")
                a.w_mode = GucbWeightMode::neighborhood;
            else
                throw ConfigError("algorithm.w_mode", "expected neighborhood or unit, got '" + mode + "'");
            break;
        }
        case AlgorithmKind::epsilon_greedy:
            r.read("epsilon", a.epsilon);
            break;
    }
    r.finish();
}

void parse_init(const json& doc, InitDistribution& init) {
    ObjectReader r(doc, "init");
    const auto kind = read_kind(r, std::string(init_kind_name(init.kind)));
    try {
        init.kind = parse_init_kind(kind);
    } catch (const std::exception&) {
        throw ConfigError("init.kind", "expected uniform_symmetric or gaussian_truncated, got '" + kind +
                                           "' (Assumption 2: zero-mean bounded initialization)");
    }
    r.read("scale", init.scale);
    r.read("truncation", init.truncation);
    r.finish();
}

void require_finite(double x, const std::string& field) {
    if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
}

}  // namespace

std::string_view algorithm_name(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::gea_discrete: return "gea_discrete";
        case AlgorithmKind::gea_continuous: return "gea_continuous";
        case AlgorithmKind::gucb: return "gucb";
        case AlgorithmKind::epsilon_greedy: return "epsilon_greedy";
    }
    return "unknown";
}

AlgorithmKind parse_algorithm(std::string_view name) {
    if (name == "gea_discrete") return AlgorithmKind::gea_discrete;
    if (name == "gea_continuous") return AlgorithmKind::gea_continuous;
    if (name == "gucb") return AlgorithmKind::gucb;
    if (name == "epsilon_greedy") return AlgorithmKind::epsilon_greedy;
    throw InvalidSpec("unknown algorithm '" + std::string(name) + "'");
}

std::size_t RunConfig::steps_per_episode() const {
    if (environment.kind == EnvironmentKind::deep_sea) return environment.depth;
    return run.max_steps_per_episode.value_or(100);
}

std::size_t RunConfig::eval_cadence() const {
    if (run.eval_cadence) return *run.eval_cadence;
    if (environment.kind == EnvironmentKind::deep_sea) return default_eval_cadence(environment.depth);
    return 1;
}

void validate_config(RunConfig& cfg) {
    cfg.warnings.clear();
    const auto& env = cfg.environment;
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("gamma", "must lie in (0, 1)");

    if (env.kind == EnvironmentKind::deep_sea) {
        if (env.depth < 2) throw ConfigError("environment.depth", "must be >= 2");
        if (env.move_right_cost) {
            require_finite(*env.move_right_cost, "environment.move_right_cost");
            if (*env.move_right_cost < 0.0) throw ConfigError("environment.move_right_cost", "must be >= 0");
        }
        if (!std::isfinite(env.treasure_reward))
            throw ConfigError("environment.treasure_reward", "must be finite (Assumption 4: bounded rewards)");
        if (cfg.run.max_steps_per_episode && *cfg.run.max_steps_per_episode != env.depth)
            throw ConfigError("run.max_steps_per_episode", "deep sea episodes last exactly depth steps");
        cfg.warnings.push_back(
            "Assumption 3 does not hold for deep sea: the terminal state is absorbing and rows are never revisited "
            "within an episode; convergence is checked empirically");
    } else {
        if (env.num_states < 2) throw ConfigError("environment.S", "must be >= 2");
        if (env.num_actions < 2) throw ConfigError("environment.A", "must be >= 2");
        if (!(env.sparsity >= 0.0 && env.sparsity <= 1.0))
            throw ConfigError("environment.sparsity", "must lie in [0, 1]");
        if (cfg.run.max_steps_per_episode && *cfg.run.max_steps_per_episode < 1)
            throw ConfigError("run.max_steps_per_episode", "must be >= 1");
    }

    const auto& g = cfg.graph;
    const std::size_t min_k = (g.kind == TopologyKind::ring || g.kind == TopologyKind::star) ? 3 : 2;
    if (g.num_agents < min_k)
        throw ConfigError("graph.K", std::string(topology_name(g.kind)) + " needs K >= " + std::to_string(min_k));
    if (!(g.extra_edge_prob >= 0.0 && g.extra_edge_prob <= 1.0))
        throw ConfigError("graph.extra_edge_prob", "must lie in [0, 1]");
    if (!g.self_inclusive && g.kind == TopologyKind::star)
        throw ConfigError("graph.self_inclusive", "star leaves have a single neighbor; the variance needs |N_k| >= 2");
    if (!g.self_inclusive && g.kind == TopologyKind::random_connected)
        throw ConfigError("graph.self_inclusive", "random trees can have leaves; the variance needs |N_k| >= 2");

    const auto& a = cfg.algorithm;
    if (a.kind == AlgorithmKind::gea_continuous) {
        if (a.feature_map == FeatureKind::tile_coding) {
            if (env.kind != EnvironmentKind::deep_sea)
                throw ConfigError("algorithm.feature_map", "tile_coding is defined for deep sea only");
            if (a.tilings < 1) throw ConfigError("algorithm.tilings", "must be >= 1");
            if (a.tiles_per_dim < 1) throw ConfigError("algorithm.tiles_per_dim", "must be >= 1");
        }
    }
    if (a.kind == AlgorithmKind::gucb) {
        if (!(a.beta_const > 0.0) || !std::isfinite(a.beta_const))
            throw ConfigError("algorithm.beta_const", "must be finite and > 0");
        if (!(a.iota > 0.0) || !std::isfinite(a.iota)) throw ConfigError("algorithm.iota", "must be finite and > 0");
    }
    if (a.kind == AlgorithmKind::epsilon_greedy && !(a.epsilon >= 0.0 && a.epsilon <= 1.0))
        throw ConfigError("algorithm.epsilon", "must lie in [0, 1]");

    cfg.init.validate();
    cfg.schedule.validate();
    cfg.exploration.validate();

    if (cfg.run.replications < 1) throw ConfigError("run.replications", "must be >= 1");
    if (cfg.run.eval_cadence && *cfg.run.eval_cadence < 1) throw ConfigError("run.eval_cadence", "must be >= 1");
    if (cfg.run.name.empty() || cfg.run.name.find_first_of(",\"\n\r") != std::string::npos)
        throw ConfigError("run.name", "must be non-empty and free of commas, quotes and newlines");
    if (cfg.output.directory.empty()) throw ConfigError("output.directory", "must be non-empty");
}

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    ObjectReader top(doc, "");
    if (top.has("environment")) parse_environment(top.child("environment"), cfg.environment);
    top.read("gamma", cfg.gamma);
    if (top.has("graph")) parse_graph(top.child("graph"), cfg.graph);
    if (top.has("algorithm")) parse_algorithm_block(top.child("algorithm"), cfg.algorithm);
    if (top.has("init")) parse_init(top.child("init"), cfg.init);
    if (top.has("schedule")) {
        ObjectReader r(top.child("schedule"), "schedule");
        r.read("c0", cfg.schedule.c0);
        r.read("c1", cfg.schedule.c1);
        r.read("p", cfg.schedule.p);
        r.finish();
    }
    if (top.has("exploration")) {
        ObjectReader r(top.child("exploration"), "exploration");
        r.read("alpha_clamp", cfg.exploration.alpha_clamp);
        r.read("sigma_floor", cfg.exploration.sigma_floor);
        r.read("visitation_cap", cfg.exploration.visitation_cap);
        r.finish();
    }
    if (top.has("run")) {
        ObjectReader r(top.child("run"), "run");
        r.read("episodes", cfg.run.episodes);
        r.read("max_steps_per_episode", cfg.run.max_steps_per_episode);
        r.read("replications", cfg.run.replications);
        r.read("base_seed", cfg.run.base_seed);
        if (r.has("eval_cadence")) {
            const auto& v = top.child("run").at("eval_cadence");
            if (v.is_string()) {
                std::string s;
                r.read("eval_cadence", s);
                if (s != "auto") throw ConfigError("run.eval_cadence", "expected a positive integer or \"auto\"");
                cfg.run.eval_cadence.reset();
            } else {
                r.read("eval_cadence", cfg.run.eval_cadence);
            }
        }
        r.read("coverage_threshold", cfg.run.coverage_threshold);
        r.read("name", cfg.run.name);
        r.finish();
    }
    if (top.has("output")) {
        ObjectReader r(top.child("output"), "output");
        r.read("directory", cfg.output.directory);
        r.read("emit_traces", cfg.output.emit_traces);
        r.finish();
    }
    top.finish();
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed JSON in '" + path.string() + "': " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    json env;
    const auto& e = cfg.environment;
    if (e.kind == EnvironmentKind::deep_sea) {
        env = {{"kind", "deep_sea"}, {"depth", e.depth}, {"treasure_reward", e.treasure_reward}};
        env["move_right_cost"] = e.move_right_cost ? json(*e.move_right_cost) : json(nullptr);
    } else {
        env = {{"kind", "random_mdp"}, {"S", e.num_states}, {"A", e.num_actions}, {"sparsity", e.sparsity}};
        env["seed"] = e.seed ? json(*e.seed) : json(nullptr);
    }

    json alg = {{"kind", algorithm_name(cfg.algorithm.kind)}};
    const auto& a = cfg.algorithm;
    switch (a.kind) {
        case AlgorithmKind::gea_discrete:
            break;
        case AlgorithmKind::gea_continuous:
            alg["feature_map"] = a.feature_map == FeatureKind::one_hot ? "one_hot" : "tile_coding";
            alg["tilings"] = a.tilings;
            alg["tiles_per_dim"] = a.tiles_per_dim;
            alg["d"] = a.dimension ? json(*a.dimension) : json(nullptr);
            break;
        case AlgorithmKind::gucb:
            alg["beta_const"] = a.beta_const;
            alg["iota"] = a.iota;
            alg["w_mode"] = a.w_mode == GucbWeightMode::unit ? "unit" : "neighborhood";
            break;
        case AlgorithmKind::epsilon_greedy:
            alg["epsilon"] = a.epsilon;
            break;
    }

    json run = {{"episodes", cfg.run.episodes},
                {"replications", cfg.run.replications},
                {"base_seed", cfg.run.base_seed},
                {"coverage_threshold", cfg.run.coverage_threshold},
                {"name", cfg.run.name}};
    run["max_steps_per_episode"] =
        cfg.run.max_steps_per_episode ? json(*cfg.run.max_steps_per_episode) : json(nullptr);
    run["eval_cadence"] = cfg.run.eval_cadence ? json(*cfg.run.eval_cadence) : json("auto");

    return {{"environment", env},
            {"gamma", cfg.gamma},
            {"graph",
             {{"kind", topology_name(cfg.graph.kind)},
              {"K", cfg.graph.num_agents},
              {"self_inclusive", cfg.graph.self_inclusive},
              {"extra_edge_prob", cfg.graph.extra_edge_prob}}},
            {"algorithm", alg},
            {"init",
             {{"kind", init_kind_name(cfg.init.kind)},
              {"scale", cfg.init.scale},
              {"truncation", cfg.init.truncation}}},
            {"schedule", {{"c0", cfg.schedule.c0}, {"c1", cfg.schedule.c1}, {"p", cfg.schedule.p}}},
            {"exploration",
             {{"alpha_clamp", cfg.exploration.alpha_clamp},
              {"sigma_floor", cfg.exploration.sigma_floor},
              {"visitation_cap", cfg.exploration.visitation_cap}}},
            {"run", run},
            {"output", {{"directory", cfg.output.directory}, {"emit_traces", cfg.output.emit_traces}}}};
}

}  // namespace gea
