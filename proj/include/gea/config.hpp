#pragma once

// Experiment configuration: a JSON document with strict key checking.
// Every rejected value is reported with its dotted field path.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gea/exploration.hpp"
#include "gea/graph.hpp"
#include "gea/population.hpp"

namespace gea {

enum class EnvironmentKind { deep_sea, random_mdp };
enum class AlgorithmKind { gea_discrete, gea_continuous, gucb, epsilon_greedy };
enum class FeatureKind { one_hot, tile_coding };

std::string_view algorithm_name(AlgorithmKind kind);
AlgorithmKind parse_algorithm(std::string_view name);

struct EnvironmentConfig {
    EnvironmentKind kind = EnvironmentKind::deep_sea;
    // deep_sea
    std::size_t depth = 6;
    std::optional<double> move_right_cost;
    double treasure_reward = 1.0;
    // random_mdp
    std::size_t num_states = 5;
    std::size_t num_actions = 2;
    double sparsity = 0.5;
    std::optional<std::uint64_t> seed;  // defaults to the replication seed
};

struct GraphConfig {
    TopologyKind kind = TopologyKind::ring;
    std::size_t num_agents = 5;
    bool self_inclusive = true;
    double extra_edge_prob = 0.0;
};

struct AlgorithmConfig {
    AlgorithmKind kind = AlgorithmKind::gea_discrete;
    // gea_continuous
    FeatureKind feature_map = FeatureKind::one_hot;
    std::size_t tilings = 4;
    std::size_t tiles_per_dim = 3;
    std::optional<std::size_t> dimension;  // checked against the feature map when given
    // gucb
    double beta_const = 0.1;
    double iota = 1.0;
    GucbWeightMode w_mode = GucbWeightMode::neighborhood;
    // epsilon_greedy
    double epsilon = 0.1;
};

struct RunBlock {
    std::size_t episodes = 1000;
    std::optional<std::size_t> max_steps_per_episode;  // deep sea: fixed at depth
    std::size_t replications = 1;
    std::uint64_t base_seed = 0;
    std::optional<std::size_t> eval_cadence;  // default: 1 for depth <= 10, else 5
    std::uint64_t coverage_threshold = 1;
    std::string name = "run";
};

struct OutputConfig {
    std::string directory = "out";
    bool emit_traces = false;
};

struct RunConfig {
    EnvironmentConfig environment;
    double gamma = 0.99;
    GraphConfig graph;
    AlgorithmConfig algorithm;
    InitDistribution init;
    StepSchedule schedule;
    ExplorationParams exploration;
    RunBlock run;
    OutputConfig output;

    // Non-fatal findings from validation (recorded in run metadata).
    std::vector<std::string> warnings;

    std::size_t steps_per_episode() const;
    std::size_t eval_cadence() const;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
// Full document with every default made explicit; parse_config(to_json(c))
// reproduces c.
nlohmann::json to_json(const RunConfig& cfg);
// Re-runs every check; fills cfg.warnings.
void validate_config(RunConfig& cfg);

}  // namespace gea
