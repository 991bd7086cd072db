#pragma once

// Experiment orchestration: builds environments, graphs and agent
// populations from a RunConfig, runs seeded replications and writes the
// CSV and metadata outputs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gea/config.hpp"
#include "gea/graph.hpp"
#include "gea/mdp.hpp"
#include "gea/metrics.hpp"
#include "gea/population.hpp"

namespace gea {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kRegretHeader =
    "run_id,replication,depth,algorithm,episode,agent,instant_regret,cumulative_regret";
inline constexpr const char* kCoverageHeader = "run_id,replication,step,coverage_fraction,min_count";
inline constexpr const char* kTracesHeader = "replication,step,agent,state,action,sigma_mean,beta,delta";

// Replication r uses seed base_seed + r; every random stream of the
// replication (environment, graph, agent k) is derived from that seed.
std::uint64_t replication_seed(const RunConfig& cfg, std::size_t replication);
std::uint64_t stream_seed(const RunConfig& cfg, std::size_t replication, std::uint64_t stream);

std::shared_ptr<const TabularMdp> build_environment(const RunConfig& cfg, std::size_t replication);
std::shared_ptr<const Graph> build_graph(const RunConfig& cfg, std::size_t replication);
std::unique_ptr<Population> build_population(const RunConfig& cfg, std::shared_ptr<const TabularMdp> mdp,
                                             std::shared_ptr<const Graph> graph, std::size_t replication);

struct CoverageRow {
    std::uint64_t step = 0;
    double fraction = 0.0;
    std::uint64_t min_count = 0;
};

struct TraceRow {
    std::uint64_t step = 0;
    StepRecord record;
};

struct ReplicationResult {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    RegretLedger ledger;
    std::vector<CoverageRow> coverage;
    std::vector<TraceRow> traces;
    std::uint64_t iterations = 0;
    std::vector<DeterministicPolicy> greedy;  // per agent, at the end of the run
};

ReplicationResult run_replication(const RunConfig& cfg, std::size_t replication);

struct RunOptions {
    std::size_t threads = 1;
    bool quiet = true;
};

struct RunSummary {
    std::filesystem::path directory;
    std::string run_id;
    std::vector<double> final_regret;  // Regret(T) per replication
    double wall_seconds = 0.0;
};

// Runs all replications (in parallel up to options.threads) and writes
// regret.csv, coverage.csv, traces.csv (when enabled) and meta.json into
// cfg.output.directory. Files written by a failed run are removed.
RunSummary run_experiment(const RunConfig& cfg, const RunOptions& options = {});

// One run per depth in <directory>/depth_<H>, all with the same base seed,
// plus manifest.json listing them.
std::vector<RunSummary> sweep(const RunConfig& base, const std::vector<std::size_t>& depths,
                              const RunOptions& options = {});

// Shortest round-trip decimal form; throws on NaN or infinity.
std::string format_number(double x);

}  // namespace gea
