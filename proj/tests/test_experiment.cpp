#include <gtest/gtest.h>

#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gea/errors.hpp"
#include "gea/experiment.hpp"
#include "json.hpp"

using namespace gea;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("gea_experiment_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

RunConfig small_config(const fs::path& dir, AlgorithmKind algo = AlgorithmKind::gea_discrete) {
    RunConfig cfg;
    cfg.environment.depth = 4;
    cfg.algorithm.kind = algo;
    cfg.run.episodes = 50;
    cfg.run.replications = 3;
    cfg.run.base_seed = 11;
    cfg.run.name = "small";
    cfg.output.directory = dir.string();
    return cfg;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GEASIM_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(1e-300), "1e-300");
    const double x = 0.9428217248833332;
    EXPECT_EQ(std::stod(format_number(x)), x);
    EXPECT_THROW(format_number(std::numeric_limits<double>::quiet_NaN()), std::runtime_error);
    EXPECT_THROW(format_number(std::numeric_limits<double>::infinity()), std::runtime_error);
}

TEST(Seeds, ReplicationsUseOffsetSeeds) {
    RunConfig cfg;
    cfg.run.base_seed = 100;
    EXPECT_EQ(replication_seed(cfg, 0), 100u);
    EXPECT_EQ(replication_seed(cfg, 3), 103u);
    EXPECT_NE(stream_seed(cfg, 0, 0), stream_seed(cfg, 0, 1));
    EXPECT_NE(stream_seed(cfg, 0, 0), stream_seed(cfg, 1, 0));
}

TEST(Experiment, ZeroEpisodesWritesHeadersOnly) {
    const auto dir = scratch("zero");
    auto cfg = small_config(dir);
    cfg.run.episodes = 0;
    cfg.output.emit_traces = true;
    const auto summary = run_experiment(cfg);
    EXPECT_EQ(slurp(dir / "regret.csv"), std::string(kRegretHeader) + "\n");
    EXPECT_EQ(slurp(dir / "coverage.csv"), std::string(kCoverageHeader) + "\n");
    EXPECT_EQ(slurp(dir / "traces.csv"), std::string(kTracesHeader) + "\n");
    ASSERT_EQ(summary.final_regret.size(), 3u);
    for (double r : summary.final_regret) EXPECT_EQ(r, 0.0);
    fs::remove_all(dir);
}

TEST(Experiment, RegretCsvSchemaAndAggregateRow) {
    const auto dir = scratch("schema");
    const auto cfg = small_config(dir);
    const auto summary = run_experiment(cfg);
    const auto rows = read_csv(dir / "regret.csv");
    ASSERT_FALSE(rows.empty());
    std::ostringstream header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header << (i ? "," : "") << rows[0][i];
    EXPECT_EQ(header.str(), kRegretHeader);

    // (replication, episode) -> per-agent instant values and the aggregate row
    std::map<std::pair<std::string, std::string>, std::vector<double>> agents;
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> all;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        ASSERT_EQ(row.size(), 8u);
        EXPECT_EQ(row[0], "small");
        EXPECT_EQ(row[2], "4");
        EXPECT_EQ(row[3], "gea_discrete");
        const double instant = std::stod(row[6]);
        EXPECT_GE(instant, 0.0);
        const auto key = std::make_pair(row[1], row[4]);
        if (row[5] == "all")
            all[key] = {instant, std::stod(row[7])};
        else
            agents[key].push_back(instant);
    }
    EXPECT_EQ(all.size(), 3u * 50u);
    for (const auto& [key, vals] : agents) {
        ASSERT_EQ(vals.size(), 5u);
        const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / 5.0;
        EXPECT_NEAR(all.at(key).first, mean, 1e-12);
    }
    for (std::size_t r = 0; r < 3; ++r)
        EXPECT_NEAR(all.at({std::to_string(r), "49"}).second, summary.final_regret[r], 1e-9);
    fs::remove_all(dir);
}

TEST(Experiment, CoverageRowsAreMonotone) {
    const auto dir = scratch("coverage");
    run_experiment(small_config(dir));
    const auto rows = read_csv(dir / "coverage.csv");
    ASSERT_EQ(rows.size(), 1u + 3u * 50u);
    double last_fraction = 0.0;
    long last_step = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][1] != rows[i - 1][1]) last_fraction = 0.0, last_step = 0;
        const double f = std::stod(rows[i][3]);
        const long step = std::stol(rows[i][2]);
        EXPECT_GE(f, last_fraction);
        EXPECT_LE(f, 1.0);
        EXPECT_GT(step, last_step);
        last_fraction = f;
        last_step = step;
    }
    fs::remove_all(dir);
}

TEST(Experiment, MetaJsonRecordsConfigAndSeeds) {
    const auto dir = scratch("meta");
    const auto cfg = small_config(dir);
    run_experiment(cfg, {.threads = 2});
    const auto meta = json::parse(slurp(dir / "meta.json"));
    EXPECT_EQ(meta.at("schema_version"), 1);
    EXPECT_EQ(meta.at("run_id"), "small");
    EXPECT_EQ(meta.at("threads"), 2);
    EXPECT_EQ(meta.at("seeds").at("base_seed"), 11);
    const auto& reps = meta.at("seeds").at("replications");
    ASSERT_EQ(reps.size(), 3u);
    EXPECT_EQ(reps[2].at("seed"), 13);
    EXPECT_EQ(reps[0].at("agent_seeds").size(), 5u);
    EXPECT_EQ(reps[0].at("iterations"), 50 * 4);
    const auto echoed = parse_config(meta.at("config"));
    EXPECT_EQ(to_json(echoed), to_json(cfg));
    EXPECT_FALSE(meta.at("warnings").empty());  // deep sea warns about its reward sign
    fs::remove_all(dir);
}

TEST(Experiment, DeterministicAcrossInvocationsAndThreads) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    auto cfg = small_config(a);
    cfg.output.emit_traces = true;
    run_experiment(cfg, {.threads = 1});
    cfg.output.directory = b.string();
    run_experiment(cfg, {.threads = 3});
    EXPECT_EQ(slurp(a / "regret.csv"), slurp(b / "regret.csv"));
    EXPECT_EQ(slurp(a / "coverage.csv"), slurp(b / "coverage.csv"));
    EXPECT_EQ(slurp(a / "traces.csv"), slurp(b / "traces.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Experiment, ReplicationDoesNotDependOnReplicationCount) {
    auto cfg = small_config(scratch("unused"));
    const auto three = run_replication(cfg, 1);
    cfg.run.replications = 2;
    const auto two = run_replication(cfg, 1);
    for (std::size_t e = 0; e < cfg.run.episodes; ++e) EXPECT_EQ(three.ledger.total(e), two.ledger.total(e));
}

TEST(Experiment, EveryAlgorithmRuns) {
    for (auto algo : {AlgorithmKind::gea_discrete, AlgorithmKind::gea_continuous, AlgorithmKind::gucb,
                      AlgorithmKind::epsilon_greedy}) {
        const auto dir = scratch("algo");
        const auto summary = run_experiment(small_config(dir, algo));
        EXPECT_EQ(summary.final_regret.size(), 3u) << algorithm_name(algo);
        EXPECT_TRUE(fs::exists(dir / "meta.json"));
        fs::remove_all(dir);
    }
}

TEST(Experiment, RandomMdpRuns) {
    const auto dir = scratch("random");
    auto cfg = small_config(dir);
    cfg.environment.kind = EnvironmentKind::random_mdp;
    cfg.run.max_steps_per_episode = 20;
    cfg.gamma = 0.9;
    run_experiment(cfg);
    const auto rows = read_csv(dir / "regret.csv");
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[1][2], "0");
    fs::remove_all(dir);
}

TEST(Experiment, FailedRunRemovesPartialOutputs) {
    const auto dir = scratch("partial");
    fs::create_directories(dir / "coverage.csv");  // cannot be opened as a file
    EXPECT_ANY_THROW(run_experiment(small_config(dir)));
    EXPECT_FALSE(fs::exists(dir / "regret.csv"));
    EXPECT_FALSE(fs::exists(dir / "meta.json"));
    fs::remove_all(dir);
}

TEST(Experiment, InvalidConfigIsRejectedBeforeWriting) {
    const auto dir = scratch("invalid");
    auto cfg = small_config(dir);
    cfg.gamma = 1.5;
    EXPECT_THROW(run_experiment(cfg), ConfigError);
    EXPECT_FALSE(fs::exists(dir / "regret.csv"));
}

TEST(Sweep, WritesOneRunPerDepthAndManifest) {
    const auto dir = scratch("sweep");
    auto cfg = small_config(dir);
    cfg.run.episodes = 200;
    const auto runs = sweep(cfg, {4, 6, 8});
    ASSERT_EQ(runs.size(), 3u);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest.at("schema_version"), 1);
    ASSERT_EQ(manifest.at("runs").size(), 3u);
    std::vector<double> mean_regret;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& run = manifest.at("runs")[i];
        EXPECT_EQ(run.at("depth"), 4 + 2 * i);
        EXPECT_EQ(run.at("algorithm"), "gea_discrete");
        for (const char* key : {"regret_csv", "coverage_csv", "meta_json"})
            EXPECT_TRUE(fs::exists(dir / run.at(key).get<std::string>())) << key;
        const auto& fr = runs[i].final_regret;
        mean_regret.push_back(std::accumulate(fr.begin(), fr.end(), 0.0) / static_cast<double>(fr.size()));
    }
    EXPECT_LT(mean_regret[0], mean_regret[1]);
    EXPECT_LT(mean_regret[1], mean_regret[2]);
    fs::remove_all(dir);
}

TEST(Sweep, RejectsRandomMdpAndBadDepths) {
    auto cfg = small_config(scratch("sweep_bad"));
    EXPECT_THROW(sweep(cfg, {}), ConfigError);
    EXPECT_THROW(sweep(cfg, {1}), ConfigError);
    cfg.environment.kind = EnvironmentKind::random_mdp;
    EXPECT_THROW(sweep(cfg, {4}), ConfigError);
}

// Matched budgets on a shallow problem: the neighborhood-variance learner
// beats undirected exploration on total regret.
TEST(Baselines, GeaBeatsEpsilonGreedyOnShallowDeepSea) {
    auto mean_total = [](AlgorithmKind algo) {
        RunConfig cfg;
        cfg.environment.depth = 4;
        cfg.algorithm.kind = algo;
        cfg.run.episodes = 5000;
        cfg.run.replications = 10;
        double sum = 0.0;
        for (std::size_t r = 0; r < 10; ++r) {
            const auto res = run_replication(cfg, r);
            sum += res.ledger.total(cfg.run.episodes - 1);
        }
        return sum / 10.0;
    };
    EXPECT_LT(mean_total(AlgorithmKind::gea_discrete), mean_total(AlgorithmKind::epsilon_greedy));
}

TEST(Cli, ValidateAndRun) {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    {
        std::ofstream good(dir / "good.json");
        good << R"({"environment":{"depth":3},"run":{"episodes":5,"name":"cli"},"output":{"directory":")"
             << (dir / "out").string() << R"("}})";
        std::ofstream bad(dir / "bad.json");
        bad << R"({"gamma": 2.0})";
        std::ofstream unknown(dir / "unknown.json");
        unknown << R"({"run": {"episode": 5}})";
    }
    EXPECT_EQ(run_cli("validate --config " + (dir / "good.json").string()), 0);
    EXPECT_EQ(run_cli("validate --config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run_cli("validate --config " + (dir / "unknown.json").string()), 2);
    EXPECT_EQ(run_cli("validate --config " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run_cli("run --quiet --kernels scalar --config " + (dir / "good.json").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "regret.csv"));
    EXPECT_EQ(run_cli("sweep --quiet --depths 3,4 --config " + (dir / "good.json").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
    EXPECT_NE(run_cli("run"), 0);
    fs::remove_all(dir);
}
