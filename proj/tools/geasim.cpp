// Command-line front end: run, sweep and validate experiment configs.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gea/config.hpp"
#include "gea/errors.hpp"
#include "gea/experiment.hpp"
#include "gea/kernels.hpp"

namespace {

std::vector<std::size_t> parse_depths(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        const auto v = std::stoull(item, &pos);
        if (pos != item.size()) throw gea::ConfigError("depths", "not an integer: '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-exploration multi-agent Q-learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string depths_text;
    std::string kernels = "auto";
    long long seed = -1;
    std::size_t threads = 1;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--config", config_path, "Config file (JSON)")->required();
    auto* sw = app.add_subcommand("sweep", "Run one experiment per deep-sea depth");
    sw->add_option("--config", config_path, "Config file (JSON)")->required();
    sw->add_option("--depths", depths_text, "Comma-separated depths, e.g. 4,6,8")->required();
    auto* val = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
    val->add_option("--config", config_path, "Config file (JSON)")->required();

    for (auto* sub : {run, sw, val}) {
        sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
        sub->add_option("--seed", seed, "Base seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--threads", threads, "Replications run in parallel")->check(CLI::PositiveNumber);
        sub->add_option("--kernels", kernels, "Dense kernel backend")
            ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
        sub->add_flag("--quiet", quiet, "Suppress progress output");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        gea::kernels::set_backend(gea::kernels::parse_backend(kernels));
        auto cfg = gea::load_config(config_path);
        if (!out_dir.empty()) cfg.output.directory = out_dir;
        if (seed >= 0) cfg.run.base_seed = static_cast<std::uint64_t>(seed);
        gea::validate_config(cfg);

        if (val->parsed()) {
            std::cout << gea::to_json(cfg).dump(2) << '\n';
            for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
            return EXIT_SUCCESS;
        }
        if (!quiet)
            for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

        const gea::RunOptions options{threads, quiet};
        if (run->parsed()) {
            const auto s = gea::run_experiment(cfg, options);
            if (!quiet)
                std::cerr << "wrote " << s.directory.string() << " in " << s.wall_seconds << " s\n";
        } else {
            const auto runs = gea::sweep(cfg, parse_depths(depths_text), options);
            if (!quiet) std::cerr << "wrote " << runs.size() << " runs under " << cfg.output.directory << '\n';
        }
    } catch (const gea::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return EXIT_SUCCESS;
}
