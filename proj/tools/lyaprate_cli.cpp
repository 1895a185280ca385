// lyaprate: queue-aware sampling-rate control simulator.
//
//   lyaprate run <config> -o <csv>
//   lyaprate sweep <config> --v 50,200 -o <dir> [--parallel]
//   lyaprate fig2 -o <dir>
//
// --seed <u64> overrides the config seed for any subcommand.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lyaprate/lyaprate.hpp"

namespace {

std::vector<double> parse_v_list(const std::string& text) {
    std::vector<double> out;
    if (lyaprate::detail::trim(text).empty()) {
        throw lyaprate::ConfigError("--v needs a non-empty comma-separated list of V values");
    }
    for (const auto item : lyaprate::detail::split(text, ',')) {
        double v = 0.0;
        if (!lyaprate::detail::parse_number(item, v) || !(v >= 0.0)) {
            throw lyaprate::ConfigError("invalid V value '" + std::string(item) + "' (need a non-negative number)");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov drift-plus-penalty sampling-rate controller and slotted queue simulator"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    bool parallel = false;
    app.add_option("--seed", seed, "Override the PRNG seed");
    app.add_flag("--parallel", parallel, "Run sweep points concurrently (output identical to sequential)");

    std::string config_path;
    std::string output;
    std::string v_list;

    auto* run_cmd = app.add_subcommand("run", "Simulate one config, write per-slot CSV and summary");
    run_cmd->add_option("config", config_path, "Config file")->required();
    run_cmd->add_option("-o,--output", output, "Per-slot CSV path")->required();
    run_cmd->add_option("--seed", seed, "Override the PRNG seed");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run the Lyapunov policy once per V");
    sweep_cmd->add_option("config", config_path, "Config file")->required();
    sweep_cmd->add_option("--v", v_list, "Comma-separated V values")->required();
    sweep_cmd->add_option("-o,--output", output, "Output directory")->required();
    sweep_cmd->add_option("--seed", seed, "Override the PRNG seed");
    sweep_cmd->add_flag("--parallel", parallel, "Run sweep points concurrently");

    auto* fig2_cmd = app.add_subcommand("fig2", "Fixed-rate vs Lyapunov queue dynamics, default scenario");
    fig2_cmd->add_option("-o,--output", output, "Output directory")->required();
    fig2_cmd->add_option("--seed", seed, "Override the PRNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto spec = lyaprate::load_experiment(config_path);
            if (seed) spec.config.seed = *seed;
            const auto summary = lyaprate::run_experiment(spec, output);
            lyaprate::write_summary(std::cout, summary);
        } else if (*sweep_cmd) {
            const auto vs = parse_v_list(v_list);
            auto spec = lyaprate::load_experiment(config_path);
            if (seed) spec.config.seed = *seed;
            const auto points = lyaprate::sweep_experiment(spec, vs, output, parallel);
            lyaprate::write_sweep_csv(std::cout, points);
        } else if (*fig2_cmd) {
            const auto curves = lyaprate::write_fig2(output, seed.value_or(lyaprate::kDefaultSeed));
            for (const auto& [name, summary] : curves) {
                std::cout << "[" << name << "]\n";
                lyaprate::write_summary(std::cout, summary);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "lyaprate: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
