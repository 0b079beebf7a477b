#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "icpovm/bench.hpp"

namespace {

icpovm::bench::ExperimentConfig load_config(const std::string& path, const std::string& name,
                                            const std::string& out, std::uint64_t seed,
                                            bool seed_set, int workers) {
    nlohmann::json j = nlohmann::json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw icpovm::IoError("cannot open config file: " + path);
        }
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw icpovm::bench::ConfigError("config file " + path + ": " + e.what());
        }
    }
    auto config = icpovm::bench::ExperimentConfig::from_json(j);
    config.experiment = name;
    if (!out.empty()) {
        config.output_path = out;
    }
    if (config.output_path.empty()) {
        throw icpovm::bench::ConfigError("no output path (--out or config output_path)");
    }
    if (seed_set) {
        config.seed = seed;
    }
    if (workers > 0) {
        config.workers = workers;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IC-POVM dual-frame estimation benchmarks"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::uint64_t seed = 0;
    int workers = 0;
    bool seed_set = false;

    const auto add_experiment = [&](const std::string& name, const std::string& desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->add_option("--config", config_path, "experiment config JSON");
        cmd->add_option("--out", out_path, "output CSV path");
        cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--workers", workers, "worker threads for repetitions");
        return cmd;
    };

    CLI::App* class_perf =
        add_experiment("class-performance", "POVM class / dual scheme performance (Fig. 1)");
    CLI::App* marginal =
        add_experiment("marginal-scaling", "m-local dual variance ratios vs system size (Fig. 2)");
    CLI::App* shots_cmd =
        add_experiment("shot-convergence", "empirical-dual SSV vs shot budget (Fig. 3)");

    std::string shot_file, povm_file, observable_file, duals_spec = "canonical";
    CLI::App* estimate = app.add_subcommand("estimate", "estimate an observable from a shot file");
    estimate->add_option("--shots", shot_file, "JSONL shot record")->required();
    estimate->add_option("--povm", povm_file, "POVM description JSON")->required();
    estimate->add_option("--observable", observable_file, "observable JSON")->required();
    estimate->add_option("--duals", duals_spec,
                         "canonical | avg-optimal | empirical:<m>[:bias]");

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) {
            const auto result = icpovm::bench::estimate_from_files(shot_file, povm_file,
                                                                   observable_file, duals_spec);
            std::cout << result.dump(2) << "\n";
            return 0;
        }
        for (CLI::App* cmd : {class_perf, marginal, shots_cmd}) {
            if (cmd->parsed()) {
                auto config =
                    load_config(config_path, cmd->get_name(), out_path, seed, seed_set, workers);
                icpovm::bench::run_and_write(config);
                return 0;
            }
        }
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const icpovm::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const icpovm::bench::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const icpovm::IcFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
