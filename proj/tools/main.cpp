#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pullin/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Minimal-branch, pull-in threshold, and inequality toolkit for the "
                 "advected membrane deflection problem"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    long long seed = -1;

    app.add_option("--config", config_path, "path to the JSON config")->required();
    app.add_option("--set", overrides, "override a config key, e.g. --set solver.lambda=2.5");
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--seed", seed, "seed for the verification sweeps (overrides verify.seed)");

    std::string command;
    for (const char* name : {"decompose", "solve", "branch", "eigen", "verify", "diagnose",
                             "oracle"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->fallthrough();
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : 1;
    }

    if (command.empty()) {
        std::cerr << app.help() << "\n";
        std::cerr << "error: expected one command: decompose, solve, branch, eigen, verify, "
                     "diagnose, or oracle\n";
        return 1;
    }

    try {
        std::vector<std::string> all_overrides = overrides;
        if (!out_dir.empty()) all_overrides.push_back("output.directory=" + out_dir);
        if (seed >= 0) all_overrides.push_back("verify.seed=" + std::to_string(seed));
        const pullin::Config cfg = pullin::load_config(config_path, all_overrides);
        return pullin::run_command(command, cfg);
    } catch (const pullin::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}
