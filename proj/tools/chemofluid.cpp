// chemofluid: command-line front end.
//
//   chemofluid <command> [--config FILE] [--out DIR] [--seed N] [--resolution N]
//
// Commands: run, validate-model, check-geometry, mms, scan-inequalities.

#include "chemofluid/commands.hpp"
#include "chemofluid/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

int main(int argc, char** argv) {
    using namespace chemofluid;

    CLI::App app{"Chemotaxis-fluid simulator on level-set domains"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<long> seed;
    std::optional<int> resolution;

    const std::map<std::string, std::string> about{
        {"run", "integrate the coupled system and evaluate diagnostics"},
        {"validate-model", "check the structural conditions on chi and f"},
        {"check-geometry", "classify cells and report boundary geometry"},
        {"mms", "manufactured-solution convergence study"},
        {"scan-inequalities", "boundary and Hessian inequalities on random Neumann fields"},
    };
    for (const std::string& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config,-c", config_path, "configuration file (key = value)")->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "random seed (overrides seed)");
        sub->add_option("--resolution,-n", resolution,
                        "cells per unit length (overrides grid.n; for mms, the single resolution)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    const std::string verb = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = config_path.empty() ? parse_config("", "defaults") : load_config(config_path);
        if (seed) {
            if (*seed < 0) throw ConfigError("--seed must be non-negative");
            cfg.seed = static_cast<std::uint64_t>(*seed);
        }
        if (resolution) {
            cfg.grid_n = *resolution;
            cfg.mms.resolutions = {*resolution};
        }
        cfg.validate();
        const std::string out = out_dir.empty() ? cfg.output.dir : out_dir;
        return run_command(verb, cfg, out, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
