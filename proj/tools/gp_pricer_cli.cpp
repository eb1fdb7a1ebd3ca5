// Command-line entry point: one subcommand per experiment mode.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gp_pricer/config.hpp"
#include "gp_pricer/errors.hpp"
#include "gp_pricer/experiment.hpp"
#include "gp_pricer/log.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<int> workers;
};

void add_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "YAML experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory (overrides config)");
    cmd->add_option("--seed", o.seed, "master seed (overrides config)");
    cmd->add_option("--replications", o.replications, "replication count (overrides config)")->check(CLI::PositiveNumber);
    cmd->add_option("--workers", o.workers, "worker threads, 0 = all cores (overrides config)")
        ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace gp_pricer;

    CLI::App app{"Gaussian-process dynamic pricing experiments"};
    app.set_version_flag("--version", std::string(GP_PRICER_VERSION));
    app.require_subcommand(1);

    Overrides o;
    const std::pair<const char*, const char*> commands[] = {
        {"infinite", "unlimited inventory: BO-Inf or its bucketed variant"},
        {"finite", "finite inventory over repeated selling seasons"},
        {"oracle", "optimal value and policy under the true demand kernel"},
        {"bench", "per-season runtime of the two finite-inventory algorithms"},
    };
    for (const auto& [name, help] : commands) {
        add_flags(app.add_subcommand(name, help), o);
    }

    CLI11_PARSE(app, argc, argv);
    const Mode mode = *parse_mode(app.get_subcommands().front()->get_name());

    ExperimentConfig cfg;
    try {
        cfg = o.config.empty() ? default_config(mode) : load_config(o.config, mode);
        if (!o.out.empty()) cfg.output = o.out;
        if (o.seed) cfg.master_seed = *o.seed;
        if (o.replications) cfg.replications = *o.replications;
        if (o.workers) cfg.workers = *o.workers;
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        return run_experiment(cfg);
    } catch (const std::exception& e) {
        log::error(e.what());
        return 1;
    }
}
