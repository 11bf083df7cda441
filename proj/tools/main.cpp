// Command-line front end: simulate one path from a config, run a shipped
// scenario, or run the coupled-level convergence study.

#include "hybridsim/commands.hpp"
#include "hybridsim/version.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"hybridsim: simulator for regime-switching SDEs with "
                 "history-dependent transition rates"};
    app.set_version_flag("--version", std::string("hybridsim ") + hybridsim::version_string());
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one path from a config file");
    std::string sim_config;
    hybridsim::SimulateOverrides overrides;
    std::uint64_t sim_seed = 0, sim_n = 0;
    double sim_horizon = 0.0;
    std::string sim_outdir;
    unsigned sim_jobs = 0;
    sim->add_option("config", sim_config, "Config file (JSON)")->required();
    auto* o_seed = sim->add_option("--seed", sim_seed, "Override the run seed");
    auto* o_horizon = sim->add_option("--horizon", sim_horizon, "Override the horizon");
    auto* o_n = sim->add_option("--n", sim_n, "Override the discretization level");
    auto* o_out = sim->add_option("--output-dir", sim_outdir, "Override the output directory");
    auto* o_jobs = sim->add_option("--jobs", sim_jobs, "Parallelism degree (0 = all cores)");

    // scenario
    auto* sc = app.add_subcommand("scenario", "Run a shipped scenario");
    std::string sc_name;
    std::uint64_t sc_seed = 1, sc_n = 0;
    double sc_horizon = 0.0;
    std::string sc_outdir = "out";
    sc->add_option("name", sc_name,
                   "insurance | reliability | levy_financial | reinforcement")
        ->required();
    sc->add_option("--seed", sc_seed, "Run seed");
    sc->add_option("--horizon", sc_horizon, "Horizon (0 = scenario default)");
    sc->add_option("--n", sc_n, "Discretization level (0 = scenario default)");
    sc->add_option("--outdir", sc_outdir, "Output directory");

    // converge
    auto* cv = app.add_subcommand("converge", "Coupled-level convergence study");
    std::string cv_config;
    hybridsim::ConvergeOptions cv_opts;
    std::string cv_outdir;
    unsigned cv_jobs = 0;
    cv->add_option("config", cv_config, "Config file (JSON)")->required();
    cv->add_option("--levels", cv_opts.levels, "Coarse levels (ascending)")
        ->required()
        ->delimiter(',');
    cv->add_option("--n-fine", cv_opts.n_fine, "Reference level");
    cv->add_option("--paths", cv_opts.paths, "Paths per level");
    cv->add_option("--seed", cv_opts.seed, "Study seed");
    auto* cv_out = cv->add_option("--outdir", cv_outdir, "Output directory");
    auto* cv_j = cv->add_option("--jobs", cv_jobs, "Parallelism degree (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hybridsim::kExitConfig;
    }

    if (sim->parsed()) {
        if (*o_seed) overrides.seed = sim_seed;
        if (*o_horizon) overrides.horizon = sim_horizon;
        if (*o_n) overrides.level_n = sim_n;
        if (*o_out) overrides.output_dir = sim_outdir;
        if (*o_jobs) overrides.jobs = sim_jobs;
        return hybridsim::cmd_simulate(sim_config, overrides);
    }
    if (sc->parsed()) {
        return hybridsim::cmd_scenario(sc_name, sc_seed, sc_horizon, sc_n, sc_outdir);
    }
    if (cv->parsed()) {
        if (*cv_out) cv_opts.output_dir = cv_outdir;
        if (*cv_j) cv_opts.jobs = cv_jobs;
        return hybridsim::cmd_converge(cv_config, cv_opts);
    }
    return hybridsim::kExitConfig;
}
