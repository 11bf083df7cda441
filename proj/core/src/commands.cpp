#include "hybridsim/commands.hpp"

#include "hybridsim/config.hpp"
#include "hybridsim/convergence.hpp"
#include "hybridsim/csv.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/manifest.hpp"
#include "hybridsim/scenarios.hpp"

#include <filesystem>
#include <iostream>

namespace hybridsim {

namespace {

void report_error(const char* category, const std::string& message) {
    nlohmann::json j;
    j["category"] = category;
    j["message"] = message;
    std::cerr << "error: " << j.dump() << std::endl;
}

template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        report_error("config", e.what());
        return kExitConfig;
    } catch (const BoundViolationError& e) {
        report_error("bound_violation", e.what());
        return kExitBound;
    } catch (const SolverBlowupError& e) {
        report_error("solver_blowup", e.what());
        return kExitBlowup;
    } catch (const IoError& e) {
        report_error("io", e.what());
        return kExitIo;
    } catch (const ResourceError& e) {
        report_error("resource", e.what());
        return kExitFailure;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return kExitFailure;
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir);
}

} // namespace

int cmd_simulate(const std::string& config_path, const SimulateOverrides& overrides) {
    return run_guarded([&] {
        SimulationConfig config = load_config(config_path);
        if (overrides.seed) config.run.seed = *overrides.seed;
        if (overrides.horizon) config.run.horizon = *overrides.horizon;
        if (overrides.level_n) config.run.level_n = *overrides.level_n;
        if (overrides.output_dir) config.run.output_dir = *overrides.output_dir;
        if (overrides.jobs) config.run.jobs = *overrides.jobs;

        const ModelSpec model = build_model(config.model);
        ensure_dir(config.run.output_dir);
        const NoiseTape tape =
            generate_tape(config.run.seed, config.run.horizon, config.run.level_n,
                          model.lambda(), model.cp_streams, tape_brownian_dim(model));
        const SimulationResult result =
            simulate(model, config.run.horizon, config.run.level_n, tape);

        const std::string dir = config.run.output_dir;
        write_path_csv(result.path, dir + "/path.csv");
        write_audit_csv(result.audit, dir + "/audit.csv");

        RunManifest manifest;
        manifest.command = "simulate " + config_path;
        manifest.seed = config.run.seed;
        manifest.config = to_json(config);
        manifest.output_files = {"path.csv", "audit.csv"};
        write_manifest(manifest, dir);
        return kExitOk;
    });
}

int cmd_scenario(const std::string& name, std::uint64_t seed, double horizon,
                 std::uint64_t level_n, const std::string& output_dir) {
    return run_guarded([&] {
        ScenarioConfig config;
        config.id = scenario_from_name(name);
        config.seed = seed;
        config.horizon = horizon;
        config.level_n = level_n;
        config.output_dir = output_dir;
        run_scenario(config);
        return kExitOk;
    });
}

int cmd_converge(const std::string& config_path, const ConvergeOptions& options) {
    return run_guarded([&] {
        SimulationConfig config = load_config(config_path);
        if (options.output_dir) config.run.output_dir = *options.output_dir;
        if (options.jobs) config.run.jobs = *options.jobs;
        if (options.levels.size() < 3)
            throw ConfigError("converge: need at least 3 levels for a rate fit");

        const ModelSpec model = build_model(config.model);
        ensure_dir(config.run.output_dir);
        const ConvergenceReport report =
            run_convergence_study(model, config.run.horizon, options.levels, options.n_fine,
                                  options.paths, options.seed, config.run.jobs);

        const std::string dir = config.run.output_dir;
        write_convergence_csv(report, dir + "/report.csv");
        write_convergence_summary(report, dir + "/summary.txt");

        RunManifest manifest;
        manifest.command = "converge " + config_path;
        manifest.seed = options.seed;
        manifest.config = to_json(config);
        manifest.config["converge"] = {{"levels", options.levels},
                                       {"n_fine", options.n_fine},
                                       {"paths", options.paths},
                                       {"seed", options.seed}};
        manifest.output_files = {"report.csv", "summary.txt"};
        write_manifest(manifest, dir);
        return kExitOk;
    });
}

} // namespace hybridsim
