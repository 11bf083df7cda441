#pragma once

#include "hybridsim/engine.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace hybridsim {

/// Declarative model description as written in a config file. Drifts and
/// diffusions are restricted to the affine family a*x + b per mode and
/// dimension, which covers every shipped scenario without an expression
/// interpreter; exact_gbm exposes the closed-form solver for oracle runs.
struct ConfigModel {
    int p = 1;
    double lambda = 1.0;
    HybridState initial;
    bool constant_pre_history = false;
    std::string micro = "euler"; // euler | jump_euler | exact_gbm
    double gbm_mu = 0.0;
    double gbm_sigma = 0.0;
    std::map<int, AffineModeSpec> modes;
    IntensitySpec intensity;
    std::vector<CompoundPoissonSpec> cp_streams;

    bool operator==(const ConfigModel&) const = default;
};

struct RunSection {
    double horizon = 1.0;
    std::uint64_t level_n = 256;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    unsigned jobs = 0; // 0 = all available cores

    bool operator==(const RunSection&) const = default;
};

struct SimulationConfig {
    ConfigModel model;
    RunSection run;

    bool operator==(const SimulationConfig&) const = default;
};

/// Canonical JSON form; config_from_json(to_json(c)) == c.
nlohmann::json to_json(const SimulationConfig& config);
SimulationConfig config_from_json(const nlohmann::json& doc);

/// Reads and parses a config file. Any parse or validation problem,
/// including a missing file, raises ConfigError.
SimulationConfig load_config(const std::string& path);

/// Builds the executable model from the declarative description.
ModelSpec build_model(const ConfigModel& model);

} // namespace hybridsim
