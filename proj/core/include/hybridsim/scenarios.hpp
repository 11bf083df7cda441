#pragma once

#include "hybridsim/engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hybridsim {

enum class ScenarioId { Insurance, Reliability, LevyFinancial, Reinforcement };

std::string scenario_name(ScenarioId id);
ScenarioId scenario_from_name(const std::string& name); // throws ConfigError

/// One named constant of a scenario with its provenance: `published` values
/// are pinned against the baked-in table by unit tests, `default` values are
/// artifact choices where the source material left them open.
struct ScenarioParameter {
    std::string name;
    double value = 0.0;
    bool published = false;
};

std::vector<ScenarioParameter> scenario_parameter_table(ScenarioId id);

/// Regime switching driven by Euclidean path functionals: occupation time
/// above a barrier over a rolling window plus a drawdown indicator, with
/// affine rates clamped at zero. Two modes: calm growth vs stressed.
ModelSpec build_insurance();

/// Semi-Markov component replacement: both directions depend on the sojourn
/// age only; mode 0 has a bathtub hazard (early decay, flat middle, linear
/// wear-out), mode 1 a linear capped hazard.
ModelSpec build_reliability();

/// Jump-activity-driven regime switching: multiplicative compound Poisson
/// price jumps, with rates fed by windowed counts of relative jumps beyond
/// +-15%.
ModelSpec build_levy_financial();

/// Self-reinforcing transitions through the bounded softmax rate map on
/// transition counts and mode occupation times; the Euclidean component is a
/// constant placeholder.
ModelSpec build_reinforcement();

ModelSpec build_scenario(ScenarioId id);

/// Scenario defaults used when the CLI does not override them.
double scenario_default_horizon(ScenarioId id);
std::uint64_t scenario_default_level(ScenarioId id);

struct ScenarioConfig {
    ScenarioId id = ScenarioId::Insurance;
    double horizon = 0.0;       // 0 = scenario default
    std::uint64_t level_n = 0;  // 0 = scenario default
    std::uint64_t seed = 1;
    std::string output_dir = "out";
};

struct ScenarioOutputs {
    std::vector<std::string> files; // relative to output_dir, manifest last
};

/// Simulates one path and emits path.csv, audit.csv, indicators.csv and
/// plot.py plus the run manifest into the output directory. The indicator
/// columns are the per-scenario driving quantities (recomputable from
/// path.csv through the history functionals).
ScenarioOutputs run_scenario(const ScenarioConfig& config);

} // namespace hybridsim
