#include "hybridsim/scenarios.hpp"

#include "hybridsim/csv.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace hybridsim {

namespace {

// Insurance scenario constants. The lambda bound is an artifact choice: the
// maximal achievable exit rate is alpha01 + gamma01 = 3.2 (occupation only
// lowers it, the recovery row peaks at 2.3), so 4.0 dominates with headroom.
namespace insurance {
constexpr double kDrift0A = 0.08, kDrift0B = 0.02, kSigma0 = 0.08;
constexpr double kDrift1A = -0.03, kDrift1B = 0.01, kSigma1 = 0.20;
constexpr double kAlpha01 = 0.2, kBeta01 = -0.5, kGamma01 = 3.0;
constexpr double kAlpha10 = 0.3, kBeta10 = 2.0, kGamma10 = -2.0;
constexpr double kBarrier = 1.0, kWindow = 1.0, kDrawdownThreshold = 0.25;
constexpr double kX0 = 0.9;
constexpr double kLambda = 4.0;
constexpr double kHorizon = 10.0;
} // namespace insurance

// Reliability scenario constants: bathtub hazard for component 0,
// linear wear for component 1, both capped at 2.0. The Euclidean dynamics
// are artifact defaults (slow mode-dependent degradation).
namespace reliability {
constexpr double kEarlyCoeff = 1.5, kEarlyDecay = 3.0, kEarlyEnd = 0.5;
constexpr double kMidRate = 0.2, kMidEnd = 5.0;
constexpr double kWearBase = 0.2, kWearSlope = 0.3;
constexpr double kRepairBase = 0.3, kRepairSlope = 0.25;
constexpr double kCap = 2.0;
constexpr double kLambda = 2.0;
constexpr double kDrift0 = -0.02, kDrift1 = -0.05, kSigma = 0.02, kX0 = 1.0;
constexpr double kHorizon = 15.0;
} // namespace reliability

// Jump-activity scenario constants. The compound Poisson parameters are
// artifact defaults chosen so +-15% moves occur with nontrivial frequency.
namespace levy {
constexpr double kBullDrift = 0.15, kBearDrift = -0.10, kSigma = 1.0;
constexpr double kBase01 = 0.1, kSlope01 = 0.8;
constexpr double kBase10 = 0.1, kSlope10 = 0.6;
constexpr double kCap = 2.0, kThreshold = 0.15, kWindow = 1.0;
constexpr double kLambda = 2.0;
constexpr double kCpRate = 0.5, kCpPUp = 0.4, kCpMeanUp = 0.18, kCpMeanDown = 0.22;
constexpr double kX0 = 1.0;
constexpr double kHorizon = 10.0;
} // namespace levy

// Reinforcement scenario constants: logits of the bounded softmax map.
namespace reinforcement {
constexpr double kBase01 = 0.0, kCnt01 = 0.25, kLoc0 = 0.005;
constexpr double kBase10 = 0.2, kCnt10 = 0.20, kLoc1 = 0.008;
constexpr double kLambda = 2.0;
constexpr double kHorizon = 20.0;
} // namespace reinforcement

FunctionalTerm constant_term(double coeff) {
    FunctionalTerm t;
    t.kind = TermKind::Constant;
    t.coeff = coeff;
    return t;
}

} // namespace

std::string scenario_name(ScenarioId id) {
    switch (id) {
        case ScenarioId::Insurance: return "insurance";
        case ScenarioId::Reliability: return "reliability";
        case ScenarioId::LevyFinancial: return "levy_financial";
        case ScenarioId::Reinforcement: return "reinforcement";
    }
    return "insurance";
}

ScenarioId scenario_from_name(const std::string& name) {
    if (name == "insurance") return ScenarioId::Insurance;
    if (name == "reliability") return ScenarioId::Reliability;
    if (name == "levy_financial") return ScenarioId::LevyFinancial;
    if (name == "reinforcement") return ScenarioId::Reinforcement;
    throw ConfigError("unknown scenario '" + name +
                      "' (expected insurance, reliability, levy_financial or reinforcement)");
}

std::vector<ScenarioParameter> scenario_parameter_table(ScenarioId id) {
    switch (id) {
        case ScenarioId::Insurance:
            return {
                {"drift_calm_a", insurance::kDrift0A, true},
                {"drift_calm_b", insurance::kDrift0B, true},
                {"sigma_calm", insurance::kSigma0, true},
                {"drift_stressed_a", insurance::kDrift1A, true},
                {"drift_stressed_b", insurance::kDrift1B, true},
                {"sigma_stressed", insurance::kSigma1, true},
                {"alpha_01", insurance::kAlpha01, true},
                {"beta_01", insurance::kBeta01, true},
                {"gamma_01", insurance::kGamma01, true},
                {"alpha_10", insurance::kAlpha10, true},
                {"beta_10", insurance::kBeta10, true},
                {"gamma_10", insurance::kGamma10, true},
                {"occupation_barrier", insurance::kBarrier, true},
                {"occupation_window", insurance::kWindow, true},
                {"drawdown_threshold", insurance::kDrawdownThreshold, true},
                {"x0", insurance::kX0, true},
                {"lambda", insurance::kLambda, false},
                {"initial_mode", 0.0, false},
                {"horizon", insurance::kHorizon, false},
            };
        case ScenarioId::Reliability:
            return {
                {"hazard01_early_coeff", reliability::kEarlyCoeff, true},
                {"hazard01_early_decay", reliability::kEarlyDecay, true},
                {"hazard01_early_end", reliability::kEarlyEnd, true},
                {"hazard01_mid_rate", reliability::kMidRate, true},
                {"hazard01_mid_end", reliability::kMidEnd, true},
                {"hazard01_wear_base", reliability::kWearBase, true},
                {"hazard01_wear_slope", reliability::kWearSlope, true},
                {"hazard10_base", reliability::kRepairBase, true},
                {"hazard10_slope", reliability::kRepairSlope, true},
                {"hazard_cap", reliability::kCap, true},
                {"lambda", reliability::kLambda, true},
                {"drift_mode0", reliability::kDrift0, false},
                {"drift_mode1", reliability::kDrift1, false},
                {"sigma", reliability::kSigma, false},
                {"x0", reliability::kX0, false},
                {"horizon", reliability::kHorizon, false},
            };
        case ScenarioId::LevyFinancial:
            return {
                {"drift_bull_a", levy::kBullDrift, true},
                {"drift_bear_a", levy::kBearDrift, true},
                {"sigma", levy::kSigma, true},
                {"rate01_base", levy::kBase01, true},
                {"rate01_per_crash", levy::kSlope01, true},
                {"rate10_base", levy::kBase10, true},
                {"rate10_per_rally", levy::kSlope10, true},
                {"rate_cap", levy::kCap, true},
                {"jump_threshold", levy::kThreshold, true},
                {"jump_window", levy::kWindow, true},
                {"lambda", levy::kLambda, false},
                {"cp_rate", levy::kCpRate, false},
                {"cp_p_up", levy::kCpPUp, false},
                {"cp_mean_up", levy::kCpMeanUp, false},
                {"cp_mean_down", levy::kCpMeanDown, false},
                {"x0", levy::kX0, false},
                {"horizon", levy::kHorizon, false},
            };
        case ScenarioId::Reinforcement:
            return {
                {"theta01_base", reinforcement::kBase01, true},
                {"theta01_per_count", reinforcement::kCnt01, true},
                {"theta01_per_occupation", reinforcement::kLoc0, true},
                {"theta10_base", reinforcement::kBase10, true},
                {"theta10_per_count", reinforcement::kCnt10, true},
                {"theta10_per_occupation", reinforcement::kLoc1, true},
                {"lambda", reinforcement::kLambda, true},
                {"horizon", reinforcement::kHorizon, false},
            };
    }
    return {};
}

ModelSpec build_insurance() {
    using namespace insurance;
    ModelSpec model;
    model.intensity.kind = IntensitySpec::Kind::Affine;
    model.intensity.lambda = kLambda;

    auto occupation = [](double coeff) {
        FunctionalTerm t;
        t.kind = TermKind::Occupation;
        t.coeff = coeff;
        t.barrier = kBarrier;
        t.window = kWindow;
        return t;
    };
    auto dd_indicator = [](double coeff) {
        FunctionalTerm t;
        t.kind = TermKind::DrawdownIndicator;
        t.coeff = coeff;
        t.threshold = kDrawdownThreshold;
        return t;
    };
    RateEntry to_stressed;
    to_stressed.from_mode = 0;
    to_stressed.to_mode = 1;
    to_stressed.terms = {constant_term(kAlpha01), occupation(kBeta01), dd_indicator(kGamma01)};
    RateEntry to_calm;
    to_calm.from_mode = 1;
    to_calm.to_mode = 0;
    to_calm.terms = {constant_term(kAlpha10), occupation(kBeta10), dd_indicator(kGamma10)};
    model.intensity.entries = {to_stressed, to_calm};

    std::map<int, AffineModeSpec> modes;
    modes[0] = {{{kDrift0A, kDrift0B}}, {{0.0, kSigma0}}, std::nullopt};
    modes[1] = {{{kDrift1A, kDrift1B}}, {{0.0, kSigma1}}, std::nullopt};
    model.dynamics = make_affine_dynamics(modes, 1);
    model.micro.kind = MicroSelector::Kind::Euler;
    model.initial = {0, {kX0}};
    return model;
}

ModelSpec build_reliability() {
    using namespace reliability;
    ModelSpec model;
    model.intensity.kind = IntensitySpec::Kind::Affine;
    model.intensity.lambda = kLambda;

    // Bathtub hazard, expressed piecewise in the sojourn age through gates:
    //   a <  0.5 : 1.5 exp(-3a)
    //   a <  5   : 0.2
    //   a >= 5   : 0.2 + 0.3 (a - 5)  ==  0.3 a - 1.3
    RateEntry replace01;
    replace01.from_mode = 0;
    replace01.to_mode = 1;
    replace01.cap = kCap;
    {
        FunctionalTerm early;
        early.kind = TermKind::AgeExpDecay;
        early.coeff = kEarlyCoeff;
        early.decay_rate = kEarlyDecay;
        early.gate = AgeGate{0.0, kEarlyEnd};
        FunctionalTerm mid = constant_term(kMidRate);
        mid.gate = AgeGate{kEarlyEnd, kMidEnd};
        FunctionalTerm wear_base = constant_term(kWearBase - kWearSlope * kMidEnd);
        wear_base.gate = AgeGate{kMidEnd, std::numeric_limits<double>::infinity()};
        FunctionalTerm wear_slope;
        wear_slope.kind = TermKind::Age;
        wear_slope.coeff = kWearSlope;
        wear_slope.gate = AgeGate{kMidEnd, std::numeric_limits<double>::infinity()};
        replace01.terms = {early, mid, wear_base, wear_slope};
    }
    RateEntry replace10;
    replace10.from_mode = 1;
    replace10.to_mode = 0;
    replace10.cap = kCap;
    {
        FunctionalTerm slope;
        slope.kind = TermKind::Age;
        slope.coeff = kRepairSlope;
        replace10.terms = {constant_term(kRepairBase), slope};
    }
    model.intensity.entries = {replace01, replace10};

    std::map<int, AffineModeSpec> modes;
    modes[0] = {{{0.0, kDrift0}}, {{0.0, kSigma}}, std::nullopt};
    modes[1] = {{{0.0, kDrift1}}, {{0.0, kSigma}}, std::nullopt};
    model.dynamics = make_affine_dynamics(modes, 1);
    model.micro.kind = MicroSelector::Kind::Euler;
    model.initial = {0, {kX0}};
    return model;
}

ModelSpec build_levy_financial() {
    using namespace levy;
    ModelSpec model;
    model.intensity.kind = IntensitySpec::Kind::Affine;
    model.intensity.lambda = kLambda;

    auto jump_term = [](double coeff, JumpSign sign) {
        FunctionalTerm t;
        t.kind = TermKind::JumpCount;
        t.coeff = coeff;
        t.threshold = kThreshold;
        t.window = kWindow;
        t.sign = sign;
        t.relative = true;
        return t;
    };
    RateEntry to_bear;
    to_bear.from_mode = 0;
    to_bear.to_mode = 1;
    to_bear.cap = kCap;
    to_bear.terms = {constant_term(kBase01), jump_term(kSlope01, JumpSign::Minus)};
    RateEntry to_bull;
    to_bull.from_mode = 1;
    to_bull.to_mode = 0;
    to_bull.cap = kCap;
    to_bull.terms = {constant_term(kBase10), jump_term(kSlope10, JumpSign::Plus)};
    model.intensity.entries = {to_bear, to_bull};

    std::map<int, AffineModeSpec> modes;
    modes[0] = {{{kBullDrift, 0.0}}, {{0.0, kSigma}}, {{{1.0, 0.0}}}};
    modes[1] = {{{kBearDrift, 0.0}}, {{0.0, kSigma}}, {{{1.0, 0.0}}}};
    model.dynamics = make_affine_dynamics(modes, 1);
    model.micro.kind = MicroSelector::Kind::JumpEuler;
    model.initial = {0, {kX0}};
    model.cp_streams = {{kCpRate, kCpPUp, kCpMeanUp, kCpMeanDown}};
    return model;
}

ModelSpec build_reinforcement() {
    using namespace reinforcement;
    ModelSpec model;
    model.intensity.kind = IntensitySpec::Kind::Softmax;
    model.intensity.lambda = kLambda;

    auto count_term = [](double coeff, int from, int to) {
        FunctionalTerm t;
        t.kind = TermKind::TransitionCount;
        t.coeff = coeff;
        t.mode_a = from;
        t.mode_b = to;
        return t;
    };
    auto occupation_term = [](double coeff, int mode) {
        FunctionalTerm t;
        t.kind = TermKind::ModeOccupation;
        t.coeff = coeff;
        t.mode_a = mode;
        return t;
    };
    RateEntry theta01;
    theta01.from_mode = 0;
    theta01.to_mode = 1;
    theta01.terms = {constant_term(kBase01), count_term(kCnt01, 0, 1),
                     occupation_term(-kLoc0, 0)};
    RateEntry theta10;
    theta10.from_mode = 1;
    theta10.to_mode = 0;
    theta10.terms = {constant_term(kBase10), count_term(kCnt10, 1, 0),
                     occupation_term(-kLoc1, 1)};
    model.intensity.entries = {theta01, theta10};

    std::map<int, AffineModeSpec> modes;
    modes[0] = {{{0.0, 0.0}}, {{0.0, 0.0}}, std::nullopt};
    modes[1] = {{{0.0, 0.0}}, {{0.0, 0.0}}, std::nullopt};
    model.dynamics = make_affine_dynamics(modes, 1);
    model.micro.kind = MicroSelector::Kind::Euler;
    model.initial = {0, {0.0}};
    return model;
}

ModelSpec build_scenario(ScenarioId id) {
    switch (id) {
        case ScenarioId::Insurance: return build_insurance();
        case ScenarioId::Reliability: return build_reliability();
        case ScenarioId::LevyFinancial: return build_levy_financial();
        case ScenarioId::Reinforcement: return build_reinforcement();
    }
    return build_insurance();
}

double scenario_default_horizon(ScenarioId id) {
    switch (id) {
        case ScenarioId::Insurance: return insurance::kHorizon;
        case ScenarioId::Reliability: return reliability::kHorizon;
        case ScenarioId::LevyFinancial: return levy::kHorizon;
        case ScenarioId::Reinforcement: return reinforcement::kHorizon;
    }
    return 10.0;
}

std::uint64_t scenario_default_level(ScenarioId id) {
    (void)id;
    return 1024;
}

namespace {

std::vector<double> indicator_times(const HybridPath& path) {
    std::set<double> times;
    times.insert(0.0);
    times.insert(path.horizon);
    for (const Segment& seg : path.segments)
        for (double t : seg.grid_times) times.insert(t);
    for (const auto& ev : path.discrete_events) times.insert(ev.time);
    for (const auto& j : path.euclid_jumps) times.insert(j.time);
    return {times.begin(), times.end()};
}

void write_indicators_csv(ScenarioId id, const ModelSpec& model, const HybridPath& path,
                          const std::string& file) {
    const std::vector<double> times = indicator_times(path);
    switch (id) {
        case ScenarioId::Insurance: {
            CsvWriter w(file, "indicators", {"time", "occupation", "drawdown"});
            for (double t : times) {
                w.cell(t);
                w.cell(occupation_time(path, t, insurance::kBarrier, insurance::kWindow));
                w.cell(drawdown(path, t));
                w.end_row();
            }
            w.close();
            break;
        }
        case ScenarioId::Reliability: {
            CsvWriter w(file, "indicators", {"time", "age", "rate_0_to_1", "rate_1_to_0"});
            for (double t : times) {
                w.cell(t);
                w.cell(sojourn_age(path, t));
                w.cell(pair_rate(model.intensity, 0, 1, t, path));
                w.cell(pair_rate(model.intensity, 1, 0, t, path));
                w.end_row();
            }
            w.close();
            break;
        }
        case ScenarioId::LevyFinancial: {
            CsvWriter w(file, "indicators", {"time", "jumps_up", "jumps_down"});
            for (double t : times) {
                w.cell(t);
                w.cell(jump_count(path, t, levy::kThreshold, levy::kWindow, JumpSign::Plus, true));
                w.cell(jump_count(path, t, levy::kThreshold, levy::kWindow, JumpSign::Minus, true));
                w.end_row();
            }
            w.close();
            break;
        }
        case ScenarioId::Reinforcement: {
            CsvWriter w(file, "indicators",
                        {"time", "time_in_mode_0", "time_in_mode_1", "count_0_to_1",
                         "count_1_to_0", "rate_0_to_1", "rate_1_to_0"});
            for (double t : times) {
                w.cell(t);
                w.cell(occupation_by_mode(path, t, 0));
                w.cell(occupation_by_mode(path, t, 1));
                w.cell(transition_count(path, t, 0, 1));
                w.cell(transition_count(path, t, 1, 0));
                w.cell(pair_rate(model.intensity, 0, 1, t, path));
                w.cell(pair_rate(model.intensity, 1, 0, t, path));
                w.end_row();
            }
            w.close();
            break;
        }
    }
}

void write_plot_script(const std::string& file) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw IoError("run_scenario: cannot open " + file);
    os << R"PY(#!/usr/bin/env python3
"""Plots the path, mode trajectory, and driving indicators of one run.

Reads path.csv / indicators.csv from the directory this script lives in.
Requires matplotlib.
"""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(name):
    here = os.path.dirname(os.path.abspath(__file__))
    with open(os.path.join(here, name)) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    return rows


def main():
    path = read_csv("path.csv")
    indicators = read_csv("indicators.csv")
    post = [r for r in path if r["side"] == "post"]
    t = [float(r["time"]) for r in post]
    x = [float(r["x_1"]) for r in post]
    mode = [int(r["mode"]) for r in post]

    ind_t = [float(r["time"]) for r in indicators]
    ind_cols = [c for c in indicators[0].keys() if c != "time"]

    fig, axes = plt.subplots(3, 1, figsize=(9, 8), sharex=True)
    axes[0].step(t, x, where="post", lw=0.8)
    axes[0].set_ylabel("x")
    axes[1].step(t, mode, where="post", color="tab:red")
    axes[1].set_ylabel("mode")
    for col in ind_cols:
        axes[2].step(ind_t, [float(r[col]) for r in indicators], where="post", label=col, lw=0.8)
    axes[2].legend(loc="best", fontsize=8)
    axes[2].set_xlabel("time")
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "plot.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    sys.exit(main())
)PY";
    if (!os) throw IoError("run_scenario: write failure on " + file);
}

} // namespace

ScenarioOutputs run_scenario(const ScenarioConfig& config) {
    const ModelSpec model = build_scenario(config.id);
    const double horizon =
        config.horizon > 0.0 ? config.horizon : scenario_default_horizon(config.id);
    const std::uint64_t level =
        config.level_n > 0 ? config.level_n : scenario_default_level(config.id);

    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw IoError("run_scenario: cannot create directory " + config.output_dir);

    const NoiseTape tape = generate_tape(config.seed, horizon, level, model.lambda(),
                                         model.cp_streams, tape_brownian_dim(model));
    const SimulationResult result = simulate(model, horizon, level, tape);

    const std::string dir = config.output_dir;
    write_path_csv(result.path, dir + "/path.csv");
    write_audit_csv(result.audit, dir + "/audit.csv");
    write_indicators_csv(config.id, model, result.path, dir + "/indicators.csv");
    write_plot_script(dir + "/plot.py");

    RunManifest manifest;
    manifest.command = "scenario " + scenario_name(config.id);
    manifest.seed = config.seed;
    manifest.config["scenario"] = scenario_name(config.id);
    manifest.config["horizon_time_units"] = horizon;
    manifest.config["level_n"] = level;
    manifest.config["seed"] = config.seed;
    manifest.config["parameters"] = nlohmann::json::array();
    for (const ScenarioParameter& p : scenario_parameter_table(config.id)) {
        manifest.config["parameters"].push_back(
            {{"name", p.name}, {"value", p.value}, {"source", p.published ? "published" : "default"}});
    }
    manifest.output_files = {"path.csv", "audit.csv", "indicators.csv", "plot.py"};
    write_manifest(manifest, dir);

    ScenarioOutputs out;
    out.files = manifest.output_files;
    out.files.push_back("manifest.json");
    return out;
}

} // namespace hybridsim
