#include "hybridsim/scenarios.hpp"

#include "hybridsim/csv.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/path_functionals.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

using namespace hybridsim;

namespace {

std::map<std::string, double> table_map(ScenarioId id) {
    std::map<std::string, double> out;
    for (const auto& p : scenario_parameter_table(id)) out[p.name] = p.value;
    return out;
}

bool is_published(ScenarioId id, const std::string& name) {
    for (const auto& p : scenario_parameter_table(id))
        if (p.name == name) return p.published;
    FAIL("unknown parameter ", name);
    return false;
}

// Constant-mode, constant-value history used to probe rate formulas.
HybridPath probe_path(int mode, double value, double horizon = 10.0) {
    return test::mode_path(horizon, mode, {}, value);
}

std::vector<std::vector<double>> read_csv_numeric(const std::string& file,
                                                  std::vector<std::string>* header = nullptr) {
    std::ifstream is(file);
    REQUIRE(is);
    std::string line;
    std::getline(is, line); // schema
    REQUIRE(line.rfind(kCsvSchemaPrefix, 0) == 0);
    std::getline(is, line); // header
    if (header) {
        header->clear();
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                header->push_back(cur);
                cur.clear();
            } else
                cur += c;
        }
        header->push_back(cur);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::string cur;
        auto flush = [&] {
            row.push_back(cur == "pre" ? 0.0 : cur == "post" ? 1.0 : std::stod(cur));
            cur.clear();
        };
        for (char c : line) {
            if (c == ',')
                flush();
            else
                cur += c;
        }
        flush();
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

TEST_SUITE("scenarios") {

TEST_CASE("scenario names round-trip") {
    for (ScenarioId id : {ScenarioId::Insurance, ScenarioId::Reliability,
                          ScenarioId::LevyFinancial, ScenarioId::Reinforcement})
        CHECK(scenario_from_name(scenario_name(id)) == id);
    CHECK_THROWS_AS(scenario_from_name("nope"), ConfigError);
}

TEST_CASE("insurance parameter table pins the published constants") {
    const auto t = table_map(ScenarioId::Insurance);
    CHECK(t.at("drift_calm_a") == 0.08);
    CHECK(t.at("drift_calm_b") == 0.02);
    CHECK(t.at("sigma_calm") == 0.08);
    CHECK(t.at("drift_stressed_a") == -0.03);
    CHECK(t.at("drift_stressed_b") == 0.01);
    CHECK(t.at("sigma_stressed") == 0.20);
    CHECK(t.at("alpha_01") == 0.2);
    CHECK(t.at("beta_01") == -0.5);
    CHECK(t.at("gamma_01") == 3.0);
    CHECK(t.at("alpha_10") == 0.3);
    CHECK(t.at("beta_10") == 2.0);
    CHECK(t.at("gamma_10") == -2.0);
    CHECK(t.at("occupation_barrier") == 1.0);
    CHECK(t.at("occupation_window") == 1.0);
    CHECK(t.at("drawdown_threshold") == 0.25);
    CHECK(t.at("x0") == 0.9);
    for (const char* name : {"drift_calm_a", "alpha_01", "x0", "drawdown_threshold"})
        CHECK(is_published(ScenarioId::Insurance, name));
    // The uniformization bound is an artifact default dominating the largest
    // reachable rate 0.2 + 3.0 = 3.2.
    CHECK(t.at("lambda") == 4.0);
    CHECK(!is_published(ScenarioId::Insurance, "lambda"));
}

TEST_CASE("reliability parameter table pins the published constants") {
    const auto t = table_map(ScenarioId::Reliability);
    CHECK(t.at("hazard01_early_coeff") == 1.5);
    CHECK(t.at("hazard01_early_decay") == 3.0);
    CHECK(t.at("hazard01_early_end") == 0.5);
    CHECK(t.at("hazard01_mid_rate") == 0.2);
    CHECK(t.at("hazard01_mid_end") == 5.0);
    CHECK(t.at("hazard01_wear_base") == 0.2);
    CHECK(t.at("hazard01_wear_slope") == 0.3);
    CHECK(t.at("hazard10_base") == 0.3);
    CHECK(t.at("hazard10_slope") == 0.25);
    CHECK(t.at("hazard_cap") == 2.0);
    CHECK(t.at("lambda") == 2.0);
    CHECK(is_published(ScenarioId::Reliability, "lambda"));
    CHECK(!is_published(ScenarioId::Reliability, "sigma"));
}

TEST_CASE("levy parameter table pins the published constants") {
    const auto t = table_map(ScenarioId::LevyFinancial);
    CHECK(t.at("drift_bull_a") == 0.15);
    CHECK(t.at("drift_bear_a") == -0.10);
    CHECK(t.at("sigma") == 1.0);
    CHECK(t.at("rate01_base") == 0.1);
    CHECK(t.at("rate01_per_crash") == 0.8);
    CHECK(t.at("rate10_base") == 0.1);
    CHECK(t.at("rate10_per_rally") == 0.6);
    CHECK(t.at("rate_cap") == 2.0);
    CHECK(t.at("jump_threshold") == 0.15);
    CHECK(t.at("jump_window") == 1.0);
    CHECK(!is_published(ScenarioId::LevyFinancial, "cp_rate"));
    CHECK(!is_published(ScenarioId::LevyFinancial, "lambda"));
}

TEST_CASE("reinforcement parameter table pins the published constants") {
    const auto t = table_map(ScenarioId::Reinforcement);
    CHECK(t.at("theta01_base") == 0.0);
    CHECK(t.at("theta01_per_count") == 0.25);
    CHECK(t.at("theta01_per_occupation") == 0.005);
    CHECK(t.at("theta10_base") == 0.2);
    CHECK(t.at("theta10_per_count") == 0.20);
    CHECK(t.at("theta10_per_occupation") == 0.008);
    CHECK(t.at("lambda") == 2.0);
    CHECK(is_published(ScenarioId::Reinforcement, "lambda"));
}

TEST_CASE("insurance rate formula spot checks") {
    const ModelSpec model = build_insurance();
    CHECK(model.lambda() == 4.0);
    // Occupation 0, drawdown beyond threshold, calm mode: 0.2 + 3.0.
    HybridPath crash = test::held_path({{0.0, 0.9}, {1.0, 0.5}, {10.0, 0.5}});
    CHECK(pair_rate(model.intensity, 0, 1, 9.0, crash) == doctest::Approx(3.2));
    // Occupation 1 (full window above the barrier), drawdown below threshold.
    HybridPath high = probe_path(1, 1.5);
    CHECK(pair_rate(model.intensity, 1, 0, 9.0, high) == doctest::Approx(2.3));
    // Occupation 1 with a deep drawdown: 0.3 + 2.0 - 2.0.
    HybridPath high_dd = test::held_path({{0.0, 2.0}, {5.0, 1.5}, {10.0, 1.5}});
    CHECK(pair_rate(model.intensity, 1, 0, 9.0, high_dd) == doctest::Approx(0.3));
    // Occupation 1, no drawdown, calm mode: max(0, 0.2 - 0.5) = 0.
    CHECK(pair_rate(model.intensity, 0, 1, 9.0, high) == 0.0);
}

TEST_CASE("reliability hazard spot checks") {
    const ModelSpec model = build_reliability();
    // Age a is the elapsed time on an eventless path, so probe at t = a.
    HybridPath path = probe_path(0, 1.0, 20.0);
    CHECK(pair_rate(model.intensity, 0, 1, 1e-12, path) == doctest::Approx(1.5)); // a ~ 0
    CHECK(pair_rate(model.intensity, 0, 1, 0.25, path) ==
          doctest::Approx(1.5 * std::exp(-3.0 * 0.25)));
    CHECK(pair_rate(model.intensity, 0, 1, 0.5, path) == doctest::Approx(0.2)); // boundary
    CHECK(pair_rate(model.intensity, 0, 1, 3.0, path) == doctest::Approx(0.2));
    CHECK(pair_rate(model.intensity, 0, 1, 10.0, path) == doctest::Approx(1.7));
    CHECK(pair_rate(model.intensity, 0, 1, 16.0, path) == doctest::Approx(2.0)); // cap binds
    CHECK(pair_rate(model.intensity, 1, 0, 8.0, path) == doctest::Approx(2.0));  // 0.3+2.0 capped
    CHECK(pair_rate(model.intensity, 1, 0, 4.0, path) == doctest::Approx(1.3));
}

TEST_CASE("levy rate formula spot checks") {
    const ModelSpec model = build_levy_financial();
    HybridPath calm = probe_path(0, 1.0);
    CHECK(pair_rate(model.intensity, 0, 1, 5.0, calm) == doctest::Approx(0.1));

    // Three crashes inside the window: 0.1 + 0.8 * 3 capped at 2.0.
    HybridPath crashes = probe_path(0, 1.0);
    crashes.euclid_jumps = {{4.2, {1.0}, {0.8}}, {4.5, {1.0}, {0.8}}, {4.8, {1.0}, {0.8}}};
    CHECK(pair_rate(model.intensity, 0, 1, 5.0, crashes) == doctest::Approx(2.0));

    // Two rallies: 0.1 + 0.6 * 2.
    HybridPath rallies = probe_path(1, 1.0);
    rallies.euclid_jumps = {{4.2, {1.0}, {1.2}}, {4.5, {1.0}, {1.2}}};
    CHECK(pair_rate(model.intensity, 1, 0, 5.0, rallies) == doctest::Approx(1.3));
}

TEST_CASE("reinforcement rate formula spot checks") {
    const ModelSpec model = build_reinforcement();
    // At t -> 0 both counters vanish: q01 = 2 e^0 / (1 + e^0) = 1.
    HybridPath fresh = probe_path(0, 0.0, 20.0);
    CHECK(pair_rate(model.intensity, 0, 1, 1e-12, fresh) == doctest::Approx(1.0));

    // Four completed 0->1 transitions and negligible occupation: theta = 1.
    HybridPath cycled = test::mode_path(
        20.0, 0, {{0.1, 1}, {0.2, 0}, {0.3, 1}, {0.4, 0}, {0.5, 1}, {0.6, 0}, {0.7, 1}, {0.8, 0}});
    const double q = pair_rate(model.intensity, 0, 1, 0.9, cycled);
    const double theta = 0.25 * 4 - 0.005 * occupation_by_mode(cycled, 0.9, 0);
    CHECK(q == doctest::Approx(2.0 * std::exp(theta) / (1.0 + std::exp(theta))));
    CHECK(q < 2.0);
}

TEST_CASE("run_scenario emits the documented files") {
    const std::string dir = "scenario_unit_out";
    std::filesystem::remove_all(dir);
    ScenarioConfig config;
    config.id = ScenarioId::Reliability;
    config.seed = 2;
    config.horizon = 6.0;
    config.level_n = 64;
    config.output_dir = dir;
    const ScenarioOutputs out = run_scenario(config);
    CHECK(out.files == std::vector<std::string>{"path.csv", "audit.csv", "indicators.csv",
                                                "plot.py", "manifest.json"});
    for (const std::string& f : out.files)
        CHECK(std::filesystem::exists(dir + "/" + f));

    // Age column is a sawtooth: resets after every real jump in the audit.
    std::vector<std::string> header;
    const auto rows = read_csv_numeric(dir + "/indicators.csv", &header);
    REQUIRE(header == std::vector<std::string>{"time", "age", "rate_0_to_1", "rate_1_to_0"});
    const HybridPath path = load_path_csv(dir + "/path.csv");
    // Every column recomputes from the reloaded path.
    const ModelSpec model = build_reliability();
    for (const auto& row : rows) {
        CHECK(row[1] == doctest::Approx(sojourn_age(path, row[0])).epsilon(1e-12));
        CHECK(row[2] ==
              doctest::Approx(pair_rate(model.intensity, 0, 1, row[0], path)).epsilon(1e-12));
        CHECK(row[3] ==
              doctest::Approx(pair_rate(model.intensity, 1, 0, row[0], path)).epsilon(1e-12));
    }
    for (const auto& ev : path.discrete_events) {
        bool found_reset = false;
        for (const auto& row : rows) {
            if (row[0] > ev.time && row[0] < ev.time + 0.5) {
                CHECK(row[1] == doctest::Approx(row[0] - ev.time));
                found_reset = true;
                break;
            }
        }
        if (ev.time + 0.5 < 6.0) CHECK(found_reset);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("insurance indicators are nonnegative and recomputable") {
    const std::string dir = "scenario_unit_ins";
    std::filesystem::remove_all(dir);
    ScenarioConfig config;
    config.id = ScenarioId::Insurance;
    config.seed = 4;
    config.horizon = 3.0;
    config.level_n = 128;
    config.output_dir = dir;
    run_scenario(config);

    const HybridPath path = load_path_csv(dir + "/path.csv");
    const auto rows = read_csv_numeric(dir + "/indicators.csv");
    REQUIRE(!rows.empty());
    for (const auto& row : rows) {
        const double t = row[0];
        CHECK(row[1] == doctest::Approx(occupation_time(path, t, 1.0, 1.0)).epsilon(1e-12));
        CHECK(row[2] == doctest::Approx(drawdown(path, t)).epsilon(1e-12));
        CHECK(row[2] >= 0.0);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("reinforcement indicators stay strictly below the bound") {
    const std::string dir = "scenario_unit_reinf";
    std::filesystem::remove_all(dir);
    ScenarioConfig config;
    config.id = ScenarioId::Reinforcement;
    config.seed = 6;
    config.horizon = 20.0;
    config.level_n = 16;
    config.output_dir = dir;
    run_scenario(config);
    const auto rows = read_csv_numeric(dir + "/indicators.csv");
    const HybridPath path = load_path_csv(dir + "/path.csv");
    const ModelSpec model = build_reinforcement();
    for (const auto& row : rows) {
        CHECK(row[5] < 2.0);
        CHECK(row[6] < 2.0);
        // Columns recompute from the reloaded path.
        CHECK(row[1] == doctest::Approx(occupation_by_mode(path, row[0], 0)).epsilon(1e-12));
        CHECK(row[2] == doctest::Approx(occupation_by_mode(path, row[0], 1)).epsilon(1e-12));
        CHECK(row[3] == transition_count(path, row[0], 0, 1));
        CHECK(row[4] == transition_count(path, row[0], 1, 0));
        CHECK(row[5] ==
              doctest::Approx(pair_rate(model.intensity, 0, 1, row[0], path)).epsilon(1e-12));
        CHECK(row[6] ==
              doctest::Approx(pair_rate(model.intensity, 1, 0, row[0], path)).epsilon(1e-12));
    }
    // Occupation columns partition elapsed time.
    const auto& last = rows.back();
    CHECK(last[1] + last[2] == doctest::Approx(last[0]));
    std::filesystem::remove_all(dir);
}

TEST_CASE("levy indicators recompute from the path CSV") {
    const std::string dir = "scenario_unit_levy";
    std::filesystem::remove_all(dir);
    ScenarioConfig config;
    config.id = ScenarioId::LevyFinancial;
    config.seed = 8;
    config.horizon = 5.0;
    config.level_n = 64;
    config.output_dir = dir;
    run_scenario(config);
    const HybridPath path = load_path_csv(dir + "/path.csv");
    const auto rows = read_csv_numeric(dir + "/indicators.csv");
    for (const auto& row : rows) {
        const double t = row[0];
        CHECK(row[1] == jump_count(path, t, 0.15, 1.0, JumpSign::Plus, true));
        CHECK(row[2] == jump_count(path, t, 0.15, 1.0, JumpSign::Minus, true));
    }
    std::filesystem::remove_all(dir);
}

} // TEST_SUITE
