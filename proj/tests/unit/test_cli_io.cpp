#include "hybridsim/commands.hpp"

#include "hybridsim/config.hpp"
#include "hybridsim/csv.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/manifest.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace hybridsim;

namespace {

const char* kMinimalConfig = R"JSON({
  "model": {
    "p_dim": 1,
    "lambda_per_unit_time": 2.0,
    "initial": {"mode": 0, "position": [1.0]},
    "dynamics": {
      "micro": "euler",
      "modes": {
        "0": {"drift": [{"a": 0.0, "b": 0.1}], "diffusion": [{"a": 0.0, "b": 0.2}]},
        "1": {"drift": [{"a": 0.0, "b": -0.1}], "diffusion": [{"a": 0.0, "b": 0.2}]}
      }
    },
    "intensity": {
      "kind": "affine",
      "entries": [
        {"from": 0, "to": 1, "terms": [{"kind": "constant", "coeff": 0.3}]},
        {"from": 1, "to": 0, "terms": [{"kind": "constant", "coeff": 0.7}]}
      ]
    }
  },
  "run": {"horizon_time_units": 1.0, "level_n": 64, "seed": 9, "output_dir": "OUTDIR"}
})JSON";

std::string write_config(const std::string& file, const std::string& outdir,
                         const std::string& body = kMinimalConfig) {
    std::string text = body;
    const auto pos = text.find("OUTDIR");
    if (pos != std::string::npos) text.replace(pos, 6, outdir);
    std::ofstream os(file, std::ios::trunc);
    os << text;
    os.close();
    return file;
}

} // namespace

TEST_SUITE("cli_io") {

TEST_CASE("config round-trips through its canonical JSON form") {
    const std::string dir = "cli_unit_rt";
    std::filesystem::remove_all(dir);
    write_config("cli_rt_config.json", dir);
    const SimulationConfig config = load_config("cli_rt_config.json");
    const nlohmann::json doc = to_json(config);
    const SimulationConfig back = config_from_json(doc);
    CHECK(back == config);
    CHECK(to_json(back) == doc);
    std::filesystem::remove("cli_rt_config.json");
}

TEST_CASE("config round-trip covers every term kind and softmax") {
    SimulationConfig config;
    config.model.p = 1;
    config.model.lambda = 2.0;
    config.model.initial = {0, {1.0}};
    config.model.micro = "jump_euler";
    AffineModeSpec mode;
    mode.drift = {{0.1, 0.0}};
    mode.diffusion = {{0.0, 1.0}};
    mode.jump_coeff = {{{1.0, 0.0}}};
    config.model.modes[0] = mode;
    config.model.modes[1] = mode;
    config.model.cp_streams = {{0.5, 0.4, 0.18, 0.22}};
    config.model.intensity.kind = IntensitySpec::Kind::Softmax;
    config.model.intensity.lambda = 2.0;
    RateEntry entry{0, 1, {}, true, std::nullopt};
    for (TermKind kind :
         {TermKind::Constant, TermKind::Occupation, TermKind::DrawdownIndicator, TermKind::Age,
          TermKind::AgeExpDecay, TermKind::JumpCount, TermKind::ModeOccupation,
          TermKind::TransitionCount}) {
        FunctionalTerm t;
        t.kind = kind;
        t.coeff = 0.5;
        t.barrier = 1.0;
        t.window = 1.0;
        t.threshold = 0.25;
        t.decay_rate = 3.0;
        t.sign = JumpSign::Minus;
        t.relative = true;
        t.mode_b = 1;
        if (kind == TermKind::Age) t.gate = AgeGate{0.5, 5.0};
        if (kind == TermKind::AgeExpDecay)
            t.gate = AgeGate{0.0, std::numeric_limits<double>::infinity()};
        entry.terms.push_back(t);
    }
    config.model.intensity.entries = {entry};

    const nlohmann::json doc = to_json(config);
    const SimulationConfig back = config_from_json(doc);
    // Canonical serialization drops fields a term kind does not use, so
    // compare through a second serialization.
    CHECK(to_json(back) == doc);
}

TEST_CASE("cmd_simulate writes three files and exits zero") {
    const std::string dir = "cli_unit_sim";
    std::filesystem::remove_all(dir);
    write_config("cli_sim_config.json", dir);
    CHECK(cmd_simulate("cli_sim_config.json") == kExitOk);
    CHECK(std::filesystem::exists(dir + "/path.csv"));
    CHECK(std::filesystem::exists(dir + "/audit.csv"));
    CHECK(std::filesystem::exists(dir + "/manifest.json"));

    // Schema version header on every CSV.
    for (const char* f : {"/path.csv", "/audit.csv"}) {
        std::ifstream is(dir + f);
        std::string line;
        std::getline(is, line);
        CHECK(line.rfind(kCsvSchemaPrefix, 0) == 0);
    }

    // The manifest hashes match the files on disk.
    std::ifstream mis(dir + "/manifest.json");
    nlohmann::json manifest;
    mis >> manifest;
    for (const auto& out : manifest.at("outputs"))
        CHECK(out.at("fnv1a64").get<std::string>() ==
              file_hash_hex(dir + "/" + out.at("file").get<std::string>()));
    std::filesystem::remove("cli_sim_config.json");
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_simulate exit codes") {
    CHECK(cmd_simulate("missing_config.json") == kExitConfig);

    // lambda below the achievable rate out of the initial mode: the first
    // atom's rate evaluation violates the bound.
    const std::string dir = "cli_unit_bound";
    std::filesystem::remove_all(dir);
    std::string bad = kMinimalConfig;
    const auto lpos = bad.find("\"lambda_per_unit_time\": 2.0");
    bad.replace(lpos, 27, "\"lambda_per_unit_time\": 0.2");
    const auto hpos = bad.find("\"horizon_time_units\": 1.0");
    bad.replace(hpos, 25, "\"horizon_time_units\": 60.0");
    write_config("cli_bound_config.json", dir, bad);
    CHECK(cmd_simulate("cli_bound_config.json") == kExitBound);
    std::filesystem::remove("cli_bound_config.json");
    std::filesystem::remove_all(dir);

    // Unparseable JSON.
    {
        std::ofstream os("cli_broken_config.json");
        os << "{ not json";
    }
    CHECK(cmd_simulate("cli_broken_config.json") == kExitConfig);
    std::filesystem::remove("cli_broken_config.json");
}

TEST_CASE("cmd_scenario validates the name and writes outputs") {
    const std::string dir = "cli_unit_scen";
    std::filesystem::remove_all(dir);
    CHECK(cmd_scenario("unknown_name", 1, 0.0, 0, dir) == kExitConfig);
    CHECK(cmd_scenario("insurance", 1, 2.0, 64, dir) == kExitOk);
    for (const char* f : {"path.csv", "audit.csv", "indicators.csv", "plot.py", "manifest.json"})
        CHECK(std::filesystem::exists(dir + "/" + std::string(f)));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_scenario reruns are byte-identical") {
    const std::string dir = "cli_unit_det";
    std::filesystem::remove_all(dir);
    REQUIRE(cmd_scenario("levy_financial", 12, 3.0, 64, dir) == kExitOk);
    const std::string h_path = file_hash_hex(dir + "/path.csv");
    const std::string h_audit = file_hash_hex(dir + "/audit.csv");
    const std::string h_ind = file_hash_hex(dir + "/indicators.csv");
    REQUIRE(cmd_scenario("levy_financial", 12, 3.0, 64, dir) == kExitOk);
    CHECK(file_hash_hex(dir + "/path.csv") == h_path);
    CHECK(file_hash_hex(dir + "/audit.csv") == h_audit);
    CHECK(file_hash_hex(dir + "/indicators.csv") == h_ind);
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_converge needs at least three levels and writes a report") {
    const std::string dir = "cli_unit_conv";
    std::filesystem::remove_all(dir);
    write_config("cli_conv_config.json", dir);

    ConvergeOptions two;
    two.levels = {16, 32};
    two.n_fine = 256;
    two.paths = 4;
    CHECK(cmd_converge("cli_conv_config.json", two) == kExitConfig);

    ConvergeOptions ok;
    ok.levels = {16, 32, 64};
    ok.n_fine = 256;
    ok.paths = 12;
    ok.seed = 77;
    CHECK(cmd_converge("cli_conv_config.json", ok) == kExitOk);
    CHECK(std::filesystem::exists(dir + "/report.csv"));
    CHECK(std::filesystem::exists(dir + "/summary.txt"));
    CHECK(std::filesystem::exists(dir + "/manifest.json"));

    // The summary carries the trend verdicts.
    std::ifstream is(dir + "/summary.txt");
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CHECK(text.find("fitted log2 slope") != std::string::npos);
    CHECK(text.find("decoupling frequency non-increasing") != std::string::npos);
    std::filesystem::remove("cli_conv_config.json");
    std::filesystem::remove_all(dir);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -0.0, 2.0}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

} // TEST_SUITE
