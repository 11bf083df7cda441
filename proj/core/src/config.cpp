#include "hybridsim/config.hpp"

#include "hybridsim/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace hybridsim {

using nlohmann::json;

namespace {

const char* term_kind_name(TermKind k) {
    switch (k) {
        case TermKind::Constant: return "constant";
        case TermKind::Occupation: return "occupation";
        case TermKind::DrawdownIndicator: return "drawdown_indicator";
        case TermKind::Age: return "age";
        case TermKind::AgeExpDecay: return "age_exp_decay";
        case TermKind::JumpCount: return "jump_count";
        case TermKind::ModeOccupation: return "mode_occupation";
        case TermKind::TransitionCount: return "transition_count";
    }
    return "constant";
}

TermKind term_kind_from_name(const std::string& name) {
    if (name == "constant") return TermKind::Constant;
    if (name == "occupation") return TermKind::Occupation;
    if (name == "drawdown_indicator") return TermKind::DrawdownIndicator;
    if (name == "age") return TermKind::Age;
    if (name == "age_exp_decay") return TermKind::AgeExpDecay;
    if (name == "jump_count") return TermKind::JumpCount;
    if (name == "mode_occupation") return TermKind::ModeOccupation;
    if (name == "transition_count") return TermKind::TransitionCount;
    throw ConfigError("config: unknown functional term kind '" + name + "'");
}

json term_to_json(const FunctionalTerm& t) {
    json j;
    j["kind"] = term_kind_name(t.kind);
    j["coeff"] = t.coeff;
    switch (t.kind) {
        case TermKind::Constant:
        case TermKind::Age:
            break;
        case TermKind::Occupation:
            j["barrier"] = t.barrier;
            j["window_time"] = t.window;
            j["dim"] = t.dim;
            break;
        case TermKind::DrawdownIndicator:
            j["threshold"] = t.threshold;
            j["dim"] = t.dim;
            break;
        case TermKind::AgeExpDecay:
            j["decay_rate_per_unit_time"] = t.decay_rate;
            break;
        case TermKind::JumpCount:
            j["threshold"] = t.threshold;
            j["window_time"] = t.window;
            j["sign"] = t.sign == JumpSign::Plus ? "plus"
                        : t.sign == JumpSign::Minus ? "minus"
                                                    : "both";
            j["relative"] = t.relative;
            j["dim"] = t.dim;
            break;
        case TermKind::ModeOccupation:
            j["mode"] = t.mode_a;
            break;
        case TermKind::TransitionCount:
            j["from"] = t.mode_a;
            j["to"] = t.mode_b;
            break;
    }
    if (t.gate) {
        j["age_gate"]["lo"] = t.gate->lo;
        if (std::isfinite(t.gate->hi))
            j["age_gate"]["hi"] = t.gate->hi;
        else
            j["age_gate"]["hi"] = nullptr;
    }
    return j;
}

FunctionalTerm term_from_json(const json& j) {
    FunctionalTerm t;
    t.kind = term_kind_from_name(j.at("kind").get<std::string>());
    t.coeff = j.value("coeff", 1.0);
    switch (t.kind) {
        case TermKind::Constant:
        case TermKind::Age:
            break;
        case TermKind::Occupation:
            t.barrier = j.at("barrier").get<double>();
            t.window = j.at("window_time").get<double>();
            t.dim = j.value("dim", 0);
            break;
        case TermKind::DrawdownIndicator:
            t.threshold = j.at("threshold").get<double>();
            t.dim = j.value("dim", 0);
            break;
        case TermKind::AgeExpDecay:
            t.decay_rate = j.at("decay_rate_per_unit_time").get<double>();
            break;
        case TermKind::JumpCount: {
            t.threshold = j.at("threshold").get<double>();
            t.window = j.at("window_time").get<double>();
            const auto sign = j.value("sign", std::string("both"));
            if (sign == "plus")
                t.sign = JumpSign::Plus;
            else if (sign == "minus")
                t.sign = JumpSign::Minus;
            else if (sign == "both")
                t.sign = JumpSign::Both;
            else
                throw ConfigError("config: unknown jump sign '" + sign + "'");
            t.relative = j.value("relative", false);
            t.dim = j.value("dim", 0);
            break;
        }
        case TermKind::ModeOccupation:
            t.mode_a = j.at("mode").get<int>();
            break;
        case TermKind::TransitionCount:
            t.mode_a = j.at("from").get<int>();
            t.mode_b = j.at("to").get<int>();
            break;
    }
    if (j.contains("age_gate")) {
        AgeGate g;
        g.lo = j.at("age_gate").at("lo").get<double>();
        const auto& hi = j.at("age_gate").at("hi");
        g.hi = hi.is_null() ? std::numeric_limits<double>::infinity() : hi.get<double>();
        t.gate = g;
    }
    return t;
}

json affine_list_to_json(const std::vector<AffinePerDim>& coeffs) {
    json arr = json::array();
    for (const auto& c : coeffs) arr.push_back({{"a", c.a}, {"b", c.b}});
    return arr;
}

std::vector<AffinePerDim> affine_list_from_json(const json& arr) {
    std::vector<AffinePerDim> out;
    for (const auto& c : arr) out.push_back({c.at("a").get<double>(), c.at("b").get<double>()});
    return out;
}

} // namespace

json to_json(const SimulationConfig& config) {
    const ConfigModel& m = config.model;
    json j;
    j["schema_version"] = 1;
    json& jm = j["model"];
    jm["p_dim"] = m.p;
    jm["lambda_per_unit_time"] = m.lambda;
    jm["initial"] = {{"mode", m.initial.mode}, {"position", m.initial.position}};
    jm["constant_pre_history"] = m.constant_pre_history;
    json& jd = jm["dynamics"];
    jd["micro"] = m.micro;
    if (m.micro == "exact_gbm") jd["exact_gbm"] = {{"mu", m.gbm_mu}, {"sigma", m.gbm_sigma}};
    jd["modes"] = json::object();
    for (const auto& [mode, spec] : m.modes) {
        json js;
        js["drift"] = affine_list_to_json(spec.drift);
        js["diffusion"] = affine_list_to_json(spec.diffusion);
        if (spec.jump_coeff) js["jump_coeff"] = affine_list_to_json(*spec.jump_coeff);
        jd["modes"][std::to_string(mode)] = std::move(js);
    }
    json& ji = jm["intensity"];
    ji["kind"] = m.intensity.kind == IntensitySpec::Kind::Softmax ? "softmax" : "affine";
    ji["entries"] = json::array();
    for (const RateEntry& e : m.intensity.entries) {
        json je;
        je["from"] = e.from_mode;
        je["to"] = e.to_mode;
        je["clamp_at_zero"] = e.clamp_at_zero;
        if (e.cap) je["cap"] = *e.cap;
        je["terms"] = json::array();
        for (const FunctionalTerm& t : e.terms) je["terms"].push_back(term_to_json(t));
        ji["entries"].push_back(std::move(je));
    }
    jm["compound_poisson"] = json::array();
    for (const CompoundPoissonSpec& s : m.cp_streams) {
        jm["compound_poisson"].push_back({{"rate_per_unit_time", s.rate},
                                          {"p_up", s.p_up},
                                          {"mean_up", s.eta_up},
                                          {"mean_down", s.eta_down}});
    }
    j["run"] = {{"horizon_time_units", config.run.horizon},
                {"level_n", config.run.level_n},
                {"seed", config.run.seed},
                {"output_dir", config.run.output_dir},
                {"jobs", config.run.jobs}};
    return j;
}

SimulationConfig config_from_json(const json& doc) {
    try {
        SimulationConfig config;
        ConfigModel& m = config.model;
        const json& jm = doc.at("model");
        m.p = jm.value("p_dim", 1);
        m.lambda = jm.at("lambda_per_unit_time").get<double>();
        m.initial.mode = jm.at("initial").at("mode").get<int>();
        m.initial.position = jm.at("initial").at("position").get<std::vector<double>>();
        m.constant_pre_history = jm.value("constant_pre_history", false);
        const json& jd = jm.at("dynamics");
        m.micro = jd.value("micro", std::string("euler"));
        if (m.micro != "euler" && m.micro != "jump_euler" && m.micro != "exact_gbm")
            throw ConfigError("config: unknown micro-algorithm '" + m.micro + "'");
        if (m.micro == "exact_gbm") {
            m.gbm_mu = jd.at("exact_gbm").at("mu").get<double>();
            m.gbm_sigma = jd.at("exact_gbm").at("sigma").get<double>();
        }
        if (jd.contains("modes")) {
            for (const auto& [key, js] : jd.at("modes").items()) {
                AffineModeSpec spec;
                spec.drift = affine_list_from_json(js.at("drift"));
                spec.diffusion = affine_list_from_json(js.at("diffusion"));
                if (js.contains("jump_coeff"))
                    spec.jump_coeff = affine_list_from_json(js.at("jump_coeff"));
                m.modes[std::stoi(key)] = std::move(spec);
            }
        }
        const json& ji = jm.at("intensity");
        const auto kind = ji.value("kind", std::string("affine"));
        if (kind == "affine")
            m.intensity.kind = IntensitySpec::Kind::Affine;
        else if (kind == "softmax")
            m.intensity.kind = IntensitySpec::Kind::Softmax;
        else
            throw ConfigError("config: unknown intensity kind '" + kind + "'");
        m.intensity.lambda = m.lambda;
        for (const json& je : ji.value("entries", json::array())) {
            RateEntry e;
            e.from_mode = je.at("from").get<int>();
            e.to_mode = je.at("to").get<int>();
            e.clamp_at_zero = je.value("clamp_at_zero", true);
            if (je.contains("cap")) e.cap = je.at("cap").get<double>();
            for (const json& jt : je.value("terms", json::array()))
                e.terms.push_back(term_from_json(jt));
            m.intensity.entries.push_back(std::move(e));
        }
        for (const json& js : jm.value("compound_poisson", json::array())) {
            CompoundPoissonSpec s;
            s.rate = js.at("rate_per_unit_time").get<double>();
            s.p_up = js.value("p_up", 0.5);
            s.eta_up = js.value("mean_up", 1.0);
            s.eta_down = js.value("mean_down", 1.0);
            m.cp_streams.push_back(s);
        }
        if (doc.contains("run")) {
            const json& jr = doc.at("run");
            config.run.horizon = jr.value("horizon_time_units", 1.0);
            config.run.level_n = jr.value("level_n", std::uint64_t{256});
            config.run.seed = jr.value("seed", std::uint64_t{1});
            config.run.output_dir = jr.value("output_dir", std::string("out"));
            config.run.jobs = jr.value("jobs", 0u);
        }
        m.intensity.validate();
        for (const auto& s : m.cp_streams) s.validate();
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

SimulationConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config: parse failure in " + path + ": " + e.what());
    }
    return config_from_json(doc);
}

ModelSpec build_model(const ConfigModel& m) {
    ModelSpec model;
    model.intensity = m.intensity;
    model.intensity.lambda = m.lambda;
    model.initial = m.initial;
    model.constant_pre_history = m.constant_pre_history;
    model.cp_streams = m.cp_streams;
    if (m.micro == "exact_gbm") {
        model.micro = {MicroSelector::Kind::ExactGbm, m.gbm_mu, m.gbm_sigma};
        model.dynamics.p = 1;
        model.dynamics.brownian_dim = 1;
    } else {
        model.micro.kind = m.micro == "jump_euler" ? MicroSelector::Kind::JumpEuler
                                                   : MicroSelector::Kind::Euler;
        model.dynamics = make_affine_dynamics(m.modes, m.p);
    }
    model.validate();
    return model;
}

} // namespace hybridsim
