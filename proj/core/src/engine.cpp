#include "hybridsim/engine.hpp"

#include "hybridsim/convergence.hpp"
#include "hybridsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybridsim {

void ModelSpec::validate() const {
    intensity.validate();
    if (initial.position.empty()) throw ConfigError("model: initial position must have dimension >= 1");
    if (micro.kind != MicroSelector::Kind::ExactGbm) {
        if (static_cast<int>(initial.position.size()) != dynamics.p)
            throw ConfigError("model: initial state dimension differs from dynamics dimension");
        if (!dynamics.drift || !dynamics.diffusion)
            throw ConfigError("model: dynamics must define drift and diffusion");
        if (micro.kind == MicroSelector::Kind::JumpEuler && !dynamics.has_jumps())
            throw ConfigError("model: jump-adapted solver selected but dynamics have no jump coefficient");
        if (micro.kind == MicroSelector::Kind::Euler && dynamics.has_jumps())
            throw ConfigError("model: dynamics carry a jump coefficient; select the jump_euler solver");
    } else if (initial.position.size() != 1) {
        throw ConfigError("model: exact_gbm requires a one-dimensional state");
    }
    for (const auto& s : cp_streams) s.validate();
}

SimulationResult simulate(const ModelSpec& model, double T, std::uint64_t level_n,
                          const NoiseTape& tape) {
    model.validate();
    if (!(T > 0.0)) throw ConfigError("simulate: horizon must be positive");
    if (tape.horizon < T)
        throw ConfigError("simulate: tape horizon " + std::to_string(tape.horizon) +
                          " shorter than requested T " + std::to_string(T));
    if (tape.lambda != model.lambda())
        throw ConfigError("simulate: tape lambda does not match the model lambda");
    if (level_n < 1 || level_n > tape.n_ref)
        throw ConfigError("simulate: level n must satisfy 1 <= n <= tape n_ref");
    if (model.micro.kind != MicroSelector::Kind::ExactGbm &&
        tape.brownian_dim < model.dynamics.brownian_dim)
        throw ConfigError("simulate: tape Brownian dimension too small for the dynamics");
    if (model.micro.kind == MicroSelector::Kind::ExactGbm && tape.brownian_dim < 1)
        throw ConfigError("simulate: exact_gbm needs one Brownian dimension on the tape");

    SimulationResult result;
    HybridPath& path = result.path;
    path.origin = model.initial;
    path.constant_pre_history = model.constant_pre_history;
    path.horizon = 0.0;

    int mode = model.initial.mode;
    SegmentStepper stepper(&model.dynamics, model.micro, mode, model.initial.position, 0.0,
                           level_n, &tape);

    double t_prev = 0.0;
    std::uint64_t atom_index = 0;
    for (const MasterAtom& atom : tape.master_atoms) {
        if (atom.time > T) break;
        ++atom_index;
        stepper.advance_through(atom.time);
        path.segments.push_back(stepper.cut_hold(atom.time));
        for (EuclidJump& j : stepper.take_jumps()) path.euclid_jumps.push_back(std::move(j));
        path.horizon = atom.time;

        RateRow row = evaluate_rates(model.intensity, atom.time, path, &result.warnings);
        const MarkPartition partition = canonical_partition(row);
        const int next_mode = apply_mark(partition, atom.mark);

        result.audit.push_back({atom_index, atom.time, mode, std::move(row), atom.mark, next_mode});
        if (next_mode != mode) {
            path.discrete_events.push_back({atom.time, mode, next_mode});
            stepper.reanchor(atom.time, next_mode);
            mode = next_mode;
        }
        t_prev = atom.time;
    }

    if (t_prev < T) {
        stepper.advance_through(T);
        path.segments.push_back(stepper.cut_step(T));
        for (EuclidJump& j : stepper.take_jumps()) path.euclid_jumps.push_back(std::move(j));
    }
    path.horizon = T;
    return result;
}

CoupledRun couple_results(SimulationResult fine, SimulationResult coarse, double T) {
    CoupledRun run;
    run.fine = std::move(fine);
    run.coarse = std::move(coarse);
    run.decoupling = decoupling_time(run.fine.path, run.coarse.path);
    const double t_cut = std::min(T, run.decoupling.value_or(T));
    run.sup_error = sup_distance(run.fine.path, run.coarse.path, t_cut);
    return run;
}

int tape_brownian_dim(const ModelSpec& model) {
    return model.micro.kind == MicroSelector::Kind::ExactGbm ? 1 : model.dynamics.brownian_dim;
}

CoupledRun simulate_coupled(const ModelSpec& model, double T, std::uint64_t n_coarse,
                            std::uint64_t n_fine, const NoiseTape& tape) {
    if (n_coarse < 1 || n_fine < n_coarse || n_fine % n_coarse != 0)
        throw ConfigError("simulate_coupled: n_fine must be an integer multiple of n_coarse");
    SimulationResult fine = simulate(model, T, n_fine, tape);
    SimulationResult coarse = simulate(model, T, n_coarse, tape);
    return couple_results(std::move(fine), std::move(coarse), T);
}

} // namespace hybridsim
