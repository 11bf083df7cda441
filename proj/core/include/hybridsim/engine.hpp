#pragma once

#include "hybridsim/hybrid_path.hpp"
#include "hybridsim/micro_solvers.hpp"
#include "hybridsim/noise_tape.hpp"
#include "hybridsim/transition_kernel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hybridsim {

/// Everything needed to simulate one model: the uniformization bound lives
/// in the intensity spec, the Euclidean dynamics in ModeDynamics, and the
/// micro-algorithm selection decides how segments are generated.
struct ModelSpec {
    IntensitySpec intensity;
    ModeDynamics dynamics;
    MicroSelector micro;
    HybridState initial;
    std::vector<CompoundPoissonSpec> cp_streams;
    bool constant_pre_history = false;

    double lambda() const { return intensity.lambda; }
    void validate() const; // throws ConfigError
};

/// Per-atom record of the thinning decision, kept for audits and for the
/// disagreement-index bookkeeping of coupled runs.
struct AuditRecord {
    std::uint64_t atom_index = 0; // 1-based
    double time = 0.0;
    int mode_before = 0;
    RateRow rates;
    double u = 0.0;
    int mode_after = 0;

    double q_total() const { return rates.total_exit(); }
};

struct SimulationResult {
    HybridPath path;
    std::vector<AuditRecord> audit;
    JumpCountWarnings warnings;
};

/// Event-driven construction of the approximated hybrid path on [0, T].
///
/// For each master atom T_m <= T in order: the Euclidean component advances
/// on the uniform level-n grid with the mode frozen, the rate row is
/// evaluated from the path built so far (left limits at T_m), the uniform
/// mark U_m is pushed through the canonical partition, and on a real jump
/// the Euclidean value is carried continuously while the grid re-anchors at
/// T_m. Segments are cut at every atom with the held value, so re-evaluating
/// the intensity on the emitted path reproduces the recorded rate rows
/// bit-for-bit. A pure function of its inputs.
SimulationResult simulate(const ModelSpec& model, double T, std::uint64_t level_n,
                          const NoiseTape& tape);

/// Two runs of the engine at different levels on the same tape. The fine run
/// stands in for the exact process; decoupling is the first time the mode
/// sequences differ; sup_error is the path distance up to min(T, decoupling).
struct CoupledRun {
    SimulationResult fine;
    SimulationResult coarse;
    std::optional<double> decoupling;
    double sup_error = 0.0;
};

/// Requires n_fine an integer multiple of n_coarse (ratio 1 gives identical
/// runs and zero error).
CoupledRun simulate_coupled(const ModelSpec& model, double T, std::uint64_t n_coarse,
                            std::uint64_t n_fine, const NoiseTape& tape);

/// Builds a CoupledRun from two already-simulated results on the same tape;
/// simulate_coupled delegates here, and batch studies use it to reuse one
/// fine reference run across several coarse levels.
CoupledRun couple_results(SimulationResult fine, SimulationResult coarse, double T);

/// Brownian dimension a tape must provide for this model.
int tape_brownian_dim(const ModelSpec& model);

} // namespace hybridsim
