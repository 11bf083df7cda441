#pragma once

#include "hybridsim/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hybridsim {

/// One candidate event of the master Poisson process: arrival time plus the
/// uniform mark on [0, lambda) that drives the thinning decision.
struct MasterAtom {
    double time = 0.0;
    double mark = 0.0;

    bool operator==(const MasterAtom&) const = default;
};

/// One event of a compound Poisson stream.
struct CpEvent {
    double time = 0.0;
    double value = 0.0;

    bool operator==(const CpEvent&) const = default;
};

/// Compound Poisson stream parameters: Poisson arrival rate and an
/// asymmetric double-exponential jump size (sign up with probability p_up,
/// magnitudes exponential with the given means).
struct CompoundPoissonSpec {
    double rate = 0.0;
    double p_up = 0.5;
    double eta_up = 1.0;
    double eta_down = 1.0;

    bool operator==(const CompoundPoissonSpec&) const = default;

    void validate() const; // throws ConfigError
};

/// Draws one asymmetric double-exponential jump from the given stream.
double sample_double_exponential(CounterRng& rng, double p_up, double eta_up, double eta_down);

// Stream ids for the documented splitting rule (seed, stream id, path index).
inline constexpr std::uint64_t kStreamMaster = 1;
inline constexpr std::uint64_t kStreamBrownianBase = 0x100;
inline constexpr std::uint64_t kStreamCompoundPoissonBase = 0x200;

/// Pre-generated, stream-separated randomness for one simulated path. The
/// Brownian component is stored as the path W on the fine grid of step
/// 1/n_ref (W[0] = 0); increments at any resolution are differences of this
/// one array, which is what makes common-random-number coupling across
/// discretization levels exact: every solver level consumes the same
/// underlying Brownian path.
class NoiseTape {
public:
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    double horizon = 0.0;
    std::uint64_t n_ref = 1;
    double lambda = 1.0;
    int brownian_dim = 0;
    std::vector<CompoundPoissonSpec> cp_specs;

    std::vector<std::vector<double>> brownian; // per dim: W at fine nodes, size fine_count + 1
    std::vector<MasterAtom> master_atoms;      // strictly increasing times in (0, horizon]
    std::vector<std::vector<CpEvent>> cp_events;

    double fine_step() const { return 1.0 / static_cast<double>(n_ref); }
    std::size_t fine_count() const { return fine_count_; }

    /// Snaps a time in [0, horizon] to its fine-grid index.
    std::size_t index_at(double t) const;

    /// W_dim(t1) - W_dim(t0) on the snapped fine grid.
    double brownian_increment(int dim, double t0, double t1) const {
        return brownian[static_cast<std::size_t>(dim)][index_at(t1)] -
               brownian[static_cast<std::size_t>(dim)][index_at(t0)];
    }
    double brownian_value(int dim, double t) const {
        return brownian[static_cast<std::size_t>(dim)][index_at(t)];
    }

    std::size_t fine_count_ = 0;
};

/// Materializes the full tape as a deterministic function of the inputs.
/// Streams are independent: each one draws from its own counter-based
/// generator keyed by (seed, stream id, path_index), so e.g. changing lambda
/// reorders nothing in the Brownian arrays.
NoiseTape generate_tape(std::uint64_t seed, double horizon, std::uint64_t n_ref, double lambda,
                        std::span<const CompoundPoissonSpec> cp_specs, int brownian_dim,
                        std::uint64_t path_index = 0);

/// In-memory budget for tape doubles; exceeding it raises ResourceError.
inline constexpr std::size_t kMaxTapeDoubles = std::size_t{1} << 27;

/// Brownian increments at step factor * fine_step. Holds the subsampled
/// Brownian path, so coarsening composes exactly: coarsening by a then by b
/// yields bit-identical increments to coarsening by a*b directly.
class CoarseIncrements {
public:
    std::uint64_t n_ref = 1;  // of the underlying tape
    std::uint64_t factor = 1; // relative to the fine grid
    std::vector<std::vector<double>> prefix; // per dim, subsampled W

    double step() const { return static_cast<double>(factor) / static_cast<double>(n_ref); }
    std::size_t count() const { return prefix.empty() ? 0 : prefix.front().size() - 1; }
    double increment(int dim, std::size_t i) const {
        const auto& w = prefix[static_cast<std::size_t>(dim)];
        return w[i + 1] - w[i];
    }
    std::vector<double> increments(int dim) const;
};

/// factor must divide the fine grid evenly per unit interval (n_ref % factor == 0).
CoarseIncrements coarsen_brownian(const NoiseTape& tape, std::uint64_t factor);
CoarseIncrements coarsen_brownian(const CoarseIncrements& coarse, std::uint64_t factor);

// Binary tape replay format (little-endian, versioned header).
void save_tape(const NoiseTape& tape, const std::string& file);
NoiseTape load_tape(const std::string& file);

} // namespace hybridsim
