#pragma once

#include "hybridsim/engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hybridsim {

/// First time the two mode trajectories differ: the earliest event time at
/// which one path jumps and the other does not, or both jump to different
/// modes. Modes can only change at events, so scanning the event logs is
/// exact. Returns nothing if the mode trajectories agree on [0, horizon].
std::optional<double> decoupling_time(const HybridPath& a, const HybridPath& b);

/// First atom index (1-based) at which the two runs' thinning decisions
/// differ, i.e. the jump increments produced by the same (time, mark) pair
/// disagree. Requires audits from the same tape (identical atom times and
/// marks), else a domain error. The corresponding atom time never exceeds
/// the decoupling time, and equals it when the runs start identically.
std::optional<std::uint64_t> disagreement_index(const std::vector<AuditRecord>& a,
                                                const std::vector<AuditRecord>& b);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double residual = 0.0; // least-squares residual sum
    std::vector<std::string> warnings;
};

/// Ordinary least squares of log2(error) on log2(level). Levels with
/// nonpositive error are excluded with a warning; fewer than three remaining
/// points raise std::invalid_argument.
RateFit fit_rate(const std::vector<std::uint64_t>& levels, const std::vector<double>& errors);

struct PairOutcome {
    std::optional<double> decoupling;
    std::optional<std::uint64_t> kappa;
    double kappa_time = 0.0; // valid when kappa is set
    double sup_error = 0.0;  // up to min(T, decoupling)
};

struct LevelStats {
    std::uint64_t level = 0;
    std::size_t paths = 0;
    std::size_t decoupled = 0;
    double decouple_frequency = 0.0;
    double median_error = 0.0; // over non-decoupled pairs; NaN if none
    double q90_error = 0.0;
};

struct ConvergenceReport {
    double horizon = 0.0;
    std::uint64_t n_fine = 0;
    std::uint64_t seed = 0;
    std::size_t paths_per_level = 0;
    std::vector<std::uint64_t> levels;
    std::vector<LevelStats> stats;
    std::vector<std::vector<PairOutcome>> outcomes; // [level][path]
    bool has_fit = false;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double fit_residual = 0.0;
    bool median_strictly_decreasing = false;
    bool decoupling_non_increasing_95 = false;
    std::vector<std::string> warnings;
};

/// Coupled-level convergence experiment: per level, runs the engine against
/// a shared fine reference on `paths` independent tapes, conditions the
/// error statistics on non-decoupled pairs, and fits the error decay rate.
/// Decoupled pairs feed the decoupling-frequency trend instead (verdict via
/// a 95% bootstrap on the frequency-vs-log2(level) slope). Deterministic for
/// fixed inputs regardless of the parallelism degree.
ConvergenceReport run_convergence_study(const ModelSpec& model, double T,
                                        const std::vector<std::uint64_t>& levels,
                                        std::uint64_t n_fine, std::size_t paths,
                                        std::uint64_t seed, unsigned jobs = 0);

} // namespace hybridsim
