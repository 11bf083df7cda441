#pragma once

#include "hybridsim/hybrid_path.hpp"
#include "hybridsim/path_functionals.hpp"

#include <map>
#include <optional>
#include <vector>

namespace hybridsim {

/// The active row of the intensity matrix: off-diagonal rates out of
/// current_mode, all nonnegative with total exit <= lambda.
struct RateRow {
    int current_mode = 0;
    std::map<int, double> rates; // target mode -> rate, targets != current_mode
    double lambda = 1.0;

    double total_exit() const {
        double s = 0.0;
        for (const auto& [j, q] : rates) s += q;
        return s;
    }
};

/// One declarative rate rule q_{from,to}(t) = combine(terms), where combine
/// is the affine sum of the terms followed by an optional clamp at zero and
/// an optional cap. Under softmax composition the affine sum is instead the
/// logit theta_{from,to}.
struct RateEntry {
    int from_mode = 0;
    int to_mode = 1;
    std::vector<FunctionalTerm> terms;
    bool clamp_at_zero = true;
    std::optional<double> cap;

    bool operator==(const RateEntry&) const = default;
};

/// Declarative map from (t, history) to the active RateRow. Evaluation uses
/// left limits only, so rates are predictable functionals of the path.
struct IntensitySpec {
    enum class Kind { Affine, Softmax };
    Kind kind = Kind::Affine;
    double lambda = 1.0;
    std::vector<RateEntry> entries;

    bool operator==(const IntensitySpec&) const = default;

    void validate() const; // throws ConfigError
};

/// Deterministic partition of the mark space [0, lambda): one half-open
/// interval per jump target laid left-to-right in increasing target order,
/// followed by the residual no-jump interval. Left-packing keeps the
/// partition's symmetric difference small under small rate perturbations.
struct MarkPartition {
    struct Interval {
        double lo = 0.0;
        double hi = 0.0;
        int target = 0;
    };
    int current_mode = 0;
    double lambda = 1.0;
    std::vector<Interval> jump_intervals; // increasing target order, contiguous from 0
    double residual_lo = 0.0;             // [residual_lo, lambda) keeps the current mode
};

/// Evaluates all functional terms on the strict past of `history` at time t
/// and composes the active RateRow. The current mode is read from the
/// history's left limit. Throws BoundViolationError if the composed total
/// exit rate exceeds lambda by more than 1e-12 (the tolerance absorbs
/// rounding in softmax composition; anything larger is a modelling error,
/// never silently clamped).
RateRow evaluate_rates(const IntensitySpec& spec, double t, const HybridPath& history,
                       JumpCountWarnings* warnings = nullptr);

/// Builds the canonical left-packed partition for a RateRow.
MarkPartition canonical_partition(const RateRow& row);

/// Thinning decision: the target mode of the interval containing u, or the
/// current mode if u falls in the residual. Intervals are half-open, so a
/// mark exactly on a boundary belongs to the interval on its right.
int apply_mark(const MarkPartition& partition, double u);

/// Sum over jump targets of the measure of the symmetric difference between
/// the two partitions' intervals. This is the empirical handle on how
/// smoothly the thinning decision responds to history perturbations.
double symmetric_difference_measure(const MarkPartition& a, const MarkPartition& b);

/// Hypothetical rate of the (from, to) pair at time t, regardless of the
/// history's current mode. Used for reporting rate trajectories.
double pair_rate(const IntensitySpec& spec, int from_mode, int to_mode, double t,
                 const HybridPath& history);

} // namespace hybridsim
