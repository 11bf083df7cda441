#pragma once

#include "hybridsim/hybrid_path.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

namespace hybridsim {

// History functionals used inside intensity specifications. Every functional
// evaluated at time t reads the path strictly on [0, t) (left limits), which
// keeps rate evaluation predictable: mutating a path after t never changes
// any value computed here at t.

/// Lebesgue measure of { s in [max(t - window, 0), t) : X_s- >= barrier },
/// computed exactly on the held grid of component `dim`. If the path carries
/// a constant pre-history the window extends below 0 at the origin value;
/// otherwise it is truncated at 0.
double occupation_time(const HybridPath& path, double t, double barrier, double window,
                       int dim = 0);

/// Running maximum of component `dim` over the grid up to and including t,
/// minus the held value at t. Always >= 0.
double drawdown(const HybridPath& path, double t, int dim = 0);

/// Left-limit drawdown at t: uses the pre-jump value and pre-jump maximum
/// when t is a Euclidean jump time. This is the version rate specifications
/// consume.
double drawdown_left(const HybridPath& path, double t, int dim = 0);

/// Sojourn age: t minus the last discrete event time strictly before t, or
/// t itself when no event has occurred yet (sup of the empty set is 0).
double sojourn_age(const HybridPath& path, double t);

enum class JumpSign { Plus, Minus, Both };

struct JumpCountWarnings {
    std::uint64_t skipped_zero_pre = 0;
};

/// Number of Euclidean jumps in [max(t - window, 0), t) whose increment
/// exceeds eps. In relative mode the increment is (post - pre) / pre of
/// component `dim`; events with pre == 0 are skipped and counted in
/// `warnings` so a mid-batch division by zero cannot kill a run. With
/// sign == Both the test is on the magnitude (vector 2-norm in absolute
/// mode, |relative| otherwise).
int jump_count(const HybridPath& path, double t, double eps, double window,
               JumpSign sign, bool relative, int dim = 0,
               JumpCountWarnings* warnings = nullptr);

/// Exact time spent in mode `mode` on [0, t).
double occupation_by_mode(const HybridPath& path, double t, int mode);

/// Number of discrete events with the given pre/post modes in (0, t).
int transition_count(const HybridPath& path, double t, int pre_mode, int post_mode);

/// Current mode (left limit) followed by the pre-event modes of the most
/// recent transitions before t, newest first, truncated to k entries.
std::vector<int> recent_states(const HybridPath& path, double t, int k);

/// Bounded self-referential rate map:
///   q_j = lambda * exp(theta_j) / (1 + sum_k exp(theta_k)).
/// Evaluated with a max-shift so large logits cannot overflow; the returned
/// rates always satisfy sum_j q_j < lambda strictly, nudged down by at most
/// one ulp when rounding would otherwise close the gap.
std::map<int, double> softmax_rates(const std::map<int, double>& theta, double lambda);

// ---------------------------------------------------------------------------
// Declarative functional terms, the building blocks of an IntensitySpec.

enum class TermKind {
    Constant,          // 1
    Occupation,        // occupation_time(barrier, window, dim)
    DrawdownIndicator, // 1{ drawdown_left >= threshold }
    Age,               // sojourn_age
    AgeExpDecay,       // exp(-decay_rate * sojourn_age)
    JumpCount,         // jump_count(threshold, window, sign, relative, dim)
    ModeOccupation,    // occupation_by_mode(mode_a)
    TransitionCount,   // transition_count(mode_a, mode_b)
};

/// Optional age gate: the term is multiplied by 1{ lo <= age < hi }, which is
/// how piecewise-in-age hazard shapes are expressed.
struct AgeGate {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    bool operator==(const AgeGate&) const = default;
};

struct FunctionalTerm {
    TermKind kind = TermKind::Constant;
    double coeff = 1.0;
    double barrier = 0.0;
    double window = 0.0;
    double threshold = 0.0;
    double decay_rate = 0.0;
    JumpSign sign = JumpSign::Both;
    bool relative = false;
    int dim = 0;
    int mode_a = 0;
    int mode_b = 0;
    std::optional<AgeGate> gate;

    bool operator==(const FunctionalTerm&) const = default;
};

/// Parameter sanity checks (positive windows, finite thresholds). Throws
/// ConfigError on violation.
void validate_term(const FunctionalTerm& term);

/// coeff * functional(t, history) * gate indicator.
double evaluate_term(const FunctionalTerm& term, const HybridPath& path, double t,
                     JumpCountWarnings* warnings = nullptr);

} // namespace hybridsim
