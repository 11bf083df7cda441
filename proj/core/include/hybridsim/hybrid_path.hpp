#pragma once

#include <optional>
#include <span>
#include <vector>

namespace hybridsim {

/// Joint state of the discrete mode and the Euclidean component.
struct HybridState {
    int mode = 0;
    std::vector<double> position;

    bool operator==(const HybridState&) const = default;
};

/// A real jump of the discrete mode (pre_mode != post_mode, time > 0).
struct DiscreteEvent {
    double time = 0.0;
    int pre_mode = 0;
    int post_mode = 0;
};

/// A discontinuity of the Euclidean component caused by the jump driver.
/// Distinct from discrete-mode events: the mode is unchanged here.
struct EuclidJump {
    double time = 0.0;
    std::vector<double> pre_value;
    std::vector<double> post_value;
};

/// One solver segment: the Euclidean grid between consecutive mode changes.
/// Grid values are stored row-major with stride p; between grid nodes the
/// path is evaluated by left-constant hold, so the grid resolution is the
/// accuracy knob and no interpolation error enters the functionals.
struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;
    int mode = 0;
    int p = 1;
    std::vector<double> grid_times;
    std::vector<double> grid_values; // grid_times.size() * p, row-major

    std::size_t size() const { return grid_times.size(); }
    std::span<const double> value(std::size_t k) const {
        return {grid_values.data() + k * static_cast<std::size_t>(p),
                static_cast<std::size_t>(p)};
    }
};

/// The cadlag joint trajectory: an exact event log for the discrete mode,
/// per-interval Euclidean grid segments, and the Euclidean jump log. This is
/// the single source of truth every history functional evaluates against.
/// Immutable by convention once built; safe to share read-only across threads.
struct HybridPath {
    HybridState origin;
    std::vector<DiscreteEvent> discrete_events;
    std::vector<Segment> segments;
    std::vector<EuclidJump> euclid_jumps;
    double horizon = 0.0;
    /// When set, the path is treated as constant at the origin value on
    /// (-inf, 0); windowed functionals then extend below zero instead of
    /// truncating the window.
    bool constant_pre_history = false;

    int dimension() const { return static_cast<int>(origin.position.size()); }

    /// Checks the structural invariants: segments tile [0, horizon], grids are
    /// strictly increasing, values chain continuously across segment joins,
    /// event times are strictly increasing, and the Euclidean component is
    /// continuous (bit-for-bit) at discrete events. Throws std::domain_error.
    void validate() const;
};

/// Right-limit (cadlag) evaluation at t in [0, horizon]. The Euclidean value
/// is the stored grid value at the last grid time <= t (left-constant hold).
HybridState state_at(const HybridPath& path, double t);

/// Left-limit evaluation at t in (0, horizon]: the mode ignores an event at
/// exactly t, and the position is the recorded pre-jump value if t is a
/// Euclidean jump time. At all other times it coincides with state_at.
HybridState state_left_at(const HybridPath& path, double t);

/// |mode difference| + Euclidean norm of the position difference.
/// The vector norm is fixed to the 2-norm (kHybridVectorNorm below).
double hybrid_norm(const HybridState& a, const HybridState& b);

enum class VectorNorm { L2 };
inline constexpr VectorNorm kHybridVectorNorm = VectorNorm::L2;

/// Supremum of hybrid_norm(state_at(a,s), state_at(b,s)) over the union of
/// both paths' grid and event times up to t_end, with left limits also
/// compared at event times. Exact for hold-evaluated paths.
double sup_distance(const HybridPath& a, const HybridPath& b, double t_end);

namespace detail {
/// Index of the segment whose span contains t; boundaries resolve to the
/// later segment (values agree there by the continuity invariant).
std::size_t segment_index_at(const HybridPath& path, double t);
/// Hold value: last grid node with time <= t inside the covering segment.
std::span<const double> held_value_at(const HybridPath& path, double t);
} // namespace detail

} // namespace hybridsim
