#include "hybridsim/path_functionals.hpp"

#include "hybridsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridsim {

namespace {

// Walks the hold cells of `path` intersecting [lo, hi) in time order and
// calls fn(cell_lo, cell_hi, value). Cells are the half-open spans between
// consecutive grid nodes; the trailing span of the last node extends to hi.
template <typename Fn>
void for_each_hold_cell(const HybridPath& path, double lo, double hi, Fn&& fn) {
    if (!(hi > lo)) return;
    if (path.segments.empty()) {
        fn(lo, hi, std::span<const double>(path.origin.position));
        return;
    }
    std::size_t s = detail::segment_index_at(path, std::max(lo, 0.0));
    double prev_time = lo;
    std::span<const double> prev_val = detail::held_value_at(path, std::max(lo, 0.0));
    for (; s < path.segments.size(); ++s) {
        const Segment& seg = path.segments[s];
        if (seg.t_start >= hi) break;
        auto it = std::upper_bound(seg.grid_times.begin(), seg.grid_times.end(), prev_time);
        for (; it != seg.grid_times.end(); ++it) {
            const double node = *it;
            if (node >= hi) {
                fn(prev_time, hi, prev_val);
                return;
            }
            if (node > prev_time) fn(prev_time, node, prev_val);
            prev_time = node;
            prev_val = seg.value(static_cast<std::size_t>(it - seg.grid_times.begin()));
        }
    }
    if (prev_time < hi) fn(prev_time, hi, prev_val);
}

void check_dim(const HybridPath& path, int dim) {
    if (dim < 0 || dim >= path.dimension())
        throw std::domain_error("functional: component index out of range");
}

} // namespace

double occupation_time(const HybridPath& path, double t, double barrier, double window,
                       int dim) {
    if (!(window > 0.0)) throw std::domain_error("occupation_time: window must be positive");
    check_dim(path, dim);
    double lo = t - window;
    double acc = 0.0;
    if (lo < 0.0) {
        if (path.constant_pre_history && path.origin.position[dim] >= barrier)
            acc += std::min(-lo, window);
        lo = 0.0;
    }
    for_each_hold_cell(path, lo, std::min(t, path.horizon),
                       [&](double a, double b, std::span<const double> v) {
                           if (v[static_cast<std::size_t>(dim)] >= barrier) acc += b - a;
                       });
    return acc;
}

namespace {

// Max of grid values of component dim over grid times satisfying `pred`.
template <typename Pred>
double grid_running_max(const HybridPath& path, int dim, Pred&& pred) {
    double m = -std::numeric_limits<double>::infinity();
    for (const Segment& seg : path.segments) {
        for (std::size_t k = 0; k < seg.size(); ++k) {
            if (!pred(seg.grid_times[k])) return m;
            m = std::max(m, seg.value(k)[static_cast<std::size_t>(dim)]);
        }
    }
    return m;
}

} // namespace

double drawdown(const HybridPath& path, double t, int dim) {
    check_dim(path, dim);
    if (path.segments.empty()) return 0.0;
    const double x = detail::held_value_at(path, t)[static_cast<std::size_t>(dim)];
    const double m = grid_running_max(path, dim, [&](double gt) { return gt <= t; });
    return std::max(m, x) - x;
}

double drawdown_left(const HybridPath& path, double t, int dim) {
    check_dim(path, dim);
    if (path.segments.empty() || t == 0.0) return 0.0;
    const double x = state_left_at(path, t).position[static_cast<std::size_t>(dim)];
    double m = grid_running_max(path, dim, [&](double gt) { return gt < t; });
    // The left limit itself belongs to the closure of the pre-t trajectory.
    m = std::max(m, x);
    return m - x;
}

double sojourn_age(const HybridPath& path, double t) {
    const auto& evs = path.discrete_events;
    auto it = std::lower_bound(evs.begin(), evs.end(), t,
                               [](const DiscreteEvent& e, double v) { return e.time < v; });
    if (it == evs.begin()) return t;
    return t - std::prev(it)->time;
}

int jump_count(const HybridPath& path, double t, double eps, double window,
               JumpSign sign, bool relative, int dim, JumpCountWarnings* warnings) {
    if (!(eps > 0.0)) throw std::domain_error("jump_count: eps must be positive");
    if (!(window > 0.0)) throw std::domain_error("jump_count: window must be positive");
    check_dim(path, dim);
    const double lo = std::max(t - window, 0.0);
    int count = 0;
    for (const EuclidJump& j : path.euclid_jumps) {
        if (j.time < lo) continue;
        if (j.time >= t) break;
        const auto d = static_cast<std::size_t>(dim);
        double inc;
        if (relative) {
            if (j.pre_value[d] == 0.0) {
                if (warnings) warnings->skipped_zero_pre += 1;
                continue;
            }
            inc = (j.post_value[d] - j.pre_value[d]) / j.pre_value[d];
        } else if (sign == JumpSign::Both) {
            double ss = 0.0;
            for (std::size_t k = 0; k < j.pre_value.size(); ++k) {
                const double diff = j.post_value[k] - j.pre_value[k];
                ss += diff * diff;
            }
            inc = std::sqrt(ss);
        } else {
            inc = j.post_value[d] - j.pre_value[d];
        }
        switch (sign) {
            case JumpSign::Plus:
                if (inc > eps) ++count;
                break;
            case JumpSign::Minus:
                if (inc < -eps) ++count;
                break;
            case JumpSign::Both:
                if (std::abs(inc) > eps) ++count;
                break;
        }
    }
    return count;
}

double occupation_by_mode(const HybridPath& path, double t, int mode) {
    double acc = 0.0;
    double prev = 0.0;
    int cur = path.origin.mode;
    for (const DiscreteEvent& ev : path.discrete_events) {
        if (ev.time >= t) break;
        if (cur == mode) acc += ev.time - prev;
        prev = ev.time;
        cur = ev.post_mode;
    }
    if (t > prev && cur == mode) acc += t - prev;
    return acc;
}

int transition_count(const HybridPath& path, double t, int pre_mode, int post_mode) {
    if (pre_mode == post_mode)
        throw std::domain_error("transition_count: pre and post modes must differ");
    int count = 0;
    for (const DiscreteEvent& ev : path.discrete_events) {
        if (ev.time >= t) break;
        if (ev.pre_mode == pre_mode && ev.post_mode == post_mode) ++count;
    }
    return count;
}

std::vector<int> recent_states(const HybridPath& path, double t, int k) {
    if (k < 1) throw std::domain_error("recent_states: memory order must be >= 1");
    const auto& evs = path.discrete_events;
    auto it = std::lower_bound(evs.begin(), evs.end(), t,
                               [](const DiscreteEvent& e, double v) { return e.time < v; });
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    out.push_back(it == evs.begin() ? path.origin.mode : std::prev(it)->post_mode);
    while (it != evs.begin() && static_cast<int>(out.size()) < k) {
        --it;
        out.push_back(it->pre_mode);
    }
    return out;
}

std::map<int, double> softmax_rates(const std::map<int, double>& theta, double lambda) {
    if (!(lambda > 0.0)) throw std::domain_error("softmax_rates: lambda must be positive");
    std::map<int, double> out;
    if (theta.empty()) return out;
    double shift = 0.0; // the implicit unit term in the denominator has logit 0
    for (const auto& [j, th] : theta) {
        if (!std::isfinite(th)) throw std::domain_error("softmax_rates: non-finite logit");
        shift = std::max(shift, th);
    }
    double denom = std::exp(-shift);
    for (const auto& [j, th] : theta) denom += std::exp(th - shift);
    for (const auto& [j, th] : theta) out[j] = lambda * (std::exp(th - shift) / denom);
    // Rounding can eat the residual mass entirely (huge logits make the
    // denominator round to the numerator sum). The exit-rate bound is a hard
    // contract, so shave ulps until the total sits strictly below lambda;
    // the distortion is at most a few ulps per rate.
    for (int pass = 0; pass < 64; ++pass) {
        double total = 0.0;
        for (const auto& [j, q] : out) total += q;
        if (total < lambda) break;
        for (auto& [j, q] : out) q = std::nextafter(q, 0.0);
    }
    return out;
}

void validate_term(const FunctionalTerm& term) {
    auto require = [&](bool ok, const char* msg) {
        if (!ok) throw ConfigError(std::string("functional term: ") + msg);
    };
    require(std::isfinite(term.coeff), "coefficient must be finite");
    switch (term.kind) {
        case TermKind::Constant:
            break;
        case TermKind::Occupation:
            require(term.window > 0.0, "occupation window must be positive");
            require(std::isfinite(term.barrier), "barrier must be finite");
            break;
        case TermKind::DrawdownIndicator:
            require(std::isfinite(term.threshold), "drawdown threshold must be finite");
            break;
        case TermKind::Age:
            break;
        case TermKind::AgeExpDecay:
            require(term.decay_rate >= 0.0 && std::isfinite(term.decay_rate),
                    "decay rate must be finite and nonnegative");
            break;
        case TermKind::JumpCount:
            require(term.window > 0.0, "jump count window must be positive");
            require(term.threshold > 0.0 && std::isfinite(term.threshold),
                    "jump size threshold must be positive and finite");
            break;
        case TermKind::ModeOccupation:
        case TermKind::TransitionCount:
            break;
    }
    if (term.gate) {
        require(term.gate->lo >= 0.0, "age gate lower bound must be nonnegative");
        require(term.gate->hi > term.gate->lo, "age gate must be a nonempty interval");
    }
}

double evaluate_term(const FunctionalTerm& term, const HybridPath& path, double t,
                     JumpCountWarnings* warnings) {
    if (term.gate) {
        const double a = sojourn_age(path, t);
        if (!(a >= term.gate->lo && a < term.gate->hi)) return 0.0;
    }
    double v = 0.0;
    switch (term.kind) {
        case TermKind::Constant:
            v = 1.0;
            break;
        case TermKind::Occupation:
            v = occupation_time(path, t, term.barrier, term.window, term.dim);
            break;
        case TermKind::DrawdownIndicator:
            v = drawdown_left(path, t, term.dim) >= term.threshold ? 1.0 : 0.0;
            break;
        case TermKind::Age:
            v = sojourn_age(path, t);
            break;
        case TermKind::AgeExpDecay:
            v = std::exp(-term.decay_rate * sojourn_age(path, t));
            break;
        case TermKind::JumpCount:
            v = jump_count(path, t, term.threshold, term.window, term.sign, term.relative,
                           term.dim, warnings);
            break;
        case TermKind::ModeOccupation:
            v = occupation_by_mode(path, t, term.mode_a);
            break;
        case TermKind::TransitionCount:
            v = transition_count(path, t, term.mode_a, term.mode_b);
            break;
    }
    return term.coeff * v;
}

} // namespace hybridsim
