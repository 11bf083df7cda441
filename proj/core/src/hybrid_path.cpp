#include "hybridsim/hybrid_path.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace hybridsim {

namespace {

void check_time_in_range(double t, double lo, double hi, const char* who) {
    if (!(t >= lo) || !(t <= hi)) {
        throw std::domain_error(std::string(who) + ": time " + std::to_string(t) +
                                " outside [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
    }
}

} // namespace

void HybridPath::validate() const {
    const auto p = static_cast<std::size_t>(dimension());
    if (segments.empty()) {
        if (horizon != 0.0) throw std::domain_error("HybridPath: no segments but horizon > 0");
    } else {
        if (segments.front().t_start != 0.0)
            throw std::domain_error("HybridPath: first segment does not start at 0");
        if (segments.back().t_end != horizon)
            throw std::domain_error("HybridPath: last segment does not end at horizon");
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const Segment& seg = segments[s];
        if (static_cast<std::size_t>(seg.p) != p)
            throw std::domain_error("HybridPath: segment dimension mismatch");
        if (seg.grid_times.empty() || seg.grid_times.front() != seg.t_start ||
            seg.grid_times.back() != seg.t_end)
            throw std::domain_error("HybridPath: segment grid does not span its interval");
        if (seg.grid_values.size() != seg.grid_times.size() * p)
            throw std::domain_error("HybridPath: grid value array size mismatch");
        for (std::size_t k = 1; k < seg.grid_times.size(); ++k) {
            if (!(seg.grid_times[k] > seg.grid_times[k - 1]))
                throw std::domain_error("HybridPath: grid times not strictly increasing");
        }
        if (s > 0) {
            const Segment& prev = segments[s - 1];
            if (prev.t_end != seg.t_start)
                throw std::domain_error("HybridPath: segments do not tile the horizon");
            const auto a = prev.value(prev.size() - 1);
            const auto b = seg.value(0);
            for (std::size_t d = 0; d < p; ++d) {
                if (a[d] != b[d])
                    throw std::domain_error("HybridPath: value discontinuity at segment join");
            }
        }
    }
    for (std::size_t k = 0; k < discrete_events.size(); ++k) {
        const auto& ev = discrete_events[k];
        if (!(ev.time > 0.0) || ev.time > horizon)
            throw std::domain_error("HybridPath: discrete event time outside (0, horizon]");
        if (ev.pre_mode == ev.post_mode)
            throw std::domain_error("HybridPath: discrete event with no mode change");
        if (k > 0 && !(ev.time > discrete_events[k - 1].time))
            throw std::domain_error("HybridPath: discrete event times not strictly increasing");
    }
    for (std::size_t k = 1; k < euclid_jumps.size(); ++k) {
        if (!(euclid_jumps[k].time > euclid_jumps[k - 1].time))
            throw std::domain_error("HybridPath: euclid jump times not strictly increasing");
    }
    // Mode bookkeeping: the segment modes must replay the event log.
    int mode = origin.mode;
    std::size_t ev = 0;
    for (const Segment& seg : segments) {
        while (ev < discrete_events.size() && discrete_events[ev].time <= seg.t_start) {
            if (discrete_events[ev].pre_mode != mode)
                throw std::domain_error("HybridPath: event log inconsistent with modes");
            mode = discrete_events[ev].post_mode;
            ++ev;
        }
        if (seg.mode != mode)
            throw std::domain_error("HybridPath: segment mode inconsistent with event log");
    }
}

namespace detail {

std::size_t segment_index_at(const HybridPath& path, double t) {
    // Last segment with t_start <= t: boundary times resolve rightward.
    const auto& segs = path.segments;
    auto it = std::upper_bound(segs.begin(), segs.end(), t,
                               [](double v, const Segment& s) { return v < s.t_start; });
    if (it == segs.begin()) throw std::domain_error("segment_index_at: before first segment");
    return static_cast<std::size_t>(std::distance(segs.begin(), it) - 1);
}

std::span<const double> held_value_at(const HybridPath& path, double t) {
    const Segment& seg = path.segments[segment_index_at(path, t)];
    auto it = std::upper_bound(seg.grid_times.begin(), seg.grid_times.end(), t);
    const auto k = static_cast<std::size_t>(std::distance(seg.grid_times.begin(), it));
    return seg.value(k == 0 ? 0 : k - 1);
}

} // namespace detail

HybridState state_at(const HybridPath& path, double t) {
    check_time_in_range(t, 0.0, path.horizon, "state_at");
    HybridState out;
    const auto& evs = path.discrete_events;
    auto it = std::upper_bound(evs.begin(), evs.end(), t,
                               [](double v, const DiscreteEvent& e) { return v < e.time; });
    out.mode = (it == evs.begin()) ? path.origin.mode : std::prev(it)->post_mode;
    if (path.segments.empty()) {
        out.position = path.origin.position;
    } else {
        auto v = detail::held_value_at(path, t);
        out.position.assign(v.begin(), v.end());
    }
    return out;
}

HybridState state_left_at(const HybridPath& path, double t) {
    if (!(t > 0.0)) throw std::domain_error("state_left_at: time must be positive");
    check_time_in_range(t, 0.0, path.horizon, "state_left_at");
    HybridState out;
    const auto& evs = path.discrete_events;
    auto it = std::lower_bound(evs.begin(), evs.end(), t,
                               [](const DiscreteEvent& e, double v) { return e.time < v; });
    out.mode = (it == evs.begin()) ? path.origin.mode : std::prev(it)->post_mode;

    const auto& jumps = path.euclid_jumps;
    auto jt = std::lower_bound(jumps.begin(), jumps.end(), t,
                               [](const EuclidJump& j, double v) { return j.time < v; });
    if (jt != jumps.end() && jt->time == t) {
        out.position = jt->pre_value;
    } else if (path.segments.empty()) {
        out.position = path.origin.position;
    } else {
        auto v = detail::held_value_at(path, t);
        out.position.assign(v.begin(), v.end());
    }
    return out;
}

double hybrid_norm(const HybridState& a, const HybridState& b) {
    if (a.position.size() != b.position.size())
        throw std::domain_error("hybrid_norm: dimension mismatch");
    double ss = 0.0;
    for (std::size_t d = 0; d < a.position.size(); ++d) {
        const double diff = a.position[d] - b.position[d];
        ss += diff * diff;
    }
    return std::abs(static_cast<double>(a.mode) - static_cast<double>(b.mode)) + std::sqrt(ss);
}

double sup_distance(const HybridPath& a, const HybridPath& b, double t_end) {
    if (a.horizon < t_end || b.horizon < t_end)
        throw std::domain_error("sup_distance: a path horizon is shorter than t_end");
    if (a.dimension() != b.dimension())
        throw std::domain_error("sup_distance: dimension mismatch");

    std::set<double> times;
    std::set<double> event_times;
    times.insert(0.0);
    times.insert(t_end);
    auto collect = [&](const HybridPath& p) {
        for (const Segment& seg : p.segments) {
            if (seg.t_start > t_end) break;
            for (double t : seg.grid_times) {
                if (t <= t_end) times.insert(t);
            }
        }
        for (const auto& ev : p.discrete_events) {
            if (ev.time <= t_end) {
                times.insert(ev.time);
                event_times.insert(ev.time);
            }
        }
        for (const auto& j : p.euclid_jumps) {
            if (j.time <= t_end) {
                times.insert(j.time);
                event_times.insert(j.time);
            }
        }
    };
    collect(a);
    collect(b);

    double sup = 0.0;
    for (double t : times) {
        sup = std::max(sup, hybrid_norm(state_at(a, t), state_at(b, t)));
        if (t > 0.0 && event_times.count(t) > 0)
            sup = std::max(sup, hybrid_norm(state_left_at(a, t), state_left_at(b, t)));
    }
    return sup;
}

} // namespace hybridsim
