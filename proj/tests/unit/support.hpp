#pragma once

#include "hybridsim/hybrid_path.hpp"
#include "hybridsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hybridsim::test {

/// Builds a single-segment scalar path from (time, value) nodes with the
/// given mode; nodes must start at 0.
inline HybridPath held_path(const std::vector<std::pair<double, double>>& nodes, int mode = 0) {
    HybridPath path;
    path.origin.mode = mode;
    path.origin.position = {nodes.front().second};
    Segment seg;
    seg.t_start = nodes.front().first;
    seg.t_end = nodes.back().first;
    seg.mode = mode;
    seg.p = 1;
    for (const auto& [t, v] : nodes) {
        seg.grid_times.push_back(t);
        seg.grid_values.push_back(v);
    }
    path.segments.push_back(std::move(seg));
    path.horizon = nodes.back().first;
    return path;
}

/// Scalar path with discrete mode events but a constant Euclidean value.
/// events = list of (time, post_mode); pre modes chain from origin_mode.
inline HybridPath mode_path(double horizon, int origin_mode,
                            const std::vector<std::pair<double, int>>& events,
                            double value = 0.0) {
    HybridPath path;
    path.origin.mode = origin_mode;
    path.origin.position = {value};
    int mode = origin_mode;
    double prev = 0.0;
    for (const auto& [t, post] : events) {
        Segment seg;
        seg.t_start = prev;
        seg.t_end = t;
        seg.mode = mode;
        seg.p = 1;
        seg.grid_times = {prev, t};
        seg.grid_values = {value, value};
        path.segments.push_back(std::move(seg));
        path.discrete_events.push_back({t, mode, post});
        mode = post;
        prev = t;
    }
    Segment last;
    last.t_start = prev;
    last.t_end = horizon;
    last.mode = mode;
    last.p = 1;
    last.grid_times = {prev, horizon};
    last.grid_values = {value, value};
    path.segments.push_back(std::move(last));
    path.horizon = horizon;
    return path;
}

/// Random piecewise-held scalar path with random mode events and Euclidean
/// jumps, for property tests.
inline HybridPath random_path(CounterRng& rng, double horizon = 10.0) {
    HybridPath path;
    path.origin.mode = static_cast<int>(rng.next_uniform(0.0, 3.0));
    path.origin.position = {rng.next_uniform(-1.0, 1.0)};
    const int n_events = static_cast<int>(rng.next_uniform(0.0, 4.0));
    std::vector<double> event_times;
    for (int i = 0; i < n_events; ++i)
        event_times.push_back(rng.next_uniform(0.05, horizon * 0.95));
    std::sort(event_times.begin(), event_times.end());
    event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());

    int mode = path.origin.mode;
    double prev_t = 0.0;
    double value = path.origin.position[0];
    auto make_segment = [&](double lo, double hi, int seg_mode) {
        Segment seg;
        seg.t_start = lo;
        seg.t_end = hi;
        seg.mode = seg_mode;
        seg.p = 1;
        const int steps = 1 + static_cast<int>(rng.next_uniform(0.0, 6.0));
        for (int k = 0; k <= steps; ++k) {
            const double t = k == steps ? hi : lo + (hi - lo) * k / steps;
            seg.grid_times.push_back(t);
            seg.grid_values.push_back(value);
            if (k < steps) {
                const double next = value + rng.next_uniform(-0.3, 0.3);
                // Occasionally turn the node into a recorded Euclidean jump.
                if (rng.next_unit_open() < 0.15) {
                    const double post = next + rng.next_uniform(-0.5, 0.5);
                    const double jt = lo + (hi - lo) * (k + 1) / steps;
                    if (jt < hi) {
                        path.euclid_jumps.push_back({jt, {next}, {post}});
                        value = post;
                        continue;
                    }
                }
                value = next;
            }
        }
        return seg;
    };
    for (double et : event_times) {
        path.segments.push_back(make_segment(prev_t, et, mode));
        const int post = mode + (rng.next_unit_open() < 0.5 ? 1 : -1);
        path.discrete_events.push_back({et, mode, post});
        mode = post;
        prev_t = et;
    }
    path.segments.push_back(make_segment(prev_t, horizon, mode));
    path.horizon = horizon;
    // Fix up euclid jump values to match the grid: the post value must be the
    // grid value at the jump time.
    std::vector<EuclidJump> fixed;
    for (const auto& j : path.euclid_jumps) {
        EuclidJump jj = j;
        jj.post_value = state_at(path, j.time).position;
        if (jj.pre_value != jj.post_value) fixed.push_back(jj);
    }
    path.euclid_jumps = std::move(fixed);
    std::sort(path.euclid_jumps.begin(), path.euclid_jumps.end(),
              [](const EuclidJump& a, const EuclidJump& b) { return a.time < b.time; });
    return path;
}

/// One-sample Kolmogorov-Smirnov test: returns the scaled statistic
/// D * (sqrt(n) + 0.12 + 0.11 / sqrt(n)); compare against 1.628 for a 1%
/// significance level.
template <typename Cdf>
double ks_statistic_scaled(std::vector<double> samples, Cdf&& cdf) {
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(f - lo), std::abs(f - hi)});
    }
    const double sn = std::sqrt(n);
    return d * (sn + 0.12 + 0.11 / sn);
}

inline constexpr double kKsCritical1Percent = 1.628;

} // namespace hybridsim::test
