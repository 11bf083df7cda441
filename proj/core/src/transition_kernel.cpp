#include "hybridsim/transition_kernel.hpp"

#include "hybridsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hybridsim {

void IntensitySpec::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ConfigError("intensity: lambda must be positive and finite");
    for (const RateEntry& e : entries) {
        if (e.from_mode == e.to_mode)
            throw ConfigError("intensity: rate entry with identical source and target mode");
        if (e.cap && !(*e.cap >= 0.0))
            throw ConfigError("intensity: cap must be nonnegative");
        for (const FunctionalTerm& t : e.terms) validate_term(t);
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t k = i + 1; k < entries.size(); ++k) {
            if (entries[i].from_mode == entries[k].from_mode &&
                entries[i].to_mode == entries[k].to_mode)
                throw ConfigError("intensity: duplicate rate entry for a mode pair");
        }
    }
}

RateRow evaluate_rates(const IntensitySpec& spec, double t, const HybridPath& history,
                       JumpCountWarnings* warnings) {
    RateRow row;
    row.lambda = spec.lambda;
    row.current_mode = state_left_at(history, t).mode;

    if (spec.kind == IntensitySpec::Kind::Softmax) {
        std::map<int, double> theta;
        for (const RateEntry& e : spec.entries) {
            if (e.from_mode != row.current_mode) continue;
            double v = 0.0;
            for (const FunctionalTerm& term : e.terms)
                v += evaluate_term(term, history, t, warnings);
            theta[e.to_mode] = v;
        }
        row.rates = softmax_rates(theta, spec.lambda);
    } else {
        for (const RateEntry& e : spec.entries) {
            if (e.from_mode != row.current_mode) continue;
            double v = 0.0;
            for (const FunctionalTerm& term : e.terms)
                v += evaluate_term(term, history, t, warnings);
            if (e.clamp_at_zero) v = std::max(v, 0.0);
            if (e.cap) v = std::min(v, *e.cap);
            if (v < 0.0) {
                std::ostringstream msg;
                msg << "intensity: negative rate " << v << " for " << e.from_mode << "->"
                    << e.to_mode << " at t=" << t << " (clamp_at_zero disabled)";
                throw BoundViolationError(msg.str(), t, v, spec.lambda);
            }
            row.rates[e.to_mode] = v;
        }
    }

    const double total = row.total_exit();
    if (total > spec.lambda + 1e-12) {
        std::ostringstream msg;
        msg << "intensity: total exit rate " << total << " exceeds lambda " << spec.lambda
            << " at t=" << t << " from mode " << row.current_mode
            << " (uniformization bound violated)";
        throw BoundViolationError(msg.str(), t, total, spec.lambda);
    }
    return row;
}

MarkPartition canonical_partition(const RateRow& row) {
    MarkPartition part;
    part.current_mode = row.current_mode;
    part.lambda = row.lambda;
    part.jump_intervals.reserve(row.rates.size());
    // Neumaier-compensated running boundary keeps interval lengths within a
    // couple of ulp of the rates even for many targets.
    double sum = 0.0, comp = 0.0;
    for (const auto& [target, q] : row.rates) {
        const double lo = sum + comp;
        const double add = q;
        const double next = sum + add;
        if (std::abs(sum) >= std::abs(add))
            comp += (sum - next) + add;
        else
            comp += (add - next) + sum;
        sum = next;
        part.jump_intervals.push_back({lo, sum + comp, target});
    }
    part.residual_lo = row.rates.empty() ? 0.0 : part.jump_intervals.back().hi;
    return part;
}

int apply_mark(const MarkPartition& partition, double u) {
    if (!(u >= 0.0) || !(u < partition.lambda))
        throw std::domain_error("apply_mark: mark outside [0, lambda)");
    if (u >= partition.residual_lo) return partition.current_mode;
    // Half-open intervals: a boundary mark belongs to the interval on its right.
    auto it = std::upper_bound(partition.jump_intervals.begin(), partition.jump_intervals.end(),
                               u, [](double v, const MarkPartition::Interval& iv) {
                                   return v < iv.hi;
                               });
    if (it == partition.jump_intervals.end()) return partition.current_mode;
    if (u >= it->lo && u < it->hi && it->lo < it->hi) return it->target;
    return partition.current_mode;
}

namespace {

double overlap(double lo1, double hi1, double lo2, double hi2) {
    return std::max(0.0, std::min(hi1, hi2) - std::max(lo1, lo2));
}

} // namespace

double pair_rate(const IntensitySpec& spec, int from_mode, int to_mode, double t,
                 const HybridPath& history) {
    if (spec.kind == IntensitySpec::Kind::Softmax) {
        std::map<int, double> theta;
        for (const RateEntry& e : spec.entries) {
            if (e.from_mode != from_mode) continue;
            double v = 0.0;
            for (const FunctionalTerm& term : e.terms) v += evaluate_term(term, history, t);
            theta[e.to_mode] = v;
        }
        auto rates = softmax_rates(theta, spec.lambda);
        auto it = rates.find(to_mode);
        return it == rates.end() ? 0.0 : it->second;
    }
    for (const RateEntry& e : spec.entries) {
        if (e.from_mode != from_mode || e.to_mode != to_mode) continue;
        double v = 0.0;
        for (const FunctionalTerm& term : e.terms) v += evaluate_term(term, history, t);
        if (e.clamp_at_zero) v = std::max(v, 0.0);
        if (e.cap) v = std::min(v, *e.cap);
        return v;
    }
    return 0.0;
}

double symmetric_difference_measure(const MarkPartition& a, const MarkPartition& b) {
    double total = 0.0;
    auto find = [](const MarkPartition& p, int target) -> const MarkPartition::Interval* {
        for (const auto& iv : p.jump_intervals)
            if (iv.target == target) return &iv;
        return nullptr;
    };
    auto add_side = [&](const MarkPartition& x, const MarkPartition& y) {
        for (const auto& iv : x.jump_intervals) {
            const double len = iv.hi - iv.lo;
            const auto* other = find(y, iv.target);
            const double ov = other ? overlap(iv.lo, iv.hi, other->lo, other->hi) : 0.0;
            total += len - ov;
        }
    };
    add_side(a, b);
    add_side(b, a);
    return total;
}

} // namespace hybridsim
