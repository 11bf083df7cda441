#include "hybridsim/micro_solvers.hpp"

#include "hybridsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hybridsim {

ModeDynamics make_affine_dynamics(const std::map<int, AffineModeSpec>& modes, int p,
                                  int cp_stream) {
    for (const auto& [mode, spec] : modes) {
        if (static_cast<int>(spec.drift.size()) != p ||
            static_cast<int>(spec.diffusion.size()) != p ||
            (spec.jump_coeff && static_cast<int>(spec.jump_coeff->size()) != p))
            throw ConfigError("affine dynamics: coefficient arrays must have dimension p");
    }
    const bool any_jump = std::any_of(modes.begin(), modes.end(),
                                      [](const auto& kv) { return kv.second.jump_coeff.has_value(); });
    ModeDynamics dyn;
    dyn.p = p;
    dyn.brownian_dim = p; // diagonal noise
    dyn.cp_stream = cp_stream;
    auto lookup = [modes](int mode) -> const AffineModeSpec& {
        auto it = modes.find(mode);
        if (it == modes.end())
            throw ConfigError("affine dynamics: no coefficients defined for mode " +
                              std::to_string(mode));
        return it->second;
    };
    dyn.drift = [lookup](int mode, std::span<const double> x, std::span<double> out) {
        const AffineModeSpec& s = lookup(mode);
        for (std::size_t d = 0; d < x.size(); ++d)
            out[d] = s.drift[d].a * x[d] + s.drift[d].b;
    };
    dyn.diffusion = [lookup, p](int mode, std::span<const double> x, std::span<double> out) {
        const AffineModeSpec& s = lookup(mode);
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t d = 0; d < x.size(); ++d)
            out[d * static_cast<std::size_t>(p) + d] = s.diffusion[d].a * x[d] + s.diffusion[d].b;
    };
    if (any_jump) {
        dyn.jump_coeff = [lookup](int mode, std::span<const double> x, std::span<double> out) {
            const AffineModeSpec& s = lookup(mode);
            if (!s.jump_coeff) {
                std::fill(out.begin(), out.end(), 0.0);
                return;
            }
            for (std::size_t d = 0; d < x.size(); ++d)
                out[d] = (*s.jump_coeff)[d].a * x[d] + (*s.jump_coeff)[d].b;
        };
    }
    return dyn;
}

SegmentStepper::SegmentStepper(const ModeDynamics* dyn, MicroSelector micro, int mode,
                               std::vector<double> x0, double anchor, std::uint64_t level_n,
                               const NoiseTape* tape)
    : dyn_(dyn),
      micro_(micro),
      mode_(mode),
      x_(std::move(x0)),
      anchor_(anchor),
      level_n_(level_n),
      tape_(tape),
      h_(1.0 / static_cast<double>(level_n)),
      t_dyn_(anchor),
      seg_start_(anchor) {
    if (level_n < 1) throw std::domain_error("SegmentStepper: level n must be >= 1");
    if (micro_.kind == MicroSelector::Kind::ExactGbm) {
        if (x_.size() != 1)
            throw ConfigError("exact_gbm: the closed-form solver is one-dimensional");
        gbm_x_anchor_ = x_[0];
    } else {
        const auto p = static_cast<std::size_t>(dyn_->p);
        if (x_.size() != p) throw ConfigError("SegmentStepper: initial state dimension mismatch");
        scratch_drift_.resize(p);
        scratch_diff_.resize(p * static_cast<std::size_t>(dyn_->brownian_dim));
        scratch_coeff_.resize(p);
        consume_cp_ = micro_.kind == MicroSelector::Kind::JumpEuler && dyn_->has_jumps();
    }
    if (consume_cp_) {
        const auto stream = static_cast<std::size_t>(dyn_->cp_stream);
        if (stream >= tape_->cp_events.size())
            throw ConfigError("SegmentStepper: tape has no compound Poisson stream " +
                              std::to_string(dyn_->cp_stream));
        const auto& events = tape_->cp_events[stream];
        cp_cursor_ = static_cast<std::size_t>(
            std::upper_bound(events.begin(), events.end(), anchor,
                             [](double v, const CpEvent& e) { return v < e.time; }) -
            events.begin());
    }
    grid_times_.push_back(anchor);
    grid_values_.insert(grid_values_.end(), x_.begin(), x_.end());
}

double SegmentStepper::next_uniform_node() const {
    return anchor_ + static_cast<double>(k_next_) * h_;
}

void SegmentStepper::push_node(double t) {
    grid_times_.push_back(t);
    grid_values_.insert(grid_values_.end(), x_.begin(), x_.end());
}

void SegmentStepper::step_to(double t) {
    if (t == t_dyn_) return;
    const double dt = t - t_dyn_;
    if (micro_.kind == MicroSelector::Kind::ExactGbm) {
        const double dw = tape_->brownian_value(0, t) - tape_->brownian_value(0, anchor_);
        x_[0] = gbm_x_anchor_ *
                std::exp((micro_.gbm_mu - 0.5 * micro_.gbm_sigma * micro_.gbm_sigma) *
                             (t - anchor_) +
                         micro_.gbm_sigma * dw);
    } else {
        const auto p = static_cast<std::size_t>(dyn_->p);
        const auto dw_dim = static_cast<std::size_t>(dyn_->brownian_dim);
        dyn_->drift(mode_, x_, scratch_drift_);
        dyn_->diffusion(mode_, x_, scratch_diff_);
        for (std::size_t d = 0; d < p; ++d) x_[d] += scratch_drift_[d] * dt;
        for (std::size_t w = 0; w < dw_dim; ++w) {
            const double dw = tape_->brownian_increment(static_cast<int>(w), t_dyn_, t);
            if (dw == 0.0) continue;
            for (std::size_t d = 0; d < p; ++d) x_[d] += scratch_diff_[d * dw_dim + w] * dw;
        }
    }
    for (double v : x_) {
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "micro solver blow-up: non-finite state stepping from t=" << t_dyn_
                << " to t=" << t << " in mode " << mode_;
            throw SolverBlowupError(msg.str(), t_dyn_);
        }
    }
    t_dyn_ = t;
    push_node(t);
}

void SegmentStepper::apply_jump(double time, double z) {
    std::vector<double> pre(x_.begin(), x_.end());
    dyn_->jump_coeff(mode_, pre, scratch_coeff_);
    for (std::size_t d = 0; d < x_.size(); ++d) x_[d] += scratch_coeff_[d] * z;
    for (double v : x_) {
        if (!std::isfinite(v))
            throw SolverBlowupError("micro solver blow-up: non-finite state after jump", time);
    }
    jumps_.push_back({time, std::move(pre), std::vector<double>(x_.begin(), x_.end())});
    // The jump lands on the node just stepped to; overwrite its value.
    std::copy(x_.begin(), x_.end(), grid_values_.end() - static_cast<std::ptrdiff_t>(x_.size()));
}

void SegmentStepper::advance_through(double t) {
    for (;;) {
        const double t_node = next_uniform_node();
        double t_cp = std::numeric_limits<double>::infinity();
        if (consume_cp_) {
            const auto& events = tape_->cp_events[static_cast<std::size_t>(dyn_->cp_stream)];
            if (cp_cursor_ < events.size()) t_cp = events[cp_cursor_].time;
        }
        const double next = std::min(t_node, t_cp);
        if (next > t) return;
        if (t_cp < t_node) {
            const auto& ev =
                tape_->cp_events[static_cast<std::size_t>(dyn_->cp_stream)][cp_cursor_];
            step_to(ev.time);
            apply_jump(ev.time, ev.value);
            ++cp_cursor_;
        } else {
            step_to(t_node);
            ++k_next_;
            if (t_cp == t_node) {
                const auto& ev =
                    tape_->cp_events[static_cast<std::size_t>(dyn_->cp_stream)][cp_cursor_];
                apply_jump(ev.time, ev.value);
                ++cp_cursor_;
            }
        }
    }
}

Segment SegmentStepper::cut_hold(double t_end) {
    if (t_end < grid_times_.back())
        throw std::domain_error("SegmentStepper::cut_hold: time before last node");
    if (t_end > grid_times_.back()) push_node(t_end);
    Segment seg;
    seg.t_start = seg_start_;
    seg.t_end = t_end;
    seg.mode = mode_;
    seg.p = micro_.kind == MicroSelector::Kind::ExactGbm ? 1 : dyn_->p;
    seg.grid_times = std::move(grid_times_);
    seg.grid_values = std::move(grid_values_);
    seg_start_ = t_end;
    grid_times_ = {t_end};
    grid_values_.assign(x_.begin(), x_.end());
    return seg;
}

Segment SegmentStepper::cut_step(double t_end) {
    if (t_end < t_dyn_) throw std::domain_error("SegmentStepper::cut_step: time before last node");
    if (t_end > t_dyn_) step_to(t_end);
    return cut_hold(t_end);
}

void SegmentStepper::reanchor(double t, int new_mode) {
    anchor_ = t;
    t_dyn_ = t;
    k_next_ = 1;
    mode_ = new_mode;
    if (micro_.kind == MicroSelector::Kind::ExactGbm) gbm_x_anchor_ = x_[0];
}

namespace {

void check_request(const MicroRequest& req) {
    if (req.tape == nullptr) throw std::domain_error("micro solver: no tape attached");
    if (!(req.t_end > req.t_start))
        throw std::domain_error("micro solver: t_end must exceed t_start");
    if (req.level_n < 1) throw std::domain_error("micro solver: level n must be >= 1");
}

} // namespace

Segment euler_maruyama(const MicroRequest& req, const ModeDynamics& dyn) {
    check_request(req);
    if (dyn.has_jumps()) {
        const auto stream = static_cast<std::size_t>(dyn.cp_stream);
        if (stream < req.tape->cp_events.size()) {
            for (const CpEvent& e : req.tape->cp_events[stream]) {
                if (e.time > req.t_start && e.time < req.t_end)
                    throw std::domain_error(
                        "euler_maruyama: dynamics carry a jump coefficient and the tape has "
                        "compound Poisson events in the interval; use jump_adapted_euler");
            }
        }
    }
    SegmentStepper stepper(&dyn, {MicroSelector::Kind::Euler, 0.0, 0.0}, req.mode, req.x0,
                           req.t_start, req.level_n, req.tape);
    stepper.advance_through(req.t_end);
    return stepper.cut_step(req.t_end);
}

Segment jump_adapted_euler(const MicroRequest& req, const ModeDynamics& dyn,
                           std::vector<EuclidJump>* jumps_out) {
    check_request(req);
    if (!dyn.has_jumps())
        throw std::domain_error("jump_adapted_euler: dynamics have no jump coefficient");
    SegmentStepper stepper(&dyn, {MicroSelector::Kind::JumpEuler, 0.0, 0.0}, req.mode, req.x0,
                           req.t_start, req.level_n, req.tape);
    stepper.advance_through(req.t_end);
    Segment seg = stepper.cut_step(req.t_end);
    if (jumps_out) *jumps_out = stepper.take_jumps();
    return seg;
}

Segment exact_gbm(const MicroRequest& req, double mu, double sigma) {
    check_request(req);
    SegmentStepper stepper(nullptr, {MicroSelector::Kind::ExactGbm, mu, sigma}, req.mode, req.x0,
                           req.t_start, req.level_n, req.tape);
    stepper.advance_through(req.t_end);
    return stepper.cut_step(req.t_end);
}

} // namespace hybridsim
