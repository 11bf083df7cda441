#pragma once

#include "hybridsim/hybrid_path.hpp"
#include "hybridsim/noise_tape.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hybridsim {

/// Mode-specific Euclidean dynamics. drift fills a p-vector, diffusion fills
/// the p x brownian_dim matrix row-major, jump_coeff (optional) fills the
/// p-vector multiplying compound Poisson increments; all evaluated at left
/// limits.
struct ModeDynamics {
    int p = 1;
    int brownian_dim = 1;
    std::function<void(int mode, std::span<const double> x, std::span<double> out)> drift;
    std::function<void(int mode, std::span<const double> x, std::span<double> out)> diffusion;
    std::function<void(int mode, std::span<const double> x_left, std::span<double> out)> jump_coeff;
    int cp_stream = 0;

    bool has_jumps() const { return static_cast<bool>(jump_coeff); }
};

/// Affine coefficient pair: value(x) = a * x + b, applied per component.
struct AffinePerDim {
    double a = 0.0;
    double b = 0.0;

    bool operator==(const AffinePerDim&) const = default;
};

/// Declarative affine dynamics table for one mode; diffusion is diagonal
/// (component d drives and is driven by Brownian dimension d).
struct AffineModeSpec {
    std::vector<AffinePerDim> drift;
    std::vector<AffinePerDim> diffusion;
    std::optional<std::vector<AffinePerDim>> jump_coeff;

    bool operator==(const AffineModeSpec&) const = default;
};

ModeDynamics make_affine_dynamics(const std::map<int, AffineModeSpec>& modes, int p,
                                  int cp_stream = 0);

/// Request for one solver segment at discretization level n (step h = 1/n).
struct MicroRequest {
    int mode = 0;
    std::vector<double> x0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::uint64_t level_n = 1;
    const NoiseTape* tape = nullptr;
};

/// Micro-algorithm selection; exact_gbm is the closed-form oracle used to
/// measure the Euler scheme's strong order on a shared tape.
struct MicroSelector {
    enum class Kind { Euler, JumpEuler, ExactGbm };
    Kind kind = Kind::Euler;
    double gbm_mu = 0.0;
    double gbm_sigma = 0.0;
};

/// Drift-diffusion Euler scheme on the uniform grid t_start + k/n with a
/// shortened final step hitting t_end exactly. Brownian increments come from
/// the tape's fine grid, so levels that divide n_ref consume exact sums of
/// the same fine increments.
Segment euler_maruyama(const MicroRequest& req, const ModeDynamics& dyn);

/// Euler scheme on the union of the uniform grid and the compound Poisson
/// event times inside (t_start, t_end). At an event with value z the state
/// becomes x- + jump_coeff(mode, x-) * z; when an event lands exactly on a
/// grid node the diffusion step is applied first with the left limit, then
/// the jump.
Segment jump_adapted_euler(const MicroRequest& req, const ModeDynamics& dyn,
                           std::vector<EuclidJump>* jumps_out = nullptr);

/// Closed-form geometric Brownian motion on the same grid and the same tape:
/// x0 * exp((mu - sigma^2/2)(t_k - t_start) + sigma (W(t_k) - W(t_start))).
Segment exact_gbm(const MicroRequest& req, double mu, double sigma);

/// Incremental segment construction shared by the solver entry points above
/// and by the engine: nodes lie on the grid anchor + k/n (plus jump-adapted
/// event nodes), advancing lazily so rate evaluations between nodes see the
/// held value. Cutting a segment at an arbitrary time does not perturb the
/// stepping: the dynamics continue from the last true grid node.
class SegmentStepper {
public:
    SegmentStepper(const ModeDynamics* dyn, MicroSelector micro, int mode,
                   std::vector<double> x0, double anchor, std::uint64_t level_n,
                   const NoiseTape* tape);

    /// Processes every grid node and compound Poisson event with time <= t.
    void advance_through(double t);

    /// Closes the running segment at t_end with the held value (no partial
    /// step; the remainder of the spanning cell is discarded). The stepper
    /// keeps running for the next segment unless reanchor() follows.
    Segment cut_hold(double t_end);

    /// Closes the running segment at t_end with one final shortened step.
    Segment cut_step(double t_end);

    /// Restarts the uniform grid at a mode change: new anchor, new mode,
    /// value continuous.
    void reanchor(double t, int new_mode);

    std::span<const double> current_value() const { return x_; }
    int mode() const { return mode_; }
    std::vector<EuclidJump> take_jumps() { return std::exchange(jumps_, {}); }

private:
    void step_to(double t);
    void apply_jump(double time, double z);
    void push_node(double t);
    double next_uniform_node() const;

    const ModeDynamics* dyn_;
    MicroSelector micro_;
    int mode_;
    std::vector<double> x_;
    double anchor_;
    double gbm_x_anchor_ = 0.0;
    std::uint64_t level_n_;
    const NoiseTape* tape_;
    double h_;
    std::uint64_t k_next_ = 1; // next uniform node index relative to anchor
    double t_dyn_;             // time of the last true dynamics node
    double seg_start_;
    std::vector<double> grid_times_;
    std::vector<double> grid_values_;
    std::size_t cp_cursor_ = 0;
    bool consume_cp_ = false;
    std::vector<EuclidJump> jumps_;
    std::vector<double> scratch_drift_, scratch_diff_, scratch_coeff_;
};

} // namespace hybridsim
