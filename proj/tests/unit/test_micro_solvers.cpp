#include "hybridsim/micro_solvers.hpp"

#include "hybridsim/convergence.hpp"
#include "hybridsim/errors.hpp"
#include "hybridsim/hybrid_path.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace hybridsim;

namespace {

ModeDynamics affine_1d(double drift_a, double drift_b, double diff_a, double diff_b,
                       bool multiplicative_jump = false) {
    std::map<int, AffineModeSpec> modes;
    AffineModeSpec spec;
    spec.drift = {{drift_a, drift_b}};
    spec.diffusion = {{diff_a, diff_b}};
    if (multiplicative_jump) spec.jump_coeff = {{{1.0, 0.0}}};
    modes[0] = spec;
    modes[1] = spec;
    return make_affine_dynamics(modes, 1);
}

double sup_abs_diff(const Segment& a, const Segment& b) {
    // Both segments share the same grid in these tests.
    REQUIRE(a.grid_times == b.grid_times);
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a.grid_values[k] - b.grid_values[k]));
    return m;
}

} // namespace

TEST_SUITE("micro_solvers") {

TEST_CASE("zero dynamics give a constant segment") {
    const NoiseTape tape = generate_tape(1, 1.0, 16, 1.0, {}, 1);
    const ModeDynamics dyn = affine_1d(0.0, 0.0, 0.0, 0.0);
    const Segment seg = euler_maruyama({0, {2.5}, 0.0, 1.0, 16, &tape}, dyn);
    for (std::size_t k = 0; k < seg.size(); ++k) CHECK(seg.grid_values[k] == 2.5);
    CHECK(seg.t_start == 0.0);
    CHECK(seg.t_end == 1.0);
}

TEST_CASE("deterministic drift reproduces the explicit update grid") {
    const NoiseTape tape = generate_tape(1, 1.0, 16, 1.0, {}, 1);
    const ModeDynamics dyn = affine_1d(0.0, 1.0, 0.0, 0.0);
    const Segment seg = euler_maruyama({0, {0.0}, 0.0, 1.0, 4, &tape}, dyn);
    REQUIRE(seg.grid_times == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    REQUIRE(seg.grid_values.size() == 5);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(seg.grid_values[k] == doctest::Approx(0.25 * static_cast<double>(k)));
}

TEST_CASE("the final partial step hits t_end exactly") {
    const NoiseTape tape = generate_tape(2, 1.0, 64, 1.0, {}, 1);
    const ModeDynamics dyn = affine_1d(0.0, 1.0, 0.0, 0.0);
    const Segment seg = euler_maruyama({0, {0.0}, 0.0, 0.9, 4, &tape}, dyn);
    CHECK(seg.grid_times.back() == 0.9);
    CHECK(seg.grid_times == std::vector<double>{0.0, 0.25, 0.5, 0.75, 0.9});
    CHECK(seg.grid_values.back() == doctest::Approx(0.9));
}

TEST_CASE("segment start value and times are exact") {
    const NoiseTape tape = generate_tape(3, 2.0, 128, 1.0, {}, 1);
    const ModeDynamics dyn = affine_1d(0.3, 0.1, 0.0, 0.25);
    const Segment seg = euler_maruyama({0, {1.25}, 0.5, 1.75, 8, &tape}, dyn);
    CHECK(seg.grid_values.front() == 1.25);
    CHECK(seg.grid_times.front() == 0.5);
    CHECK(seg.grid_times.back() == 1.75);
}

TEST_CASE("euler strong error against exact GBM decays at order one half") {
    const double mu = 0.05, sigma = 0.2;
    const std::uint64_t n_ref = 1024;
    const std::vector<std::uint64_t> levels = {16, 32, 64, 128, 256};
    const std::size_t paths = 64;
    std::map<int, AffineModeSpec> modes;
    modes[0] = {{{mu, 0.0}}, {{sigma, 0.0}}, std::nullopt};
    const ModeDynamics dyn = make_affine_dynamics(modes, 1);

    std::vector<double> medians;
    for (std::uint64_t n : levels) {
        std::vector<double> errs;
        for (std::size_t pi = 0; pi < paths; ++pi) {
            const NoiseTape tape = generate_tape(100, 1.0, n_ref, 1.0, {}, 1, pi);
            const Segment approx = euler_maruyama({0, {1.0}, 0.0, 1.0, n, &tape}, dyn);
            const Segment exact = exact_gbm({0, {1.0}, 0.0, 1.0, n, &tape}, mu, sigma);
            errs.push_back(sup_abs_diff(approx, exact));
        }
        std::sort(errs.begin(), errs.end());
        medians.push_back(errs[errs.size() / 2]);
    }
    const RateFit fit = fit_rate(levels, medians);
    CHECK(fit.slope > -0.75);
    CHECK(fit.slope < -0.3);
}

TEST_CASE("jump-adapted euler equals plain euler without events") {
    const NoiseTape tape = generate_tape(4, 1.0, 64, 1.0, {}, 1); // no cp stream
    const ModeDynamics plain = affine_1d(0.1, 0.0, 0.0, 0.3);
    ModeDynamics with_jumps = affine_1d(0.1, 0.0, 0.0, 0.3, true);
    NoiseTape tape_with_stream = tape;
    tape_with_stream.cp_specs.push_back({0.0, 0.5, 1.0, 1.0});
    tape_with_stream.cp_events.emplace_back(); // empty stream

    const Segment a = euler_maruyama({0, {1.0}, 0.0, 1.0, 16, &tape}, plain);
    const Segment b =
        jump_adapted_euler({0, {1.0}, 0.0, 1.0, 16, &tape_with_stream}, with_jumps);
    CHECK(a.grid_times == b.grid_times);
    CHECK(a.grid_values == b.grid_values);
}

TEST_CASE("a single multiplicative jump applies at the event time") {
    NoiseTape tape = generate_tape(5, 1.0, 16, 1.0, {}, 1);
    tape.cp_specs.push_back({1.0, 0.5, 0.2, 0.2});
    tape.cp_events.push_back({{0.4, 0.2}});
    // Zero drift/diffusion: only the jump acts.
    const ModeDynamics dyn = affine_1d(0.0, 0.0, 0.0, 0.0, true);
    std::vector<EuclidJump> jumps;
    const Segment seg = jump_adapted_euler({0, {1.0}, 0.0, 1.0, 4, &tape}, dyn, &jumps);
    REQUIRE(jumps.size() == 1);
    CHECK(jumps[0].time == 0.4);
    CHECK(jumps[0].pre_value == std::vector<double>{1.0});
    CHECK(jumps[0].post_value == std::vector<double>{1.2});
    // The event time is a grid node carrying the post value.
    auto it = std::find(seg.grid_times.begin(), seg.grid_times.end(), 0.4);
    REQUIRE(it != seg.grid_times.end());
    CHECK(seg.grid_values[static_cast<std::size_t>(it - seg.grid_times.begin())] == 1.2);
    CHECK(seg.grid_values.back() == 1.2);
}

TEST_CASE("an event on a grid node diffuses first, then jumps") {
    NoiseTape tape = generate_tape(6, 1.0, 4, 1.0, {}, 1);
    tape.cp_specs.push_back({1.0, 0.5, 0.2, 0.2});
    tape.cp_events.push_back({{0.5, 0.5}}); // exactly on the n=4 grid... n=2 grid node below
    const ModeDynamics dyn = affine_1d(0.0, 1.0, 0.0, 0.0, true); // dx = dt plus jumps
    std::vector<EuclidJump> jumps;
    const Segment seg = jump_adapted_euler({0, {1.0}, 0.0, 1.0, 2, &tape}, dyn, &jumps);
    REQUIRE(jumps.size() == 1);
    // Drift carries 1.0 -> 1.5 into the node, then the jump multiplies the
    // left limit: post = 1.5 + 1.5 * 0.5.
    CHECK(jumps[0].pre_value == std::vector<double>{1.5});
    CHECK(jumps[0].post_value == std::vector<double>{2.25});
    // No duplicated grid node.
    CHECK(std::count(seg.grid_times.begin(), seg.grid_times.end(), 0.5) == 1);
}

TEST_CASE("exact GBM closed forms") {
    const NoiseTape tape = generate_tape(7, 1.0, 32, 1.0, {}, 1);
    const Segment det = exact_gbm({0, {2.0}, 0.0, 1.0, 8, &tape}, 0.3, 0.0);
    for (std::size_t k = 0; k < det.size(); ++k)
        CHECK(det.grid_values[k] == doctest::Approx(2.0 * std::exp(0.3 * det.grid_times[k])));

    const Segment constant = exact_gbm({0, {2.0}, 0.0, 1.0, 8, &tape}, 0.0, 0.0);
    for (std::size_t k = 0; k < constant.size(); ++k) CHECK(constant.grid_values[k] == 2.0);
}

TEST_CASE("solver blow-up raises with the last finite time") {
    const NoiseTape tape = generate_tape(8, 1.0, 16, 1.0, {}, 1);
    const ModeDynamics dyn = affine_1d(1e200, 1e200, 0.0, 0.0);
    CHECK_THROWS_AS(euler_maruyama({0, {1.0}, 0.0, 1.0, 16, &tape}, dyn), SolverBlowupError);
    try {
        euler_maruyama({0, {1.0}, 0.0, 1.0, 16, &tape}, dyn);
    } catch (const SolverBlowupError& e) {
        CHECK(e.last_finite_time >= 0.0);
        CHECK(e.last_finite_time < 1.0);
    }
}

TEST_CASE("tape consumption depends on the interval, not the level") {
    const NoiseTape tape = generate_tape(9, 2.0, 64, 1.0, {}, 1);
    const double t0 = 0.25, t1 = 1.75;
    const std::size_t consumed = tape.index_at(t1) - tape.index_at(t0);
    CHECK(consumed == static_cast<std::size_t>((t1 - t0) * 64));
    // Every level reads the same fine span via prefix differences: the total
    // increment equals the fine-path difference no matter how it is split.
    for (std::uint64_t n : {1ull, 2ull, 8ull, 32ull}) {
        double total = 0.0;
        const double h = 1.0 / static_cast<double>(n);
        double t = t0;
        while (t < t1) {
            const double next = std::min(t1, t + h);
            total += tape.brownian_increment(0, t, next);
            t = next;
        }
        CHECK(total == doctest::Approx(tape.brownian_value(0, t1) - tape.brownian_value(0, t0))
                           .epsilon(1e-12));
    }
}

TEST_CASE("refinement coupling: doubling the level shrinks the change") {
    const double mu = 0.1, sigma = 0.3;
    std::map<int, AffineModeSpec> modes;
    modes[0] = {{{mu, 0.0}}, {{sigma, 0.0}}, std::nullopt};
    const ModeDynamics dyn = make_affine_dynamics(modes, 1);
    const std::uint64_t n_ref = 2048;
    std::vector<double> medians;
    for (std::uint64_t n = 2; n <= 1024; n *= 2) {
        std::vector<double> diffs;
        for (std::size_t pi = 0; pi < 100; ++pi) {
            const NoiseTape tape = generate_tape(314, 1.0, n_ref, 1.0, {}, 1, pi);
            const Segment coarse = euler_maruyama({0, {1.0}, 0.0, 1.0, n, &tape}, dyn);
            const Segment fine = euler_maruyama({0, {1.0}, 0.0, 1.0, 2 * n, &tape}, dyn);
            double m = 0.0;
            for (std::size_t k = 0; k < coarse.size(); ++k) {
                const auto it = std::lower_bound(fine.grid_times.begin(), fine.grid_times.end(),
                                                 coarse.grid_times[k]);
                const auto fk = static_cast<std::size_t>(it - fine.grid_times.begin());
                m = std::max(m, std::abs(coarse.grid_values[k] - fine.grid_values[fk]));
            }
            diffs.push_back(m);
        }
        std::sort(diffs.begin(), diffs.end());
        medians.push_back(diffs[diffs.size() / 2]);
    }
    int decreases = 0;
    for (std::size_t i = 1; i < medians.size(); ++i)
        if (medians[i] < medians[i - 1]) ++decreases;
    CHECK(decreases >= static_cast<int>(medians.size()) - 2);
    CHECK(medians.back() < 0.25 * medians.front());
}

TEST_CASE("request validation") {
    const NoiseTape tape = generate_tape(1, 1.0, 8, 1.0, {}, 1);
    const ModeDynamics dyn = affine_1d(0.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(euler_maruyama({0, {1.0}, 0.5, 0.5, 8, &tape}, dyn), std::domain_error);
    CHECK_THROWS_AS(euler_maruyama({0, {1.0}, 0.0, 1.0, 8, nullptr}, dyn), std::domain_error);
    CHECK_THROWS_AS(jump_adapted_euler({0, {1.0}, 0.0, 1.0, 8, &tape}, dyn), std::domain_error);
    CHECK_THROWS_AS(exact_gbm({0, {1.0, 2.0}, 0.0, 1.0, 8, &tape}, 0.1, 0.2), ConfigError);
}

} // TEST_SUITE
