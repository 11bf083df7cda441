// Microbenchmarks for the hot paths: tape generation, solver stepping, rate
// evaluation on a grown history, thinning, and full path simulation.

#include "hybridsim/engine.hpp"
#include "hybridsim/scenarios.hpp"

#include <benchmark/benchmark.h>

using namespace hybridsim;

namespace {

void BM_generate_tape(benchmark::State& state) {
    const auto n_ref = static_cast<std::uint64_t>(state.range(0));
    std::uint64_t path_index = 0;
    for (auto _ : state) {
        NoiseTape tape = generate_tape(42, 1.0, n_ref, 4.0, {}, 1, path_index++);
        benchmark::DoNotOptimize(tape.brownian[0].data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n_ref));
}
BENCHMARK(BM_generate_tape)->Arg(1 << 8)->Arg(1 << 12)->Arg(1 << 16);

void BM_euler_segment(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const NoiseTape tape = generate_tape(7, 1.0, n, 1.0, {}, 1);
    std::map<int, AffineModeSpec> modes;
    modes[0] = {{{0.05, 0.0}}, {{0.2, 0.0}}, std::nullopt};
    const ModeDynamics dyn = make_affine_dynamics(modes, 1);
    for (auto _ : state) {
        Segment seg = euler_maruyama({0, {1.0}, 0.0, 1.0, n, &tape}, dyn);
        benchmark::DoNotOptimize(seg.grid_values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_euler_segment)->Arg(1 << 8)->Arg(1 << 12)->Arg(1 << 16);

void BM_evaluate_rates_insurance(benchmark::State& state) {
    // Rate evaluation against a fully grown insurance history.
    const ModelSpec model = build_insurance();
    const NoiseTape tape = generate_tape(11, 10.0, 1024, model.lambda(), {}, 1);
    const SimulationResult run = simulate(model, 10.0, 1024, tape);
    for (auto _ : state) {
        RateRow row = evaluate_rates(model.intensity, 10.0, run.path);
        benchmark::DoNotOptimize(row.rates);
    }
}
BENCHMARK(BM_evaluate_rates_insurance);

void BM_thinning_decision(benchmark::State& state) {
    RateRow row{0, {{1, 0.4}, {2, 0.3}, {3, 0.2}}, 2.0};
    double u = 0.0;
    for (auto _ : state) {
        const MarkPartition part = canonical_partition(row);
        u += 0.37;
        if (u >= 2.0) u -= 2.0;
        benchmark::DoNotOptimize(apply_mark(part, u));
    }
}
BENCHMARK(BM_thinning_decision);

void BM_simulate_insurance_path(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const ModelSpec model = build_insurance();
    std::uint64_t path_index = 0;
    for (auto _ : state) {
        const NoiseTape tape =
            generate_tape(3, 1.0, n, model.lambda(), {}, 1, path_index++);
        SimulationResult run = simulate(model, 1.0, n, tape);
        benchmark::DoNotOptimize(run.path.segments.data());
    }
}
BENCHMARK(BM_simulate_insurance_path)->Arg(1 << 8)->Arg(1 << 12);

void BM_sup_distance_coupled(benchmark::State& state) {
    const ModelSpec model = build_insurance();
    const NoiseTape tape = generate_tape(5, 1.0, 4096, model.lambda(), {}, 1);
    const SimulationResult fine = simulate(model, 1.0, 4096, tape);
    const SimulationResult coarse = simulate(model, 1.0, 64, tape);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sup_distance(fine.path, coarse.path, 1.0));
    }
}
BENCHMARK(BM_sup_distance_coupled);

} // namespace

BENCHMARK_MAIN();
