#include <benchmark/benchmark.h>

#include "gwlab/quenched.hpp"
#include "gwlab/rw1d.hpp"
#include "gwlab/spine.hpp"
#include "gwlab/walk.hpp"

using namespace gwlab;

namespace {

void BM_walk_steps(benchmark::State& state) {
    const auto law = EnvironmentLaw::two_point();
    TreeArena arena(law, 1, 0);
    Rng rng(2);
    WalkState ws;
    for (auto _ : state) {
        step(arena, ws, rng);
        benchmark::DoNotOptimize(ws.vertex);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_walk_steps);

void BM_arena_expand(benchmark::State& state) {
    const auto law = EnvironmentLaw::poisson_gaussian(1.8);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        TreeArena arena(law, ++seed, 0);
        std::vector<VertexId> frontier{arena.root()};
        while (!frontier.empty() && arena.size() < 4000) {
            std::vector<VertexId> next;
            for (VertexId v : frontier)
                for (VertexId c : arena.expand(v)) next.push_back(c);
            frontier = std::move(next);
        }
        benchmark::DoNotOptimize(arena.size());
    }
}
BENCHMARK(BM_arena_expand);

void BM_absorb_prob(benchmark::State& state) {
    const auto law = EnvironmentLaw::two_point();
    TreeArena arena(law, 7, 0);
    const StoppingLine line = stopping_line(arena, 4.0, 200);
    std::vector<VertexId> members;
    for (const auto& m : line.members) members.push_back(m.vertex);
    for (auto _ : state) {
        benchmark::DoNotOptimize(absorb_prob(arena, members));
    }
}
BENCHMARK(BM_absorb_prob);

void BM_gamma_streaming(benchmark::State& state) {
    const auto law = EnvironmentLaw::two_point();
    const auto depth_cap = static_cast<std::int32_t>(state.range(0));
    std::uint64_t stream = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gamma_bracket_streaming(law, ++stream, 8.0, depth_cap));
    }
}
BENCHMARK(BM_gamma_streaming)->Arg(16)->Arg(24);

void BM_spine_step(benchmark::State& state) {
    const auto law = EnvironmentLaw::fixed_gaussian(3);
    Rng rng(5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_spine_step(law, rng));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_spine_step);

void BM_corridor_dp(benchmark::State& state) {
    const auto lattice = StepLaw1D::simple_lattice();
    for (auto _ : state) {
        benchmark::DoNotOptimize(corridor_prob(lattice, 400.0, 10.0, CorridorMode::WithFloor,
                                               CorridorMethod::LatticeDp));
    }
}
BENCHMARK(BM_corridor_dp);

}  // namespace

BENCHMARK_MAIN();
