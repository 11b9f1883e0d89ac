#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gwlab/environment.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

// Quenched Markov chain state on one arena. The walk starts at the root; the
// vertex above the root is purely reflecting (one deterministic step back).
struct WalkState {
    VertexId vertex = 0;
    bool at_parent_of_root = false;
    std::uint64_t n_steps = 0;
    double max_v = 0.0;          // running max of V(X_k)
    std::int32_t max_depth = 0;  // running max of |X_k|
    std::uint64_t root_parent_hits = 0;  // excursion index
};

struct ExcursionRecord {
    std::uint64_t index = 0;
    std::uint64_t length = 0;       // steps in the excursion
    double max_v = 0.0;
    std::int32_t max_depth = 0;
    bool hit_probe = false;         // reached potential level >= probe_r
};

struct TrajectorySummary {
    std::uint64_t n_steps = 0;
    double max_v = 0.0;
    std::int32_t max_depth = 0;
    double final_v = 0.0;
    std::int32_t final_depth = 0;
    std::uint64_t excursion_count = 0;  // hits of the vertex above the root
    double ratio_v = 0.0;               // max_v / (log n)^2
    double ratio_depth = 0.0;           // max_depth / (log n)^3
};

struct ExcursionRun {
    std::vector<ExcursionRecord> excursions;
    bool truncated = false;  // step budget hit before the requested count
    std::uint64_t total_steps = 0;
};

// one transition; expands lazily as needed
void step(TreeArena& arena, WalkState& state, Rng& rng);

// simulate until the n-th visit to the vertex above the root (or the step
// budget runs out, reported via `truncated`)
ExcursionRun run_excursions(TreeArena& arena, std::uint64_t n_excursions, double probe_r,
                            Rng& rng, std::uint64_t step_budget = 1000000000ULL);

TrajectorySummary run_steps(TreeArena& arena, std::uint64_t n_steps, Rng& rng);

// one trajectory, summarized at each checkpoint (ascending); summaries share
// the path, so cross-n comparisons see the same environment and noise
std::vector<TrajectorySummary> run_steps_checkpointed(TreeArena& arena,
                                                      std::span<const std::uint64_t> checkpoints,
                                                      Rng& rng);

}  // namespace gwlab
