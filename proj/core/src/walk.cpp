#include "gwlab/walk.hpp"

#include <algorithm>
#include <cmath>

namespace gwlab {

void step(TreeArena& arena, WalkState& state, Rng& rng) {
    ++state.n_steps;
    if (state.at_parent_of_root) {
        // reflecting: the only move is back to the root
        state.at_parent_of_root = false;
        state.vertex = arena.root();
        return;
    }
    arena.expand(state.vertex);
    const auto& rec = arena.at(state.vertex);
    const double denom = 1.0 + rec.lambda;
    double u = rng.uniform() * denom;
    if (u < 1.0) {
        // move to parent
        if (state.vertex == arena.root()) {
            state.at_parent_of_root = true;
            ++state.root_parent_hits;
        } else {
            state.vertex = rec.parent;
        }
        return;
    }
    u -= 1.0;
    const ChildRange kids = arena.children_of(state.vertex);
    VertexId chosen = kids[kids.count - 1];  // guard against round-off
    for (VertexId c : kids) {
        const double w = std::exp(-arena.at(c).dv);
        if (u < w) { chosen = c; break; }
        u -= w;
    }
    state.vertex = chosen;
    const auto& crec = arena.at(chosen);
    state.max_v = std::max(state.max_v, crec.v);
    state.max_depth = std::max(state.max_depth, crec.depth);
}

ExcursionRun run_excursions(TreeArena& arena, std::uint64_t n_excursions, double probe_r,
                            Rng& rng, std::uint64_t step_budget) {
    ExcursionRun run;
    WalkState state;
    std::uint64_t exc_start_step = 0;
    double exc_max_v = 0.0;
    std::int32_t exc_max_depth = 0;

    while (state.root_parent_hits < n_excursions) {
        if (state.n_steps >= step_budget) {
            run.truncated = true;
            break;
        }
        const std::uint64_t hits_before = state.root_parent_hits;
        step(arena, state, rng);
        if (!state.at_parent_of_root) {
            const auto& rec = arena.at(state.vertex);
            exc_max_v = std::max(exc_max_v, rec.v);
            exc_max_depth = std::max(exc_max_depth, rec.depth);
        }
        if (state.root_parent_hits != hits_before) {
            ExcursionRecord rec;
            rec.index = hits_before;
            rec.length = state.n_steps - exc_start_step;
            rec.max_v = exc_max_v;
            rec.max_depth = exc_max_depth;
            rec.hit_probe = exc_max_v >= probe_r;
            run.excursions.push_back(rec);
            exc_start_step = state.n_steps;
            exc_max_v = 0.0;
            exc_max_depth = 0;
        }
    }
    run.total_steps = state.n_steps;
    return run;
}

namespace {

TrajectorySummary summarize(const TreeArena& arena, const WalkState& state,
                            std::uint64_t n_steps) {
    TrajectorySummary s;
    s.n_steps = n_steps;
    s.max_v = state.max_v;
    s.max_depth = state.max_depth;
    if (state.at_parent_of_root) {
        s.final_v = 0.0;
        s.final_depth = -1;
    } else {
        s.final_v = arena.at(state.vertex).v;
        s.final_depth = arena.at(state.vertex).depth;
    }
    s.excursion_count = state.root_parent_hits;
    const double ln = std::log(static_cast<double>(n_steps));
    s.ratio_v = s.max_v / (ln * ln);
    s.ratio_depth = static_cast<double>(s.max_depth) / (ln * ln * ln);
    return s;
}

}  // namespace

TrajectorySummary run_steps(TreeArena& arena, std::uint64_t n_steps, Rng& rng) {
    WalkState state;
    for (std::uint64_t i = 0; i < n_steps; ++i) step(arena, state, rng);
    return summarize(arena, state, n_steps);
}

std::vector<TrajectorySummary> run_steps_checkpointed(TreeArena& arena,
                                                      std::span<const std::uint64_t> checkpoints,
                                                      Rng& rng) {
    std::vector<TrajectorySummary> out;
    WalkState state;
    std::uint64_t done = 0;
    for (std::uint64_t n : checkpoints) {
        for (; done < n; ++done) step(arena, state, rng);
        out.push_back(summarize(arena, state, n));
    }
    return out;
}

}  // namespace gwlab
