#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gwlab/environment.hpp"

namespace gwlab {

// First-passage antichain over potential level r (members have V >= r, all
// strict ancestors have path-max < r).
struct StoppingLineMember {
    VertexId vertex;
    double v;
    std::int32_t depth;
    double overshoot;  // v - r
};

struct StoppingLine {
    double r = 0.0;
    std::vector<StoppingLineMember> members;
    std::vector<VertexId> truncated_at;  // sub-barrier vertices cut at depth_cap
    bool truncated = false;
    bool extinct = false;  // realized tree died below the level
};

// log(sum_{u in [[root, x]]} e^{V(u)}), accumulated stably
double log_path_sum(const TreeArena& arena, VertexId x);

// P_omega{T_x < T_{parent-of-root}} = 1 / sum_{u in [[root,x]]} e^{V(u)}
double hit_prob_vertex(const TreeArena& arena, VertexId x);

// same started from an ancestor y of x (ratio of path sums)
double hit_prob_from(const TreeArena& arena, VertexId y, VertexId x);

StoppingLine stopping_line(TreeArena& arena, double r, std::int32_t depth_cap);

// Exact Dirichlet solve: probability of hitting the antichain `absorbing`
// before the vertex above the root. Conductance of the edge into x is
// e^{-V(x)}; computed in log space throughout.
double absorb_prob(const TreeArena& arena, std::span<const VertexId> absorbing);

struct GammaPoint {
    double r = 0.0;
    double gamma_lower = 0.0;   // truncated branches dropped
    double gamma_upper = 0.0;   // truncation boundary treated as absorbing
    std::uint64_t line_size = 0;
    std::int32_t depth_cap = 0;
    bool truncated = false;
};

struct GammaCurve {
    std::vector<GammaPoint> points;
    double slope = 0.0;  // OLS of log gamma against -(2r)^{1/2}
};

// gamma_r over an increasing r grid on one arena (materializing solver)
GammaCurve gamma_r_curve(TreeArena& arena, std::span<const double> r_list,
                         std::int32_t depth_cap);

// Same quantity computed by a streaming depth-first pass that never stores
// the realized tree; reproduces the arena realization exactly because both
// derive child samples from the same per-vertex streams.
GammaPoint gamma_bracket_streaming(const EnvironmentLaw& law, std::uint64_t root_stream,
                                   double r, std::int32_t depth_cap);
GammaCurve gamma_r_curve_streaming(const EnvironmentLaw& law, std::uint64_t root_stream,
                                   std::span<const double> r_list, std::int32_t depth_cap);

// Discretization grid used by the restricted line: k ladder levels h_m with
// drawdown widths lambda_m shrinking toward the top.
struct LadderGrid {
    double r = 0.0;
    double chi = 0.75;
    double theta = 0.6;
    double beta = 10.0;
    double eps = 0.5;
    double eps1 = 0.1;
    std::int64_t k = 0;

    LadderGrid(double r, double chi = 0.75, double theta = 0.6, double beta = 10.0,
               double eps = 0.5, double eps1 = 0.1);

    double level(std::int64_t m) const { return r * static_cast<double>(m) / static_cast<double>(k); }
    double width(std::int64_t m) const;  // lambda_m
    std::int64_t depth_limit() const;    // floor(e^{eps1 sqrt r})
};

struct RestrictedLine {
    LadderGrid grid;
    std::vector<StoppingLineMember> members;  // surviving subset of the full line
    std::uint64_t full_line_size = 0;
    double exact_mean = 0.0;  // E_omega(Z_r) = sum of member hit probabilities
    bool truncated = false;
};

// filters the full first-passage line by the ladder-overshoot, floor, length,
// drawdown-corridor and Lambda conditions; returns the exact quenched first
// moment of the restricted hit count
RestrictedLine restricted_line(TreeArena& arena, const LadderGrid& grid,
                               std::int32_t depth_cap);

struct EmbeddedTreeCensus {
    std::int64_t block_len = 0;  // L
    double alpha = 0.0;
    double c4 = 0.0;
    std::vector<std::uint64_t> generation_sizes;  // |G_n| for n = 1..n_levels
    // per probe level s: |K_s| and the count of G_n vertices with a
    // descendant in G_{2n+2}
    struct LevelCheck {
        double s = 0.0;
        std::int64_t n = 0;
        std::uint64_t k_s_size = 0;
        std::uint64_t surviving_g_n = 0;
        bool inequality_holds = false;
    };
    std::vector<LevelCheck> checks;
    bool budget_exceeded = false;
};

// realizes the block-embedded supercritical tree (blocks of L generations,
// per-block potential gain >= L^alpha, running max < 2 L^alpha, product of
// (1 + Lambda) <= e^{c4 L}) and checks the antichain-count inequality
EmbeddedTreeCensus embedded_tree_census(TreeArena& arena, std::int64_t block_len, double alpha,
                                        double c4, std::int64_t n_levels,
                                        std::uint64_t vertex_budget = 50000000ULL);

// least-squares slope of y over x
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace gwlab
