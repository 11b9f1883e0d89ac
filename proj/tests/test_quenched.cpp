#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "gwlab/quenched.hpp"

#include "dense_oracle.hpp"

using namespace gwlab;

TEST_CASE("hitting probabilities equal the reciprocal exponential path sum") {
    for (auto law : {EnvironmentLaw::two_point(), EnvironmentLaw::poisson_gaussian(1.8)}) {
        TreeArena arena(law, 101, 0);
        oracle::grow_arena(arena, 300);
        for (VertexId x = 0; x < static_cast<VertexId>(arena.size()); ++x) {
            const double p = hit_prob_vertex(arena, x);
            CHECK(p == doctest::Approx(oracle::hit_prob_direct(arena, x)).epsilon(1e-12));
            CHECK(p > 0.0);
            CHECK(p <= 1.0);
        }
    }
}

TEST_CASE("hitting probabilities from an interior start are path-sum ratios") {
    const auto law = EnvironmentLaw::fixed_gaussian(2);
    TreeArena arena(law, 55, 0);
    oracle::grow_arena(arena, 300);
    const VertexId x = static_cast<VertexId>(arena.size()) - 1;
    CHECK(hit_prob_from(arena, x, x) == doctest::Approx(1.0));
    double num = 0.0, den = 0.0;
    for (VertexId u = x; u >= 0; u = arena.at(u).parent) den += std::exp(arena.at(u).v);
    for (VertexId y = arena.at(x).parent; y >= 0; y = arena.at(y).parent) {
        num = 0.0;
        for (VertexId u = y; u >= 0; u = arena.at(u).parent) num += std::exp(arena.at(u).v);
        CHECK(hit_prob_from(arena, y, x) == doctest::Approx(num / den).epsilon(1e-12));
    }
    // siblings are not ancestors
    const ChildRange kids = arena.children_of(arena.root());
    if (kids.count >= 2)
        CHECK_THROWS_AS((void)hit_prob_from(arena, kids[0], kids[1]), std::invalid_argument);
}

TEST_CASE("path sums hundreds of nats deep stay finite and accurate") {
    // follow the steepest child; the Gaussian drift pushes V up ~2.2 nats per
    // level, so depth 400 reaches ~800 nats where naive e^V overflows
    const auto law = EnvironmentLaw::fixed_gaussian(3);
    TreeArena arena(law, 2024, 0);
    VertexId x = arena.root();
    while (arena.at(x).v < 800.0) {
        const ChildRange kids = arena.expand(x);
        REQUIRE(!kids.empty());
        VertexId best = kids[0];
        for (VertexId c : kids)
            if (arena.at(c).v > arena.at(best).v) best = c;
        x = best;
    }
    const double lps = log_path_sum(arena, x);
    CHECK(std::isfinite(lps));
    // shifted direct evaluation as an independent reference
    const double shift = arena.at(x).vbar;
    double s = 0.0;
    for (VertexId u = x; u >= 0; u = arena.at(u).parent) s += std::exp(arena.at(u).v - shift);
    CHECK(lps == doctest::Approx(shift + std::log(s)).epsilon(1e-12));
    CHECK(lps >= 800.0);
}

TEST_CASE("stopping lines are first-passage antichains") {
    int nonextinct = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const auto law = rep % 2 ? EnvironmentLaw::two_point()
                                 : EnvironmentLaw::poisson_gaussian(1.8);
        TreeArena arena(law, 600 + rep, 0);
        const double r = 3.0;
        const StoppingLine line = stopping_line(arena, r, 200);
        if (line.extinct) {
            CHECK(line.members.empty());
            continue;
        }
        ++nonextinct;
        std::unordered_set<VertexId> members;
        for (const auto& m : line.members) members.insert(m.vertex);
        for (const auto& m : line.members) {
            CHECK(m.v >= r);
            CHECK(m.overshoot == doctest::Approx(m.v - r));
            CHECK(arena.at(m.vertex).depth == m.depth);
            // every strict ancestor sits below the level, so none is a member
            for (VertexId u = arena.at(m.vertex).parent; u >= 0; u = arena.at(u).parent) {
                CHECK(arena.at(u).v < r);
                CHECK(!members.count(u));
            }
        }
        CHECK(line.truncated == !line.truncated_at.empty());
    }
    CHECK(nonextinct > 20);
}

TEST_CASE("single-vertex absorption matches the closed-form hitting probability") {
    int pairs = 0;
    for (int rep = 0; rep < 20 && pairs < 1000; ++rep) {
        const auto law = rep % 2 ? EnvironmentLaw::fixed_gaussian(2)
                                 : EnvironmentLaw::two_point();
        TreeArena arena(law, 900 + rep, 0);
        oracle::grow_arena(arena, 120);
        for (VertexId x = 1; x < static_cast<VertexId>(arena.size()) && pairs < 1000; ++x) {
            const VertexId set[] = {x};
            CHECK(absorb_prob(arena, set) ==
                  doctest::Approx(hit_prob_vertex(arena, x)).epsilon(1e-12));
            ++pairs;
        }
    }
    CHECK(pairs == 1000);
}

TEST_CASE("antichain absorption matches a dense linear solve") {
    Rng pick(12);
    int cases = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto law = rep % 3 ? EnvironmentLaw::two_point()
                                 : EnvironmentLaw::poisson_gaussian(1.7);
        TreeArena arena(law, 3000 + rep, 0);
        const auto leaves = oracle::grow_arena(arena, 20 + rep % 30);
        if (arena.size() > 50 || leaves.empty()) continue;
        // a random nonempty subset of leaves is an antichain
        std::vector<VertexId> chosen;
        for (VertexId l : leaves)
            if (pick.bernoulli(0.6)) chosen.push_back(l);
        if (chosen.empty()) chosen.push_back(leaves[0]);
        const double fast = absorb_prob(arena, chosen);
        const double slow = oracle::absorb_prob_dense(arena, chosen);
        CHECK(std::abs(fast - slow) < 1e-10);
        ++cases;
    }
    CHECK(cases >= 100);
}

TEST_CASE("absorption probability is monotone in the barrier level") {
    const auto law = EnvironmentLaw::two_point();
    TreeArena arena(law, 77, 0);
    // expand fully to depth 7
    std::vector<std::vector<VertexId>> levels{{arena.root()}};
    for (int d = 0; d < 7; ++d) {
        std::vector<VertexId> next;
        for (VertexId v : levels.back())
            for (VertexId c : arena.expand(v)) next.push_back(c);
        levels.push_back(std::move(next));
    }
    double prev = 1.0;
    for (int d = 1; d <= 7; ++d) {
        const double p = absorb_prob(arena, levels[static_cast<std::size_t>(d)]);
        CHECK(p <= prev + 1e-15);
        CHECK(p > 0.0);
        prev = p;
    }
}

TEST_CASE("level-crossing probabilities decay with r and bracket correctly") {
    const auto law = EnvironmentLaw::two_point();
    TreeArena arena(law, 424, 0);
    const double rs[] = {2.0, 4.0, 6.0, 8.0};
    const GammaCurve curve = gamma_r_curve(arena, rs, 28);
    REQUIRE(curve.points.size() == 4);
    double prev_lo = 1.0, prev_hi = 1.0;
    for (const auto& p : curve.points) {
        CHECK(p.gamma_lower <= p.gamma_upper + 1e-15);
        CHECK(p.gamma_lower <= prev_lo + 1e-15);
        CHECK(p.gamma_upper <= prev_hi + 1e-15);
        CHECK(p.gamma_upper <= 1.0);
        prev_lo = p.gamma_lower;
        prev_hi = p.gamma_upper;
    }

    // widening the depth cap tightens the bracket
    TreeArena a1(law, 424, 0), a2(law, 424, 0);
    const double rr[] = {6.0};
    const auto narrow = gamma_r_curve(a1, rr, 20).points[0];
    const auto wide = gamma_r_curve(a2, rr, 40).points[0];
    CHECK(wide.gamma_upper - wide.gamma_lower <=
          narrow.gamma_upper - narrow.gamma_lower + 1e-15);
    CHECK(wide.gamma_lower >= narrow.gamma_lower - 1e-15);
    CHECK(wide.gamma_upper <= narrow.gamma_upper + 1e-15);
}

TEST_CASE("the streaming solver reproduces the materialized arena bracket") {
    for (auto law : {EnvironmentLaw::two_point(), EnvironmentLaw::poisson_gaussian(1.8)}) {
        TreeArena arena(law, 31337, 2);
        const std::uint64_t root_stream = arena.at(arena.root()).stream;
        const double rs[] = {3.0, 5.0, 7.0};
        const GammaCurve mat = gamma_r_curve(arena, rs, 24);
        for (std::size_t i = 0; i < 3; ++i) {
            const GammaPoint st = gamma_bracket_streaming(law, root_stream, rs[i], 24);
            CHECK(st.gamma_lower ==
                  doctest::Approx(mat.points[i].gamma_lower).epsilon(1e-9));
            CHECK(st.gamma_upper ==
                  doctest::Approx(mat.points[i].gamma_upper).epsilon(1e-9));
            CHECK(st.line_size == mat.points[i].line_size);
        }
    }
}

TEST_CASE("ladder grids validate parameters and shrink toward the top") {
    CHECK_THROWS_AS(LadderGrid(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(LadderGrid(10.0, 0.4, 0.6), std::invalid_argument);   // chi < theta
    CHECK_THROWS_AS(LadderGrid(10.0, 0.75, 0.5), std::invalid_argument);  // theta = 1/2
    CHECK_THROWS_AS(LadderGrid(10.0, 0.75, 0.6, 10.0, 0.0), std::invalid_argument);

    const LadderGrid g(64.0, 0.75, 0.6, 10.0, 0.5, 0.1);
    CHECK(g.k >= 1);
    CHECK(g.level(0) == 0.0);
    CHECK(g.level(g.k) == doctest::Approx(64.0));
    CHECK(g.width(1) == doctest::Approx(std::sqrt(2.0 * 64.0)));
    for (std::int64_t m = 1; m < g.k; ++m) CHECK(g.width(m + 1) < g.width(m));
    CHECK(g.depth_limit() == static_cast<std::int64_t>(std::floor(std::exp(0.1 * 8.0))));
}

TEST_CASE("the restricted line is the corridor-filtered subset of the full line") {
    const auto law = EnvironmentLaw::two_point();
    const double r = 6.0;
    for (int rep = 0; rep < 5; ++rep) {
        TreeArena arena(law, 5000 + rep, 0);
        const LadderGrid grid(r, 0.75, 0.6, 10.0, 2.0, 2.0);
        const RestrictedLine rl = restricted_line(arena, grid, 300);

        TreeArena twin(law, 5000 + rep, 0);
        const StoppingLine full = stopping_line(twin, r, 300);
        CHECK(rl.full_line_size == full.members.size());

        std::unordered_set<VertexId> full_set;
        for (const auto& m : full.members) full_set.insert(m.vertex);
        double mean = 0.0;
        for (const auto& m : rl.members) {
            CHECK(full_set.count(m.vertex) == 1);
            mean += hit_prob_vertex(arena, m.vertex);
        }
        CHECK(rl.members.size() <= full.members.size());
        CHECK(rl.exact_mean == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("embedded tree census rejects bad parameters and reports sane counts") {
    const auto law = EnvironmentLaw::two_point();
    TreeArena bad(law, 1, 0);
    CHECK_THROWS_AS(embedded_tree_census(bad, 4, 0.6, 3.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(embedded_tree_census(bad, 4, 0.4, -1.0, 2), std::invalid_argument);

    int held = 0, total = 0;
    for (int rep = 0; rep < 10; ++rep) {
        TreeArena arena(law, 7100 + rep, 0);
        const auto census = embedded_tree_census(arena, 4, 0.4, 3.0, 4);
        REQUIRE(!census.budget_exceeded);
        CHECK(census.generation_sizes.size() == 4);
        for (const auto& c : census.checks) {
            CHECK(c.surviving_g_n <= census.generation_sizes[static_cast<std::size_t>(c.n - 1)]);
            ++total;
            if (c.inequality_holds) ++held;
        }
    }
    CHECK(total > 0);
    CHECK(held == total);
}

TEST_CASE("least-squares slope recovers an exact line") {
    const double x[] = {1.0, 2.0, 3.0, 4.0};
    const double y[] = {0.5, 2.5, 4.5, 6.5};
    CHECK(ols_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}
