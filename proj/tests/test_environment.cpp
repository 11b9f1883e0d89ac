#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gwlab/environment.hpp"

#include "dense_oracle.hpp"

using namespace gwlab;

namespace {
constexpr double kA = 1.3169578969248166;       // arccosh(2)
constexpr double kP = 0.9330127018922193;       // (2 + sqrt 3) / 4
}  // namespace

TEST_CASE("law parameters satisfy the defining moment conditions exactly") {
    for (int b : {2, 3, 5}) {
        const auto law = EnvironmentLaw::fixed_gaussian(b);
        const auto rep = law.verify_boundary_case(MomentMethod::ClosedForm);
        CHECK(std::abs(rep.m0.value - 1.0) < 1e-12);
        CHECK(std::abs(rep.m1.value) < 1e-12);
        CHECK(law.displacement_mean() == doctest::Approx(2.0 * std::log(b)).epsilon(1e-12));
        CHECK(law.displacement_var() == doctest::Approx(2.0 * std::log(b)).epsilon(1e-12));
        CHECK(law.sigma2() == doctest::Approx(2.0 * std::log(b)).epsilon(1e-12));
        CHECK(law.offspring_mean() == doctest::Approx(double(b)));
    }
    const auto tp = EnvironmentLaw::two_point();
    const auto rep = tp.verify_boundary_case(MomentMethod::ClosedForm);
    CHECK(std::abs(rep.m0.value - 1.0) < 1e-12);
    CHECK(std::abs(rep.m1.value) < 1e-12);
    CHECK(tp.jump() == doctest::Approx(kA).epsilon(1e-12));
    CHECK(tp.up_prob() == doctest::Approx(kP).epsilon(1e-12));
    CHECK(tp.sigma2() == doctest::Approx(kA * kA).epsilon(1e-12));
    CHECK(tp.offspring_mean() == doctest::Approx(2.0));

    const auto pg = EnvironmentLaw::poisson_gaussian(1.8);
    const auto prep = pg.verify_boundary_case(MomentMethod::ClosedForm);
    CHECK(std::abs(prep.m0.value - 1.0) < 1e-12);
    CHECK(std::abs(prep.m1.value) < 1e-12);
    CHECK(pg.sigma2() == doctest::Approx(2.0 * std::log(1.8)).epsilon(1e-12));
    CHECK(pg.offspring_mean() == doctest::Approx(1.8));
}

TEST_CASE("quadrature and Monte Carlo agree with the closed forms") {
    for (const auto& law : {EnvironmentLaw::fixed_gaussian(3), EnvironmentLaw::two_point(),
                            EnvironmentLaw::poisson_gaussian(1.6)}) {
        const auto q = law.verify_boundary_case(MomentMethod::Quadrature);
        CHECK(std::abs(q.m0.value - 1.0) < 1e-9);
        CHECK(std::abs(q.m1.value) < 1e-9);
        CHECK(std::abs(q.sigma2.value - law.sigma2()) < 1e-9);

        const auto mc = law.verify_boundary_case(MomentMethod::MonteCarlo, 100000);
        CHECK(mc.m0.sigma_distance(1.0) < 4.0);
        CHECK(mc.m1.sigma_distance(0.0) < 4.0);
        CHECK(mc.sigma2.sigma_distance(law.sigma2()) < 4.0);
    }
}

TEST_CASE("subcritical or malformed parameters are rejected") {
    CHECK_THROWS_AS(EnvironmentLaw::fixed_gaussian(1), LawError);
    CHECK_THROWS_AS(EnvironmentLaw::fixed_gaussian(0), LawError);
    CHECK_THROWS_AS(EnvironmentLaw::poisson_gaussian(1.0), LawError);
    CHECK_THROWS_AS(EnvironmentLaw::poisson_gaussian(0.4), LawError);
    CHECK_THROWS_AS(make_law(Family::FixedGaussian, 2.5), LawError);
    CHECK_NOTHROW(make_law(Family::TwoPoint));
    CHECK_THROWS(family_from_string("no-such-family"));
    CHECK(family_from_string(to_string(Family::PoissonGaussian)) == Family::PoissonGaussian);
}

TEST_CASE("empirical offspring statistics match the law") {
    const auto law = EnvironmentLaw::poisson_gaussian(1.8);
    Rng rng(99);
    std::vector<double> kids;
    MeanAccumulator count_acc, w1_acc;
    for (int i = 0; i < 20000; ++i) {
        law.sample_offspring(rng, kids);
        count_acc.add(static_cast<double>(kids.size()));
        double w1 = 0.0;
        for (double dv : kids) w1 += std::exp(-dv);
        w1_acc.add(w1);
    }
    CHECK(count_acc.estimate().sigma_distance(1.8) < 4.0);
    CHECK(w1_acc.estimate().sigma_distance(1.0) < 4.0);
}

TEST_CASE("arena realization is idempotent and independent of expansion order") {
    const auto law = EnvironmentLaw::two_point();
    TreeArena a(law, 12345, 0);
    TreeArena b(law, 12345, 0);

    const ChildRange ra = a.expand(a.root());
    const ChildRange rb = b.expand(b.root());
    REQUIRE(ra.count == rb.count);
    // a expands the root's children left to right, b right to left
    std::vector<VertexId> order_a, order_b;
    for (VertexId v : ra) order_a.push_back(v);
    for (VertexId v : rb) order_b.push_back(v);
    std::reverse(order_b.begin(), order_b.end());
    for (VertexId v : order_a) a.expand(v);
    for (VertexId v : order_b) b.expand(v);

    for (std::int32_t i = 0; i < ra.count; ++i) {
        const VertexId ca = ra[i], cb = rb[i];
        CHECK(a.at(ca).dv == b.at(cb).dv);
        const ChildRange ga = a.children_of(ca), gb = b.children_of(cb);
        REQUIRE(ga.count == gb.count);
        for (std::int32_t j = 0; j < ga.count; ++j)
            CHECK(a.at(ga[j]).dv == b.at(gb[j]).dv);
    }

    // re-expanding changes nothing
    const std::size_t sz = a.size();
    a.expand(a.root());
    a.expand(ra[0]);
    CHECK(a.size() == sz);
}

TEST_CASE("distinct seeds and replicas give distinct realizations") {
    const auto law = EnvironmentLaw::fixed_gaussian(2);
    TreeArena a(law, 1, 0), b(law, 2, 0), c(law, 1, 1);
    a.expand(a.root());
    b.expand(b.root());
    c.expand(c.root());
    CHECK(a.at(1).dv != b.at(1).dv);
    CHECK(a.at(1).dv != c.at(1).dv);
}

TEST_CASE("vertex records carry consistent path statistics") {
    const auto law = EnvironmentLaw::poisson_gaussian(1.8);
    TreeArena arena(law, 7, 0);
    oracle::grow_arena(arena, 400);
    for (VertexId x = 0; x < static_cast<VertexId>(arena.size()); ++x) {
        const auto& rec = arena.at(x);
        double vmax = 0.0, vmin = 0.0;
        std::int32_t depth = 0;
        for (VertexId u = x; u >= 0; u = arena.at(u).parent) {
            vmax = std::max(vmax, arena.at(u).v);
            vmin = std::min(vmin, arena.at(u).v);
            if (u != x) ++depth;
        }
        CHECK(rec.vbar == doctest::Approx(vmax).epsilon(1e-12));
        CHECK(rec.vmin == doctest::Approx(vmin).epsilon(1e-12));
        CHECK(rec.depth == depth);
        if (rec.parent >= 0)
            CHECK(rec.v == doctest::Approx(arena.at(rec.parent).v + rec.dv).epsilon(1e-12));
        if (arena.is_expanded(x))
            CHECK(arena.recompute_lambda(x) == doctest::Approx(rec.lambda).epsilon(1e-12));
    }
}

TEST_CASE("transition probabilities form a distribution and match conductances") {
    const auto law = EnvironmentLaw::two_point();
    TreeArena arena(law, 31, 0);
    oracle::grow_arena(arena, 200);
    bool saw_mixed_pair = false;
    for (VertexId x = 0; x < static_cast<VertexId>(arena.size()); ++x) {
        if (!arena.is_expanded(x)) continue;
        const Transition t = arena.transition_probs(x);
        double total = t.p_parent;
        for (const auto& [c, p] : t.children) {
            total += p;
            CHECK(p == doctest::Approx(std::exp(-arena.at(c).dv) /
                                       (1.0 + arena.at(x).lambda)).epsilon(1e-12));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        // a vertex whose two children move +a and -a: Lambda = 2 cosh a = 4
        const ChildRange kids = arena.children_of(x);
        if (kids.count == 2 && arena.at(kids[0]).dv * arena.at(kids[1]).dv < 0.0) {
            saw_mixed_pair = true;
            CHECK(t.p_parent == doctest::Approx(0.2).epsilon(1e-12));
        }
    }
    CHECK(saw_mixed_pair);
}
