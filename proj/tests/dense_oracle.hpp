#pragma once

// Brute-force oracles shared by the unit and acceptance suites. Everything
// here is deliberately naive: dense Gaussian elimination on the explicit
// transition matrix, direct summation without log-space tricks.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gwlab/environment.hpp"
#include "gwlab/quenched.hpp"

namespace oracle {

// Solves A h = b in place; A is n x n row-major. Partial pivoting.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        const double d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
        x[ri] = s / a[ri * n + ri];
    }
    return x;
}

// P{hit the absorbing antichain before the vertex above the root} from the
// root, by a dense solve on the conductance chain over the realized arena.
// Unexpanded leaves have only the edge back to their parent, matching the
// finite-network convention of the log-space solver under test.
inline double absorb_prob_dense(const gwlab::TreeArena& arena,
                                std::span<const gwlab::VertexId> absorbing) {
    using gwlab::VertexId;
    const std::size_t n = arena.size();
    std::vector<int> state(n, -1);  // interior state index, -2 absorbing-at-1
    for (VertexId a : absorbing) state[static_cast<std::size_t>(a)] = -2;
    // interior = every vertex that is not absorbing and not below a member
    std::vector<VertexId> interior;
    for (std::size_t i = 0; i < n; ++i) {
        if (state[i] == -2) continue;
        // skip vertices with an absorbing strict ancestor (unreachable)
        bool below = false;
        for (VertexId u = arena.at(static_cast<VertexId>(i)).parent; u >= 0;
             u = arena.at(u).parent)
            if (state[static_cast<std::size_t>(u)] == -2) { below = true; break; }
        if (below) continue;
        state[i] = static_cast<int>(interior.size());
        interior.push_back(static_cast<VertexId>(i));
    }
    const std::size_t m = interior.size();
    if (m == 0) return 1.0;  // the root itself is absorbing
    std::vector<double> a(m * m, 0.0), rhs(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const VertexId x = interior[r];
        const auto& rec = arena.at(x);
        // conductances: parent edge e^{-V(x)} (root: 1 up to the reflector),
        // child edges e^{-V(c)}
        const double c_up = std::exp(-rec.v);
        double total = c_up;
        std::vector<std::pair<VertexId, double>> nb;
        for (VertexId c : arena.children_of(x)) {
            const double w = std::exp(-arena.at(c).v);
            nb.emplace_back(c, w);
            total += w;
        }
        a[r * m + r] = 1.0;
        // parent neighbor: reflector contributes h = 0
        if (x != arena.root()) {
            const int ps = state[static_cast<std::size_t>(rec.parent)];
            if (ps >= 0)
                a[r * m + static_cast<std::size_t>(ps)] -= c_up / total;
            else if (ps == -2)
                rhs[r] += c_up / total;
        }
        for (auto [c, w] : nb) {
            const int cs = state[static_cast<std::size_t>(c)];
            if (cs >= 0)
                a[r * m + static_cast<std::size_t>(cs)] -= w / total;
            else if (cs == -2)
                rhs[r] += w / total;
        }
    }
    const std::vector<double> h = solve_dense(std::move(a), std::move(rhs));
    return h[static_cast<std::size_t>(state[static_cast<std::size_t>(arena.root())])];
}

// direct (non log-space) evaluation of 1 / sum_{u in [[root, x]]} e^{V(u)}
inline double hit_prob_direct(const gwlab::TreeArena& arena, gwlab::VertexId x) {
    double s = 0.0;
    for (gwlab::VertexId u = x; u >= 0; u = arena.at(u).parent) s += std::exp(arena.at(u).v);
    return 1.0 / s;
}

// expands the arena breadth-first until it holds at least min_vertices (or
// the frontier dies); returns the realized leaf set
inline std::vector<gwlab::VertexId> grow_arena(gwlab::TreeArena& arena,
                                               std::size_t min_vertices) {
    std::vector<gwlab::VertexId> frontier{arena.root()};
    while (!frontier.empty() && arena.size() < min_vertices) {
        std::vector<gwlab::VertexId> next;
        for (gwlab::VertexId v : frontier) {
            for (gwlab::VertexId c : arena.expand(v)) next.push_back(c);
            if (arena.size() >= min_vertices) break;
        }
        frontier = std::move(next);
    }
    std::vector<gwlab::VertexId> leaves;
    for (gwlab::VertexId v = 0; v < static_cast<gwlab::VertexId>(arena.size()); ++v)
        if (!arena.is_expanded(v) || arena.children_of(v).empty()) leaves.push_back(v);
    return leaves;
}

}  // namespace oracle
