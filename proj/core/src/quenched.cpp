#include "gwlab/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "gwlab/logsum.hpp"

namespace gwlab {

double log_path_sum(const TreeArena& arena, VertexId x) {
    // sum of e^{V(u)} over the path, root included (V = 0)
    double acc = kNegInf;
    for (VertexId u = x; u != kParentOfRoot; u = arena.at(u).parent)
        acc = log_add(acc, arena.at(u).v);
    return acc;
}

double hit_prob_vertex(const TreeArena& arena, VertexId x) {
    return std::exp(-log_path_sum(arena, x));
}

double hit_prob_from(const TreeArena& arena, VertexId y, VertexId x) {
    // y must lie on [[root, x]]
    VertexId u = x;
    while (u != kParentOfRoot && u != y) u = arena.at(u).parent;
    if (u != y)
        throw std::invalid_argument("hit_prob_from: y is not an ancestor-or-self of x");
    return std::exp(log_path_sum(arena, y) - log_path_sum(arena, x));
}

StoppingLine stopping_line(TreeArena& arena, double r, std::int32_t depth_cap) {
    if (!(r > 0.0)) throw std::invalid_argument("stopping_line: r must be > 0");
    StoppingLine line;
    line.r = r;
    std::vector<VertexId> stack{arena.root()};
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (VertexId c : arena.expand(v)) {
            const auto& rec = arena.at(c);
            if (rec.v >= r) {
                line.members.push_back({c, rec.v, rec.depth, rec.v - r});
            } else if (rec.depth >= depth_cap) {
                line.truncated_at.push_back(c);
                line.truncated = true;
            } else {
                stack.push_back(c);
            }
        }
    }
    line.extinct = line.members.empty() && line.truncated_at.empty();
    return line;
}

namespace {

// log effective conductance from each vertex into the absorbing set; -inf if
// the subtree does not reach it, +inf on absorbing vertices
double log_conductance_to(const TreeArena& arena, const std::unordered_set<VertexId>& absorbing) {
    if (absorbing.count(arena.root())) return INFINITY;
    // iterative post-order over the expanded arena
    std::unordered_map<VertexId, double> lg;
    std::vector<std::pair<VertexId, bool>> stack{{arena.root(), false}};
    while (!stack.empty()) {
        auto [v, processed] = stack.back();
        stack.pop_back();
        if (processed) {
            double acc = kNegInf;
            for (VertexId c : arena.children_of(v)) {
                double child_lg;
                if (absorbing.count(c)) {
                    child_lg = INFINITY;
                } else {
                    auto it = lg.find(c);
                    child_lg = it == lg.end() ? kNegInf : it->second;
                }
                if (child_lg == kNegInf) continue;
                // series of edge conductance e^{-V(c)} and subtree conductance
                const double series = std::isinf(child_lg) && child_lg > 0
                                          ? -arena.at(c).v
                                          : -log_add(arena.at(c).v, -child_lg);
                acc = log_add(acc, series);
            }
            lg[v] = acc;
        } else {
            stack.push_back({v, true});
            if (arena.is_expanded(v)) {
                for (VertexId c : arena.children_of(v))
                    if (!absorbing.count(c)) stack.push_back({c, false});
            }
        }
    }
    return lg[arena.root()];
}

}  // namespace

double absorb_prob(const TreeArena& arena, std::span<const VertexId> absorbing) {
    std::unordered_set<VertexId> aset(absorbing.begin(), absorbing.end());
    for (VertexId a : absorbing)
        if (static_cast<std::size_t>(a) >= arena.size())
            throw std::invalid_argument("absorb_prob: absorbing vertex not realized");
    const double lg = log_conductance_to(arena, aset);
    if (lg == kNegInf) return 0.0;
    if (std::isinf(lg)) return 1.0;
    // P = g / (g + 1), edge above the root has conductance e^{-V(root)} = 1
    return std::exp(lg - log_add(lg, 0.0));
}

namespace {

double bracket_mid_log(const GammaPoint& p) {
    const double lo = std::log(p.gamma_lower), hi = std::log(p.gamma_upper);
    if (p.gamma_lower <= 0.0) return hi;
    return 0.5 * (lo + hi);
}

void fit_slope(GammaCurve& curve) {
    std::vector<double> xs, ys;
    for (const auto& p : curve.points) {
        if (p.gamma_upper <= 0.0) continue;
        xs.push_back(-std::sqrt(2.0 * p.r));
        ys.push_back(bracket_mid_log(p));
    }
    curve.slope = xs.size() >= 2 ? ols_slope(xs, ys) : 0.0;
}

}  // namespace

GammaCurve gamma_r_curve(TreeArena& arena, std::span<const double> r_list,
                         std::int32_t depth_cap) {
    GammaCurve curve;
    for (double r : r_list) {
        StoppingLine line = stopping_line(arena, r, depth_cap);
        GammaPoint p;
        p.r = r;
        p.depth_cap = depth_cap;
        p.truncated = line.truncated;
        p.line_size = line.members.size();
        std::vector<VertexId> lower;
        lower.reserve(line.members.size());
        for (const auto& m : line.members) lower.push_back(m.vertex);
        p.gamma_lower = lower.empty() ? 0.0 : absorb_prob(arena, lower);
        if (line.truncated) {
            std::vector<VertexId> upper = lower;
            upper.insert(upper.end(), line.truncated_at.begin(), line.truncated_at.end());
            p.gamma_upper = absorb_prob(arena, upper);
        } else {
            p.gamma_upper = p.gamma_lower;
        }
        curve.points.push_back(p);
    }
    fit_slope(curve);
    return curve;
}

namespace {

struct StreamingSolver {
    const EnvironmentLaw* law;
    double r;
    std::int32_t depth_cap;
    std::uint64_t members = 0;
    bool truncated = false;
    std::vector<double> kids;

    // returns (log g_lower, log g_upper) of the subtree below (v, stream)
    std::pair<double, double> descend(double v, std::int32_t depth, std::uint64_t stream) {
        Rng rng(combine_streams(stream, 0x4558ULL));
        law->sample_offspring(rng, kids);
        // local copy: recursion reuses the scratch vector
        std::vector<double> dvs = kids;
        double lo = kNegInf, hi = kNegInf;
        for (std::size_t i = 0; i < dvs.size(); ++i) {
            const double cv = v + dvs[i];
            const std::uint64_t cstream =
                combine_streams(stream, static_cast<std::uint64_t>(i) + 1);
            if (cv >= r) {
                ++members;
                lo = log_add(lo, -cv);
                hi = log_add(hi, -cv);
            } else if (depth + 1 >= depth_cap) {
                truncated = true;
                hi = log_add(hi, -cv);  // absorbing at the truncation boundary
            } else {
                auto [clo, chi] = descend(cv, depth + 1, cstream);
                if (clo != kNegInf) lo = log_add(lo, -log_add(cv, -clo));
                if (chi != kNegInf) hi = log_add(hi, -log_add(cv, -chi));
            }
        }
        return {lo, hi};
    }
};

}  // namespace

GammaPoint gamma_bracket_streaming(const EnvironmentLaw& law, std::uint64_t root_stream,
                                   double r, std::int32_t depth_cap) {
    if (!(r > 0.0)) throw std::invalid_argument("gamma_bracket_streaming: r must be > 0");
    StreamingSolver solver{&law, r, depth_cap};
    auto [lo, hi] = solver.descend(0.0, 0, root_stream);
    GammaPoint p;
    p.r = r;
    p.depth_cap = depth_cap;
    p.truncated = solver.truncated;
    p.line_size = solver.members;
    p.gamma_lower = lo == kNegInf ? 0.0 : std::exp(lo - log_add(lo, 0.0));
    p.gamma_upper = hi == kNegInf ? 0.0 : std::exp(hi - log_add(hi, 0.0));
    return p;
}

GammaCurve gamma_r_curve_streaming(const EnvironmentLaw& law, std::uint64_t root_stream,
                                   std::span<const double> r_list, std::int32_t depth_cap) {
    GammaCurve curve;
    for (double r : r_list)
        curve.points.push_back(gamma_bracket_streaming(law, root_stream, r, depth_cap));
    fit_slope(curve);
    return curve;
}

LadderGrid::LadderGrid(double r_, double chi_, double theta_, double beta_, double eps_,
                       double eps1_)
    : r(r_), chi(chi_), theta(theta_), beta(beta_), eps(eps_), eps1(eps1_) {
    if (!(r > 0.0)) throw std::invalid_argument("ladder grid: r must be > 0");
    if (!(0.5 < theta && theta < chi && chi < 1.0))
        throw std::invalid_argument("ladder grid: need 1/2 < theta < chi < 1");
    if (!(eps > 0.0 && eps1 > 0.0 && beta >= 0.0))
        throw std::invalid_argument("ladder grid: need eps > 0, eps1 > 0, beta >= 0");
    k = static_cast<std::int64_t>(std::floor(std::pow(r, 1.0 - chi)));
    if (k < 1) k = 1;
}

double LadderGrid::width(std::int64_t m) const {
    return std::sqrt(2.0 * r) *
           std::sqrt(static_cast<double>(k - m + 1) / static_cast<double>(k));
}

std::int64_t LadderGrid::depth_limit() const {
    const double lim = std::floor(std::exp(eps1 * std::sqrt(r)));
    return lim > 1e15 ? static_cast<std::int64_t>(1e15) : static_cast<std::int64_t>(lim);
}

RestrictedLine restricted_line(TreeArena& arena, const LadderGrid& grid,
                               std::int32_t depth_cap) {
    RestrictedLine out{grid, {}, 0, 0.0, false};
    StoppingLine full = stopping_line(arena, grid.r, depth_cap);
    out.full_line_size = full.members.size();
    out.truncated = full.truncated;

    const double overshoot_cap = std::pow(grid.r, grid.theta);
    const double lambda_cap = std::exp(grid.eps * std::sqrt(grid.r));
    const std::int64_t len_cap = grid.depth_limit();

    std::vector<VertexId> path;
    std::vector<std::int64_t> ladder;  // ladder[m] = H^{(x)}_{h_m}
    for (const auto& mem : full.members) {
        const auto& rec = arena.at(mem.vertex);
        if (rec.vmin < -grid.beta) continue;
        if (static_cast<std::int64_t>(rec.depth) >= len_cap) continue;

        path.clear();
        for (VertexId u = mem.vertex; u != kParentOfRoot; u = arena.at(u).parent)
            path.push_back(u);
        std::reverse(path.begin(), path.end());
        const std::int64_t len = static_cast<std::int64_t>(path.size()) - 1;  // |x|

        // first-passage generations of the ladder levels h_m along the path
        ladder.assign(static_cast<std::size_t>(grid.k) + 1, len);
        std::int64_t m = 0;
        for (std::int64_t i = 0; i <= len && m <= grid.k; ++i) {
            const double vi = arena.at(path[static_cast<std::size_t>(i)]).v;
            while (m <= grid.k && vi >= grid.level(m)) ladder[static_cast<std::size_t>(m++)] = i;
        }

        bool ok = true;
        for (std::int64_t mm = 1; ok && mm < grid.k; ++mm) {
            const VertexId lx = path[static_cast<std::size_t>(ladder[static_cast<std::size_t>(mm)])];
            if (arena.at(lx).dv > overshoot_cap) ok = false;
        }
        if (!ok) continue;

        // drawdown corridor and Lambda bound, vertex by vertex along the path
        std::int64_t seg = 1;
        for (std::int64_t j = 0; ok && j < len; ++j) {
            while (seg < grid.k && j >= ladder[static_cast<std::size_t>(seg)]) ++seg;
            const auto& pr = arena.at(path[static_cast<std::size_t>(j)]);
            if (pr.vbar - pr.v > grid.width(seg)) ok = false;
            if (pr.lambda > lambda_cap) ok = false;
        }
        if (!ok) continue;

        out.members.push_back(mem);
        out.exact_mean += hit_prob_vertex(arena, mem.vertex);
    }
    return out;
}

EmbeddedTreeCensus embedded_tree_census(TreeArena& arena, std::int64_t block_len, double alpha,
                                        double c4, std::int64_t n_levels,
                                        std::uint64_t vertex_budget) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::invalid_argument("embedded_tree_census: need 0 < alpha < 1/2");
    if (!(c4 > 0.0)) throw std::invalid_argument("embedded_tree_census: need c4 > 0");

    EmbeddedTreeCensus out;
    out.block_len = block_len;
    out.alpha = alpha;
    out.c4 = c4;

    const double gain = std::pow(static_cast<double>(block_len), alpha);  // L^alpha
    const double log_prod_cap = c4 * static_cast<double>(block_len);

    struct GNode {
        VertexId vertex;
        std::int64_t parent;  // index into previous generation, -1 at level 1
    };
    std::vector<std::vector<GNode>> levels;  // levels[n-1] = G_n

    std::uint64_t visited = 0;

    // explores one block below `base` and appends members of the next
    // generation; relative potential, block running max, and the log product
    // of (1 + Lambda) are tracked along the way
    auto explore_block = [&](VertexId base, std::int64_t parent_idx,
                             std::vector<GNode>& next) -> bool {
        struct Frame {
            VertexId v;
            std::int32_t rel_depth;
            double log_prod;
        };
        const double base_v = arena.at(base).v;
        std::vector<Frame> stack{{base, 0, 0.0}};
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            if (++visited > vertex_budget) {
                out.budget_exceeded = true;
                return false;
            }
            arena.expand(f.v);
            const double lp = f.log_prod + std::log1p(arena.at(f.v).lambda);
            if (lp > log_prod_cap) continue;  // factors are >= 1, no recovery
            for (VertexId c : arena.children_of(f.v)) {
                const double rel = arena.at(c).v - base_v;
                if (rel >= 2.0 * gain) continue;  // block running max exceeded
                if (f.rel_depth + 1 == block_len) {
                    if (rel >= gain) next.push_back({c, parent_idx});
                } else {
                    stack.push_back({c, f.rel_depth + 1, lp});
                }
            }
        }
        return true;
    };

    std::vector<GNode> first;
    if (explore_block(arena.root(), -1, first)) {
        levels.push_back(std::move(first));
        for (std::int64_t n = 2; n <= n_levels && !out.budget_exceeded; ++n) {
            std::vector<GNode> next;
            const auto& prev = levels.back();
            for (std::size_t i = 0; i < prev.size(); ++i) {
                if (!explore_block(prev[i].vertex, static_cast<std::int64_t>(i), next)) break;
            }
            levels.push_back(std::move(next));
        }
    }
    for (const auto& lv : levels) out.generation_sizes.push_back(lv.size());

    if (out.budget_exceeded) return out;

    // antichain-count inequality at levels s in [2n L^alpha, 2(n+1) L^alpha]
    const double depth_factor = 2.0 * std::pow(static_cast<double>(block_len), 1.0 - alpha);
    for (std::int64_t n = 1; 2 * n + 2 <= static_cast<std::int64_t>(levels.size()); ++n) {
        // G_n ancestors reached from G_{2n+2}
        std::unordered_set<std::int64_t> surviving;
        const std::int64_t top = 2 * n + 2;
        for (const auto& node : levels[static_cast<std::size_t>(top - 1)]) {
            std::int64_t idx = node.parent;
            for (std::int64_t lvl = top - 1; lvl > n; --lvl)
                idx = levels[static_cast<std::size_t>(lvl - 1)][static_cast<std::size_t>(idx)].parent;
            surviving.insert(idx);
        }
        for (double s : {2.0 * n * gain, (2.0 * n + 1.0) * gain, 2.0 * (n + 1) * gain}) {
            const double log_prod_cap_s = 2.0 * c4 *
                std::pow(static_cast<double>(block_len), 1.0 - alpha) * s;
            const std::int32_t dcap = static_cast<std::int32_t>(std::ceil(depth_factor * s));
            StoppingLine line = stopping_line(arena, s, dcap);
            std::uint64_t ks = 0;
            for (const auto& mem : line.members) {
                if (mem.v > 4.0 * s) continue;
                if (static_cast<double>(mem.depth) > depth_factor * s) continue;
                double lp = 0.0;
                for (VertexId u = arena.at(mem.vertex).parent; u != kParentOfRoot;
                     u = arena.at(u).parent)
                    lp += std::log1p(arena.at(u).lambda);
                if (lp > log_prod_cap_s) continue;
                ++ks;
            }
            EmbeddedTreeCensus::LevelCheck chk;
            chk.s = s;
            chk.n = n;
            chk.k_s_size = ks;
            chk.surviving_g_n = surviving.size();
            chk.inequality_holds = ks >= surviving.size();
            out.checks.push_back(chk);
        }
    }
    return out;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace gwlab
