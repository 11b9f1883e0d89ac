#include "gwlab/spine.hpp"

#include <array>
#include <cmath>
#include <deque>

namespace gwlab {

namespace {

// exact one-step sampling for the two-point law: weight each of the four
// child configurations by its reweighted mass P * W_1 (the masses sum to one
// because E[W_1] = 1), then pick the spine child proportionally to e^{-V}
SpineStep two_point_exact_step(const EnvironmentLaw& law, Rng& rng) {
    const double a = law.jump();
    const double p = law.up_prob();
    const double wu = std::exp(-a), wd = std::exp(a);

    struct Config {
        double v1, v2, prob;
    };
    const std::array<Config, 4> configs{{
        {+a, +a, p * p},
        {+a, -a, p * (1.0 - p)},
        {-a, +a, (1.0 - p) * p},
        {-a, -a, (1.0 - p) * (1.0 - p)},
    }};

    double u = rng.uniform();
    for (const auto& cfg : configs) {
        const double e1 = cfg.v1 > 0 ? wu : wd;
        const double e2 = cfg.v2 > 0 ? wu : wd;
        const double w1 = e1 + e2;
        const double mass = cfg.prob * w1;
        if (u < mass) {
            SpineStep s;
            s.lambda = w1;
            s.n_children = 2;
            s.weight = 1.0;
            s.ds = rng.uniform() * w1 < e1 ? cfg.v1 : cfg.v2;
            return s;
        }
        u -= mass;
    }
    // round-off fallthrough: last configuration
    SpineStep s;
    s.lambda = 2.0 * wd;
    s.n_children = 2;
    s.weight = 1.0;
    s.ds = -a;
    return s;
}

}  // namespace

SpineStep sample_spine_step(const EnvironmentLaw& law, Rng& rng) {
    if (law.family() == Family::TwoPoint) return two_point_exact_step(law, rng);

    // continuous laws: propose from the base law, carry W_1 as the
    // likelihood ratio (E[W_1] = 1), pick the spine child ~ e^{-V}/W_1
    thread_local std::vector<double> kids;
    law.sample_offspring(rng, kids);
    SpineStep s;
    s.n_children = static_cast<std::int32_t>(kids.size());
    double w1 = 0.0;
    for (double v : kids) w1 += std::exp(-v);
    s.lambda = w1;
    s.weight = w1;
    if (kids.empty()) {
        // dead generation: zero Q-mass, the sample contributes nothing
        s.ds = 0.0;
        return s;
    }
    double u = rng.uniform() * w1;
    s.ds = kids.back();
    for (double v : kids) {
        const double w = std::exp(-v);
        if (u < w) {
            s.ds = v;
            break;
        }
        u -= w;
    }
    return s;
}

SpineSample run_spine(const EnvironmentLaw& law, std::int64_t n, Rng& rng) {
    SpineSample out;
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const SpineStep st = sample_spine_step(law, rng);
        out.weight *= st.weight;
        if (st.weight == 0.0) break;
        s += st.ds;
        out.ds.push_back(st.ds);
        out.lambda.push_back(st.lambda);
    }
    out.terminal_s = s;
    return out;
}

SpineSample run_spine_to_level(const EnvironmentLaw& law, double r, Rng& rng,
                               std::int64_t step_cap) {
    SpineSample out;
    double s = 0.0;
    while (s < r) {
        if (static_cast<std::int64_t>(out.ds.size()) >= step_cap) {
            out.capped = true;
            break;
        }
        const SpineStep st = sample_spine_step(law, rng);
        out.weight *= st.weight;
        if (st.weight == 0.0) break;
        s += st.ds;
        out.ds.push_back(st.ds);
        out.lambda.push_back(st.lambda);
    }
    out.terminal_s = s;
    return out;
}

namespace {

std::vector<double> partial_sums(const std::vector<double>& ds) {
    std::vector<double> s(ds.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        acc += ds[i];
        s[i] = acc;
    }
    return s;
}

}  // namespace

Estimate many_to_one(const EnvironmentLaw& law, std::int64_t n, const PathFunction& g,
                     std::uint64_t n_samples, std::uint64_t seed) {
    WeightedAccumulator acc;
    Rng rng(mix64(seed));
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const SpineSample sp = run_spine(law, n, rng);
        if (sp.weight == 0.0) {
            acc.add(0.0, 0.0);
            continue;
        }
        const auto s = partial_sums(sp.ds);
        acc.add(std::exp(sp.terminal_s) * g(s), sp.weight);
    }
    return acc.estimate();
}

LineEstimate many_to_one_line(const EnvironmentLaw& law, double r, const PathFunction& g,
                              std::uint64_t n_samples, std::uint64_t seed,
                              std::int64_t step_cap) {
    WeightedAccumulator acc;
    std::uint64_t discarded = 0;
    Rng rng(mix64(seed));
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const SpineSample sp = run_spine_to_level(law, r, rng, step_cap);
        if (sp.capped) {
            ++discarded;
            continue;
        }
        if (sp.weight == 0.0) {
            acc.add(0.0, 0.0);
            continue;
        }
        const auto s = partial_sums(sp.ds);
        acc.add(std::exp(sp.terminal_s) * g(s), sp.weight);
    }
    return LineEstimate{acc.estimate(), discarded};
}

std::vector<OvershootPoint> overshoot_moment(const EnvironmentLaw& law, double c,
                                             std::span<const double> b_grid,
                                             std::uint64_t n_samples, std::uint64_t seed) {
    if (!(c >= 0.0)) throw std::invalid_argument("overshoot_moment: need c >= 0");
    std::vector<OvershootPoint> out;
    for (std::size_t bi = 0; bi < b_grid.size(); ++bi) {
        const double b = b_grid[bi];
        WeightedAccumulator acc;
        Rng rng(mix64(seed + bi * 0x9e3779b9ULL));
        for (std::uint64_t i = 0; i < n_samples; ++i) {
            const SpineSample sp = run_spine_to_level(law, b, rng);
            if (sp.capped || sp.weight == 0.0 || sp.ds.empty()) {
                acc.add(0.0, 0.0);
                continue;
            }
            acc.add(std::exp(c * (sp.terminal_s - b)), sp.weight);
        }
        out.push_back({b, acc.estimate()});
    }
    return out;
}

Estimate mu_l(const EnvironmentLaw& law, std::int64_t block_len, double alpha, double c4,
              std::uint64_t n_samples, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("mu_l: need 0 < alpha < 1/2");
    const double gain = std::pow(static_cast<double>(block_len), alpha);
    const double cap = c4 * static_cast<double>(block_len);
    WeightedAccumulator acc;
    Rng rng(mix64(seed));
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const SpineSample sp = run_spine(law, block_len, rng);
        if (sp.weight == 0.0) {
            acc.add(0.0, 0.0);
            continue;
        }
        double s = 0.0, smax = 0.0, log_prod = 0.0;
        for (std::size_t j = 0; j < sp.ds.size(); ++j) {
            s += sp.ds[j];
            smax = std::max(smax, s);
            log_prod += std::log1p(sp.lambda[j]);
        }
        const bool in = s >= gain && smax < 2.0 * gain && log_prod <= cap;
        acc.add(in ? std::exp(s) : 0.0, sp.weight);
    }
    return acc.estimate();
}

Estimate martingale_check(const EnvironmentLaw& law, std::int64_t n,
                          std::uint64_t n_samples, std::uint64_t seed) {
    if (n == 0) return Estimate::exact(1.0);
    MeanAccumulator acc;
    Rng rng(mix64(seed));
    std::vector<double> kids;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        // breadth-first population of (V, generation) pairs
        std::deque<std::pair<double, std::int64_t>> queue{{0.0, 0}};
        double wn = 0.0;
        while (!queue.empty()) {
            auto [v, gen] = queue.front();
            queue.pop_front();
            if (gen == n) {
                wn += std::exp(-v);
                continue;
            }
            law.sample_offspring(rng, kids);
            for (double dv : kids) queue.emplace_back(v + dv, gen + 1);
        }
        acc.add(wn);
    }
    return acc.estimate();
}

double probe_weight_moment_exponent(const EnvironmentLaw& law, std::uint64_t n_samples,
                                    std::uint64_t seed) {
    // empirical stability scan of E_Q[(sum e^{-V})^q] over a q grid: the
    // largest q whose half-sample and full-sample estimates agree within 2x
    Rng rng(mix64(seed));
    std::vector<double> etas;
    std::vector<double> weights;
    etas.reserve(n_samples);
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const SpineStep st = sample_spine_step(law, rng);
        etas.push_back(st.lambda);
        weights.push_back(st.weight);
    }
    double best = 0.0;
    for (double q = 0.1; q <= 2.0001; q += 0.1) {
        double half = 0.0, full = 0.0, whalf = 0.0, wfull = 0.0;
        for (std::size_t i = 0; i < etas.size(); ++i) {
            const double m = weights[i] * std::pow(etas[i], q);
            full += m;
            wfull += weights[i];
            if (i < etas.size() / 2) {
                half += m;
                whalf += weights[i];
            }
        }
        if (whalf == 0.0 || wfull == 0.0) break;
        const double a = half / whalf, b = full / wfull;
        if (a <= 0.0 || b <= 0.0) break;
        const double ratio = a > b ? a / b : b / a;
        if (ratio > 2.0) break;
        best = q;
    }
    return best;
}

}  // namespace gwlab
