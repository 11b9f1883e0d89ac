#include "gwlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "gwlab/environment.hpp"
#include "gwlab/quenched.hpp"
#include "gwlab/rw1d.hpp"
#include "gwlab/spine.hpp"
#include "gwlab/walk.hpp"

namespace gwlab {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// column-oriented CSV artifact: one '#' timestamp comment, a header, then
// deterministic data rows
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) {
        std::filesystem::create_directories(path.parent_path());
        out_.open(path);
        if (!out_) throw std::runtime_error("cannot open output file: " + path.string());
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        out_ << "# generated "
             << std::chrono::duration_cast<std::chrono::seconds>(now).count() << "\n";
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? ", " : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

// worker pool over replica indices; every result lands in a caller-owned slot
// so the merge order is the replica order regardless of scheduling
void parallel_replicas(std::int64_t k, const std::function<void(std::int64_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::int64_t>(k, static_cast<std::int64_t>(hw)));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < k; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::future<void>> futs;
    for (unsigned w = 0; w < workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= k) return;
                fn(i);
            }
        }));
    }
    for (auto& f : futs) f.get();
}

std::uint64_t arena_root_stream(std::uint64_t master_seed, std::uint64_t replica) {
    // must mirror the TreeArena constructor
    return combine_streams(mix64(master_seed), mix64(replica + 0x5452454541ULL));
}

struct Ctx {
    const ExperimentConfig& cfg;
    const RunOptions& opts;
    std::string name;
    json metrics = json::object();
    json verdicts = json::object();
    int failed = 0;

    std::filesystem::path csv_path() const {
        return std::filesystem::path(opts.out_dir) / (name + ".csv");
    }
    void verdict(const std::string& key, bool pass) {
        verdicts[key] = pass ? "pass" : "fail";
        if (!pass) ++failed;
    }
    void info(const std::string& key, const std::string& note) { verdicts[key] = note; }
    void informational(const std::string& key) { verdicts[key] = "informational"; }

    EnvironmentLaw law() const {
        const Family fam = family_from_string(cfg.get("family", "two-point"));
        double param = 0.0;
        if (fam == Family::FixedGaussian) param = cfg.get_double("param", 2.0);
        if (fam == Family::PoissonGaussian) param = cfg.get_double("param", 2.0);
        return make_law(fam, param);
    }
    std::uint64_t seed() const { return cfg.get_u64("seed", 1); }
    std::int64_t replicas(std::int64_t fallback) const {
        return cfg.get_int("replicas", fallback);
    }
};

// ---------------------------------------------------------------- verify-law

void exp_verify_law(Ctx& ctx) {
    const EnvironmentLaw law = ctx.law();
    const std::uint64_t n = ctx.cfg.get_u64("n_samples", 100000);
    const BoundaryReport cf = law.verify_boundary_case(MomentMethod::ClosedForm);
    const BoundaryReport qd = law.verify_boundary_case(MomentMethod::Quadrature);
    const BoundaryReport mc = law.verify_boundary_case(MomentMethod::MonteCarlo, n);

    CsvWriter csv(ctx.csv_path(), "quantity, method, value, stderr, samples");
    auto emit = [&](const char* what, const char* method, const Estimate& e) {
        csv.row({what, method, num(e.value), num(e.stderr_), std::to_string(e.samples)});
    };
    for (const auto& [method, rep] :
         {std::pair<const char*, const BoundaryReport*>{"closed_form", &cf},
          {"quadrature", &qd},
          {"monte_carlo", &mc}}) {
        emit("m0", method, rep->m0);
        emit("m1", method, rep->m1);
        emit("sigma2", method, rep->sigma2);
        for (const auto& p : rep->probes) {
            const std::string tag = "_delta=" + num(p.delta);
            emit(("down_moment" + tag).c_str(), method, p.down_moment);
            emit(("up_moment" + tag).c_str(), method, p.up_moment);
            emit(("count_moment" + tag).c_str(), method, p.count_moment);
        }
    }

    ctx.metrics["m0"] = cf.m0.value;
    ctx.metrics["m1"] = cf.m1.value;
    ctx.metrics["sigma2"] = cf.sigma2.value;
    ctx.metrics["m0_mc"] = mc.m0.value;
    ctx.metrics["m1_mc"] = mc.m1.value;
    ctx.verdict("m0_closed_form", std::abs(cf.m0.value - 1.0) < 1e-12);
    ctx.verdict("m1_closed_form", std::abs(cf.m1.value) < 1e-12);
    ctx.verdict("m0_quadrature", std::abs(qd.m0.value - 1.0) < 1e-9);
    ctx.verdict("m1_quadrature", std::abs(qd.m1.value) < 1e-9);
    ctx.verdict("m0_monte_carlo_4se", mc.m0.sigma_distance(1.0) <= 4.0);
    ctx.verdict("m1_monte_carlo_4se", mc.m1.sigma_distance(0.0) <= 4.0);
    ctx.verdict("sigma2_monte_carlo_4se", mc.sigma2.sigma_distance(cf.sigma2.value) <= 4.0);
    ctx.informational("delta_probes");
}

// -------------------------------------------------- theorem-main/displacement

void exp_trajectory(Ctx& ctx, bool depth_mode) {
    const EnvironmentLaw law = ctx.law();
    const std::vector<double> n_list = ctx.cfg.get_list("n_list", {1e4, 1e5, 1e6});
    const std::int64_t k = ctx.replicas(32);
    const std::uint64_t seed = ctx.seed();

    std::vector<std::uint64_t> checkpoints;
    for (double n : n_list) checkpoints.push_back(static_cast<std::uint64_t>(n));
    std::sort(checkpoints.begin(), checkpoints.end());

    // one trajectory per replica, summarized at every checkpoint: the cross-n
    // medians then compare running maxima of the same paths
    std::vector<std::vector<TrajectorySummary>> results(static_cast<std::size_t>(k));
    std::vector<std::uint64_t> run_seeds(static_cast<std::size_t>(k));
    parallel_replicas(k, [&](std::int64_t rep) {
        TreeArena arena(law, seed, static_cast<std::uint64_t>(rep));
        const std::uint64_t ws =
            combine_streams(mix64(seed), mix64(0x77616c6bULL + static_cast<std::uint64_t>(rep)));
        Rng rng(ws);
        results[static_cast<std::size_t>(rep)] = run_steps_checkpointed(arena, checkpoints, rng);
        run_seeds[static_cast<std::size_t>(rep)] = ws;
    });

    CsvWriter csv(ctx.csv_path(),
                  "replica, n_steps, maxV, maxDepth, ratio_V, ratio_depth, seed");
    for (std::int64_t rep = 0; rep < k; ++rep)
        for (const auto& s : results[static_cast<std::size_t>(rep)])
            csv.row({std::to_string(rep), std::to_string(s.n_steps), num(s.max_v),
                     std::to_string(s.max_depth), num(s.ratio_v), num(s.ratio_depth),
                     std::to_string(run_seeds[static_cast<std::size_t>(rep)])});

    std::vector<double> medians, inv_log_n;
    for (std::size_t ni = 0; ni < checkpoints.size(); ++ni) {
        std::vector<double> ratios;
        for (std::int64_t rep = 0; rep < k; ++rep) {
            const auto& s = results[static_cast<std::size_t>(rep)][ni];
            ratios.push_back(depth_mode ? s.ratio_depth : s.ratio_v);
        }
        const double med = median_of(ratios);
        medians.push_back(med);
        const double nv = static_cast<double>(checkpoints[ni]);
        inv_log_n.push_back(1.0 / std::log(nv));
        ctx.metrics["median_ratio_n=" + num(nv)] = med;
        ctx.metrics["iqr_ratio_n=" + num(nv)] =
            quantile_of(ratios, 0.75) - quantile_of(ratios, 0.25);
    }
    const double trend = ols_slope(inv_log_n, medians);
    ctx.metrics["trend_slope_vs_inv_log_n"] = trend;
    ctx.metrics["extrapolated_ratio"] =
        medians.empty() ? 0.0 : medians.back() - trend * inv_log_n.back();

    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
        if (medians[i] < medians[i - 1]) monotone = false;
    if (depth_mode) {
        ctx.informational("medians");
        ctx.info("medians_monotone", monotone ? "pass" : "informational");
    } else {
        ctx.verdict("medians_monotone", monotone);
        const double last = medians.empty() ? 0.0 : medians.back();
        ctx.verdict("band_at_largest_n", last >= 0.15 && last <= 0.9);
        ctx.informational("trend_slope");
    }
}

// -------------------------------------------------------------- gamma-scaling

void exp_gamma_scaling(Ctx& ctx) {
    const EnvironmentLaw law = ctx.law();
    const std::vector<double> r_list = ctx.cfg.get_list("r_list", {6, 10, 14, 18, 22});
    const std::int32_t depth_cap =
        static_cast<std::int32_t>(ctx.cfg.get_int("depth_cap", 34));
    const std::int64_t k = ctx.replicas(8);
    const std::uint64_t seed = ctx.seed();

    std::vector<GammaCurve> curves(static_cast<std::size_t>(k));
    parallel_replicas(k, [&](std::int64_t rep) {
        curves[static_cast<std::size_t>(rep)] = gamma_r_curve_streaming(
            law, arena_root_stream(seed, static_cast<std::uint64_t>(rep)), r_list, depth_cap);
    });

    CsvWriter csv(ctx.csv_path(), "r, gamma_lower, gamma_upper, line_size, depth_cap, truncated");
    for (const auto& curve : curves)
        for (const auto& p : curve.points)
            csv.row({num(p.r), num(p.gamma_lower), num(p.gamma_upper),
                     std::to_string(p.line_size), std::to_string(p.depth_cap),
                     p.truncated ? "1" : "0"});

    std::vector<double> slopes;
    int in_band = 0;
    bool monotone = true;
    for (const auto& curve : curves) {
        slopes.push_back(curve.slope);
        if (curve.slope >= 0.5 && curve.slope <= 1.5) ++in_band;
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            if (curve.points[i].gamma_upper > curve.points[i - 1].gamma_upper + 1e-15)
                monotone = false;
            if (curve.points[i].gamma_lower > curve.points[i - 1].gamma_lower + 1e-15)
                monotone = false;
        }
    }
    ctx.metrics["slopes"] = slopes;
    ctx.metrics["median_slope"] = median_of(slopes);
    ctx.metrics["n_slopes_in_band"] = in_band;
    // band holds on at least 3/4 of the sampled environments
    ctx.verdict("slope_band", 4 * in_band >= 3 * static_cast<int>(k));
    ctx.verdict("brackets_monotone_in_r", monotone);
}

// -------------------------------------------------------------- excursion-tail

void exp_excursion_tail(Ctx& ctx) {
    const EnvironmentLaw law = ctx.law();
    const std::int64_t k = ctx.replicas(4);
    const std::uint64_t n_exc = ctx.cfg.get_u64("n_excursions", 20000);
    const double probe_r = ctx.cfg.get_double("probe_r", 4.0);
    const std::int32_t depth_cap =
        static_cast<std::int32_t>(ctx.cfg.get_int("depth_cap", 4000));
    const std::uint64_t budget = ctx.cfg.get_u64("step_budget", 500000000ULL);
    const std::uint64_t seed = ctx.seed();

    struct Result {
        ExcursionRun run;
        double gamma_exact = 0.0;
    };
    std::vector<Result> results(static_cast<std::size_t>(k));
    parallel_replicas(k, [&](std::int64_t rep) {
        TreeArena arena(law, seed, static_cast<std::uint64_t>(rep));
        Rng rng(combine_streams(mix64(seed), mix64(0x657863ULL + static_cast<std::uint64_t>(rep))));
        auto& res = results[static_cast<std::size_t>(rep)];
        res.run = run_excursions(arena, n_exc, probe_r, rng, budget);
        StoppingLine line = stopping_line(arena, probe_r, depth_cap);
        std::vector<VertexId> members;
        for (const auto& m : line.members) members.push_back(m.vertex);
        res.gamma_exact = members.empty() ? 0.0 : absorb_prob(arena, members);
    });
    for (const auto& res : results)
        if (res.run.truncated)
            throw BudgetError("excursion-tail: step budget exhausted before " +
                              std::to_string(n_exc) + " excursions");

    CsvWriter csv(ctx.csv_path(), "replica, excursion_idx, length, maxV, maxDepth, hit_flag");
    for (std::int64_t rep = 0; rep < k; ++rep)
        for (const auto& e : results[static_cast<std::size_t>(rep)].run.excursions)
            csv.row({std::to_string(rep), std::to_string(e.index), std::to_string(e.length),
                     num(e.max_v), std::to_string(e.max_depth), e.hit_probe ? "1" : "0"});

    bool all_ok = true;
    for (std::int64_t rep = 0; rep < k; ++rep) {
        const auto& res = results[static_cast<std::size_t>(rep)];
        MeanAccumulator freq;
        for (const auto& e : res.run.excursions) freq.add(e.hit_probe ? 1.0 : 0.0);
        const Estimate est = freq.estimate();
        const double dist = est.sigma_distance(res.gamma_exact);
        ctx.metrics["gamma_exact_rep" + std::to_string(rep)] = res.gamma_exact;
        ctx.metrics["hit_freq_rep" + std::to_string(rep)] = est.value;
        ctx.metrics["sigma_distance_rep" + std::to_string(rep)] = dist;
        if (res.gamma_exact >= 1e-3 && dist > 4.0) all_ok = false;
    }
    ctx.verdict("hit_frequency_4se", all_ok);
}

// ---------------------------------------------------------------- spine-check

void exp_spine_check(Ctx& ctx) {
    const EnvironmentLaw law = ctx.law();
    const std::uint64_t n = ctx.cfg.get_u64("n_samples", 200000);
    const std::uint64_t seed = ctx.seed();

    WeightedAccumulator mean_ds, mean_ds2;
    Rng rng(mix64(seed));
    for (std::uint64_t i = 0; i < n; ++i) {
        const SpineStep st = sample_spine_step(law, rng);
        mean_ds.add(st.ds, st.weight);
        mean_ds2.add(st.ds * st.ds, st.weight);
    }
    const Estimate e_ds = mean_ds.estimate();
    const Estimate e_ds2 = mean_ds2.estimate();

    CsvWriter csv(ctx.csv_path(), "estimator, target, n_or_r, value, stderr, samples, discards");
    csv.row({"spine_increment_mean", "0", "1", num(e_ds.value), num(e_ds.stderr_),
             std::to_string(e_ds.samples), "0"});
    csv.row({"spine_increment_second_moment", num(law.sigma2()), "1", num(e_ds2.value),
             num(e_ds2.stderr_), std::to_string(e_ds2.samples), "0"});

    bool mart_ok = true;
    const std::uint64_t mart_n = ctx.cfg.get_u64("martingale_samples", 20000);
    for (std::int64_t gen = 1; gen <= 3; ++gen) {
        const Estimate w = martingale_check(law, gen, mart_n, seed + static_cast<std::uint64_t>(gen));
        csv.row({"martingale_mean", "1", std::to_string(gen), num(w.value), num(w.stderr_),
                 std::to_string(w.samples), "0"});
        ctx.metrics["martingale_n=" + std::to_string(gen)] = w.value;
        if (w.sigma_distance(1.0) > 4.0) mart_ok = false;
    }

    const double tele_r = ctx.cfg.get_double("telescope_r", 5.0);
    const LineEstimate tele = many_to_one_line(
        law, tele_r,
        [](std::span<const double> s) { return std::exp(-s.back()); },
        ctx.cfg.get_u64("telescope_samples", 20000), seed + 77);
    csv.row({"line_telescoping", "1", num(tele_r), num(tele.estimate.value),
             num(tele.estimate.stderr_), std::to_string(tele.estimate.samples),
             std::to_string(tele.discarded)});

    ctx.metrics["spine_increment_mean"] = e_ds.value;
    ctx.metrics["spine_increment_second_moment"] = e_ds2.value;
    ctx.metrics["sigma2_expected"] = law.sigma2();
    ctx.metrics["telescoping_value"] = tele.estimate.value;
    // degenerate laws (two-point) hit the target with zero sample variance,
    // so accept either a 4 SE band or near-exact agreement
    auto close_or_4se = [](const Estimate& e, double target) {
        return e.sigma_distance(target) <= 4.0 || std::abs(e.value - target) < 1e-9;
    };
    ctx.verdict("spine_mean_centered_4se", close_or_4se(e_ds, 0.0));
    ctx.verdict("spine_second_moment_4se", close_or_4se(e_ds2, law.sigma2()));
    ctx.verdict("martingale_mean_4se", mart_ok);
    ctx.verdict("line_telescoping_exact",
                tele.estimate.value == 1.0 && tele.estimate.stderr_ == 0.0);
}

// ----------------------------------------------------------------- zr-moments

void exp_zr_moments(Ctx& ctx) {
    const EnvironmentLaw law = ctx.law();
    const std::int64_t k = ctx.replicas(5);
    const double r = ctx.cfg.get_double("r", 6.0);
    const std::int32_t depth_cap =
        static_cast<std::int32_t>(ctx.cfg.get_int("depth_cap", 4000));
    const std::uint64_t n_exc = ctx.cfg.get_u64("n_excursions", 30000);
    const std::uint64_t budget = ctx.cfg.get_u64("step_budget", 500000000ULL);
    const std::uint64_t seed = ctx.seed();
    const LadderGrid grid(r, ctx.cfg.get_double("chi", 0.75), ctx.cfg.get_double("theta", 0.6),
                          ctx.cfg.get_double("beta", 10.0), ctx.cfg.get_double("eps", 2.0),
                          ctx.cfg.get_double("eps1", 2.0));

    struct Result {
        double exact = 0.0;
        std::uint64_t line_size = 0, full_size = 0;
        Estimate mc;
    };
    std::vector<Result> results(static_cast<std::size_t>(k));
    std::atomic<bool> over_budget{false};
    parallel_replicas(k, [&](std::int64_t rep) {
        TreeArena arena(law, seed, static_cast<std::uint64_t>(rep));
        const RestrictedLine rl = restricted_line(arena, grid, depth_cap);
        auto& res = results[static_cast<std::size_t>(rep)];
        res.exact = rl.exact_mean;
        res.line_size = rl.members.size();
        res.full_size = rl.full_line_size;

        std::unordered_set<VertexId> members;
        for (const auto& m : rl.members) members.insert(m.vertex);
        // per-excursion count of distinct restricted-line vertices visited
        MeanAccumulator z;
        WalkState state;
        Rng rng(combine_streams(mix64(seed), mix64(0x7a72ULL + static_cast<std::uint64_t>(rep))));
        std::unordered_set<VertexId> visited;
        while (z.count() < n_exc) {
            if (state.n_steps >= budget) {
                over_budget = true;
                return;
            }
            const std::uint64_t hits = state.root_parent_hits;
            step(arena, state, rng);
            if (!state.at_parent_of_root && members.count(state.vertex))
                visited.insert(state.vertex);
            if (state.root_parent_hits != hits) {
                z.add(static_cast<double>(visited.size()));
                visited.clear();
            }
        }
        res.mc = z.estimate();
    });
    if (over_budget)
        throw BudgetError("zr-moments: step budget exhausted before " +
                          std::to_string(n_exc) + " excursions");

    CsvWriter csv(ctx.csv_path(), "estimator, target, n_or_r, value, stderr, samples, discards");
    bool all_ok = true;
    for (std::int64_t rep = 0; rep < k; ++rep) {
        const auto& res = results[static_cast<std::size_t>(rep)];
        csv.row({"zr_exact_rep" + std::to_string(rep), num(res.exact), num(r), num(res.exact),
                 "0", "1", "0"});
        csv.row({"zr_mc_rep" + std::to_string(rep), num(res.exact), num(r), num(res.mc.value),
                 num(res.mc.stderr_), std::to_string(res.mc.samples), "0"});
        ctx.metrics["exact_rep" + std::to_string(rep)] = res.exact;
        ctx.metrics["mc_rep" + std::to_string(rep)] = res.mc.value;
        ctx.metrics["line_size_rep" + std::to_string(rep)] = res.line_size;
        ctx.metrics["full_line_size_rep" + std::to_string(rep)] = res.full_size;
        if (res.mc.sigma_distance(res.exact) > 4.0) all_ok = false;
    }
    ctx.verdict("zr_first_moment_4se", all_ok);
}

// ----------------------------------------------------------------------- mu-l

void exp_mu_l(Ctx& ctx) {
    const EnvironmentLaw law = ctx.law();
    const std::vector<double> l_list = ctx.cfg.get_list("L_list", {20, 40, 80});
    const double alpha = ctx.cfg.get_double("alpha", 0.4);
    const double c4 = ctx.cfg.get_double("c4", 3.0);
    const std::uint64_t n = ctx.cfg.get_u64("n_samples", 200000);
    const std::uint64_t seed = ctx.seed();

    CsvWriter csv(ctx.csv_path(), "estimator, target, n_or_r, value, stderr, samples, discards");
    std::vector<double> values;
    for (double l : l_list) {
        const Estimate e = mu_l(law, static_cast<std::int64_t>(l), alpha, c4, n,
                                seed + static_cast<std::uint64_t>(l));
        values.push_back(e.value);
        csv.row({"mu_L", "", num(l), num(e.value), num(e.stderr_), std::to_string(e.samples), "0"});
        ctx.metrics["mu_L=" + num(l)] = e.value;
    }
    bool increasing = true;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1]) increasing = false;
    ctx.verdict("mu_L_increasing", increasing);

    const std::int64_t census_arenas = ctx.cfg.get_int("census_arenas", 0);
    if (census_arenas > 0) {
        const std::int64_t census_l = ctx.cfg.get_int("census_L", 4);
        const std::int64_t levels = ctx.cfg.get_int("census_levels", 4);
        const std::uint64_t budget = ctx.cfg.get_u64("census_vertex_budget", 50000000ULL);
        std::vector<EmbeddedTreeCensus> censuses(static_cast<std::size_t>(census_arenas));
        parallel_replicas(census_arenas, [&](std::int64_t rep) {
            TreeArena arena(law, seed, 0x636e5355ULL + static_cast<std::uint64_t>(rep));
            censuses[static_cast<std::size_t>(rep)] =
                embedded_tree_census(arena, census_l, alpha, c4, levels, budget);
        });
        bool all_hold = true;
        std::uint64_t n_checks = 0;
        for (std::int64_t rep = 0; rep < census_arenas; ++rep) {
            const auto& c = censuses[static_cast<std::size_t>(rep)];
            if (c.budget_exceeded)
                throw BudgetError("mu-l: census vertex budget exhausted on arena " +
                                  std::to_string(rep));
            std::uint64_t holding = 0;
            for (const auto& chk : c.checks) {
                ++n_checks;
                if (chk.inequality_holds) ++holding;
                else all_hold = false;
            }
            csv.row({"census_checks_holding", std::to_string(c.checks.size()),
                     std::to_string(rep), std::to_string(holding), "0", "1", "0"});
        }
        ctx.metrics["census_checks_total"] = n_checks;
        ctx.verdict("census_inequality_holds", all_hold);
    }
}

// ----------------------------------------------------------------- rw1d-suite

struct Fixture {
    double value = 0.0, stderr_ = 0.0;
    std::uint64_t samples = 0, seed = 0;
};

std::optional<Fixture> read_fixture(const std::string& path, const std::string& name) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tok;
        std::vector<std::string> cells;
        while (std::getline(ss, tok, ',')) cells.push_back(trim(tok));
        if (cells.size() == 5 && cells[0] == name) {
            Fixture f;
            f.value = std::stod(cells[1]);
            f.stderr_ = std::stod(cells[2]);
            f.samples = std::stoull(cells[3]);
            f.seed = std::stoull(cells[4]);
            return f;
        }
    }
    return std::nullopt;
}

void write_fixture(const std::string& path, const std::string& name, const Fixture& f) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    out << "# name, value, stderr, samples, seed\n";
    out << name << ", " << num(f.value) << ", " << num(f.stderr_) << ", " << f.samples << ", "
        << f.seed << "\n";
}

void exp_rw1d_suite(Ctx& ctx) {
    const std::uint64_t seed = ctx.seed();
    const StepLaw1D lattice = StepLaw1D::simple_lattice();
    const StepLaw1D gauss = StepLaw1D::gaussian(1.0);
    const StepLaw1D marginal = StepLaw1D::spine_marginal(EnvironmentLaw::two_point());

    CsvWriter csv(ctx.csv_path(), "law, r, lambda, mode, method, prob, stderr, samples");

    // two-sided exit: closed form vs MC on a lattice sub-grid
    bool exit_ok = true;
    for (const auto& [a, b] : {std::pair<double, double>{5, 5}, {3, 7}, {10, 4}}) {
        const ExitResult ex = exit_prob(lattice, a, b, ctx.cfg.get_u64("exit_samples", 20000),
                                        seed + static_cast<std::uint64_t>(a * 100 + b));
        csv.row({"lattice", num(a), num(b), "exit", "mc", num(ex.mc.value), num(ex.mc.stderr_),
                 std::to_string(ex.mc.samples)});
        csv.row({"lattice", num(a), num(b), "exit", "closed_form", num(*ex.closed_form), "0", "1"});
        if (ex.mc.sigma_distance(*ex.closed_form) > 4.0) exit_ok = false;
    }
    ctx.verdict("lattice_exit_4se", exit_ok);

    // Gaussian sweep: the exit bound constant sup |(a+b) P - b|
    double sup_dev = 0.0;
    const std::uint64_t gn = ctx.cfg.get_u64("gauss_exit_samples", 2000);
    const int grid_max = static_cast<int>(ctx.cfg.get_int("exit_grid_max", 20));
    std::vector<double> devs(static_cast<std::size_t>(grid_max * grid_max));
    parallel_replicas(grid_max * grid_max, [&](std::int64_t cell) {
        const int a = static_cast<int>(cell) / grid_max + 1;
        const int b = static_cast<int>(cell) % grid_max + 1;
        const ExitResult ex =
            exit_prob(gauss, a, b, gn, seed + 0x6761ULL + static_cast<std::uint64_t>(cell));
        devs[static_cast<std::size_t>(cell)] = std::abs((a + b) * ex.mc.value - b);
    });
    for (double d : devs) sup_dev = std::max(sup_dev, d);
    csv.row({"gaussian", num(grid_max), num(grid_max), "exit_sweep", "mc", num(sup_dev), "0",
             std::to_string(gn)});
    ctx.metrics["gaussian_exit_sup_deviation"] = sup_dev;
    ctx.informational("gaussian_exit_bound_constant");

    // corridor: DP oracle vs MC, then the exponent bracket cells
    const Estimate dp40 = corridor_prob(lattice, 40, 6, CorridorMode::WithFloor,
                                        CorridorMethod::LatticeDp);
    const Estimate mc40 = corridor_prob(lattice, 40, 6, CorridorMode::WithFloor,
                                        CorridorMethod::MonteCarlo,
                                        ctx.cfg.get_u64("corridor_samples", 40000), seed + 40);
    csv.row({"lattice", "40", "6", "with_floor", "lattice_dp", num(dp40.value), "0", "1"});
    csv.row({"lattice", "40", "6", "with_floor", "mc", num(mc40.value), num(mc40.stderr_),
             std::to_string(mc40.samples)});
    ctx.verdict("corridor_dp_vs_mc_4se", mc40.sigma_distance(dp40.value) <= 4.0);

    bool bracket_ok = true;
    for (const auto& [r, lam] : {std::pair<double, double>{100, 5}, {200, 7}, {400, 10}}) {
        const Estimate p = corridor_prob(lattice, r, lam, CorridorMode::WithFloor,
                                         CorridorMethod::LatticeDp);
        const double expnt = -(lam / r) * std::log(p.value);
        csv.row({"lattice", num(r), num(lam), "with_floor", "lattice_dp", num(p.value), "0", "1"});
        ctx.metrics["corridor_exponent_r=" + num(r)] = expnt;
        if (!(expnt >= 0.6 && expnt <= 1.6)) bracket_ok = false;
    }
    ctx.verdict("corridor_exponent_band", bracket_ok);

    // ladder heights: lattice exact, Gaussian against the frozen fixture
    const std::vector<double> no_grid;
    const LadderStats lat =
        ladder_stats(lattice, ctx.cfg.get_u64("ladder_samples", 2000), seed + 7, no_grid);
    csv.row({"lattice", "0", "0", "ladder", "mc", num(lat.first_ladder_height.value),
             num(lat.first_ladder_height.stderr_),
             std::to_string(lat.first_ladder_height.samples)});
    ctx.verdict("lattice_ladder_exact", lat.first_ladder_height.value == 1.0 &&
                                            lat.first_ladder_height.stderr_ == 0.0);

    const std::string fixture_path =
        ctx.cfg.get("fixtures_path", "tests/fixtures/rw1d.txt");
    const std::uint64_t fseed = 0x6c616464ULL;
    if (ctx.opts.refresh_fixtures) {
        const std::uint64_t fn = ctx.cfg.get_u64("fixture_samples", 30000);
        const LadderStats ref = ladder_stats(gauss, fn, fseed, no_grid);
        Fixture f{ref.first_ladder_height.value, ref.first_ladder_height.stderr_, fn, fseed};
        write_fixture(fixture_path, "gaussian_first_ladder_mean", f);
    }
    const auto fixture = read_fixture(fixture_path, "gaussian_first_ladder_mean");
    const LadderStats gl =
        ladder_stats(gauss, ctx.cfg.get_u64("gauss_ladder_samples", 5000), seed + 9, no_grid);
    csv.row({"gaussian", "0", "0", "ladder", "mc", num(gl.first_ladder_height.value),
             num(gl.first_ladder_height.stderr_),
             std::to_string(gl.first_ladder_height.samples)});
    ctx.metrics["gaussian_first_ladder_mean"] = gl.first_ladder_height.value;
    if (fixture) {
        const double comb = std::hypot(gl.first_ladder_height.stderr_, fixture->stderr_);
        const double dist = std::abs(gl.first_ladder_height.value - fixture->value) / comb;
        ctx.metrics["gaussian_ladder_fixture"] = fixture->value;
        ctx.verdict("gaussian_ladder_vs_fixture_4se", dist <= 4.0);
    } else {
        ctx.info("gaussian_ladder_vs_fixture_4se", "informational (fixture missing)");
    }

    // exit identity b * P{down first} -> E[S_{H_a}] on the lattice (exactly 1)
    bool identity_ok = true;
    for (double b : ctx.cfg.get_list("identity_b_grid", {100, 1000, 10000})) {
        const ExitResult ex = exit_prob(lattice, 1, b,
                                        ctx.cfg.get_u64("identity_samples", 10000),
                                        seed + static_cast<std::uint64_t>(b));
        const double scaled = b * (1.0 - ex.mc.value);
        const double se = b * ex.mc.stderr_;
        csv.row({"lattice", "1", num(b), "exit_identity", "mc", num(scaled), num(se),
                 std::to_string(ex.mc.samples)});
        if (se > 0.0 && std::abs(scaled - 1.0) / se > 4.0) identity_ok = false;
    }
    ctx.verdict("exit_identity_4se", identity_ok);

    // bounded-jump overshoot moment flatness across levels
    const std::vector<double> b_grid = ctx.cfg.get_list("overshoot_b_grid", {2, 4, 8});
    const auto pts = overshoot_moment(EnvironmentLaw::two_point(), 0.5, b_grid,
                                      ctx.cfg.get_u64("overshoot_samples", 20000), seed + 13);
    double mn = INFINITY, mx = 0.0;
    for (const auto& p : pts) {
        csv.row({"two-point-marginal", num(p.b), "0", "overshoot_moment", "mc",
                 num(p.moment.value), num(p.moment.stderr_), std::to_string(p.moment.samples)});
        mn = std::min(mn, p.moment.value);
        mx = std::max(mx, p.moment.value);
    }
    ctx.metrics["overshoot_moment_ratio"] = mn > 0.0 ? mx / mn : 0.0;
    ctx.verdict("overshoot_moment_bounded", mn > 0.0 && mx / mn < 1.5);
    (void)marginal;
}

// ------------------------------------------------------------------- extremes

void exp_extremes(Ctx& ctx) {
    const std::vector<double> alphas = ctx.cfg.get_list("alpha_list", {1.0, 2.0});
    const std::uint64_t n = ctx.cfg.get_u64("n", 1000000);
    const std::int64_t k = ctx.replicas(100);
    const std::uint64_t seed = ctx.seed();

    CsvWriter csv(ctx.csv_path(), "replica, alpha, n, ratio");
    bool all_ok = true;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const double alpha = alphas[ai];
        std::vector<double> ratios(static_cast<std::size_t>(k));
        parallel_replicas(k, [&](std::int64_t rep) {
            ratios[static_cast<std::size_t>(rep)] = extremes_check(
                alpha, n, seed + 1000 * ai + static_cast<std::uint64_t>(rep));
        });
        for (std::int64_t rep = 0; rep < k; ++rep)
            csv.row({std::to_string(rep), num(alpha), std::to_string(n),
                     num(ratios[static_cast<std::size_t>(rep)])});
        const double med = median_of(ratios);
        ctx.metrics["median_ratio_alpha=" + num(alpha)] = med;
        if (n >= 100000 && !(med >= 0.85 / alpha && med <= 1.15 / alpha)) all_ok = false;
    }
    if (n >= 100000)
        ctx.verdict("median_ratio_band", all_ok);
    else
        ctx.info("median_ratio_band", "informational (n too small)");
}

}  // namespace

// ------------------------------------------------------------- config parsing

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': not a number: '" + it->second + "'");
    }
}

std::int64_t ExperimentConfig::get_int(const std::string& key, std::int64_t fallback) const {
    return static_cast<std::int64_t>(
        std::llround(get_double(key, static_cast<double>(fallback))));
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    if (v < 0) throw std::runtime_error("config key '" + key + "': must be non-negative");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> ExperimentConfig::get_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw std::runtime_error("config key '" + key + "': not a number list: '" +
                                     it->second + "'");
        }
    }
    return out;
}

std::string ExperimentConfig::digest() const {
    // FNV-1a over the sorted key/value pairs
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [k, v] : kv_) {
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------------------------------------------ dispatch

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "verify-law",  "theorem-main", "displacement", "gamma-scaling", "excursion-tail",
        "spine-check", "zr-moments",   "mu-l",         "rw1d-suite",    "extremes"};
    return names;
}

int run_experiment(const std::string& name, const ExperimentConfig& config,
                   const RunOptions& options) {
    Ctx ctx{config, options, name};
    try {
        if (name == "verify-law") exp_verify_law(ctx);
        else if (name == "theorem-main") exp_trajectory(ctx, false);
        else if (name == "displacement") exp_trajectory(ctx, true);
        else if (name == "gamma-scaling") exp_gamma_scaling(ctx);
        else if (name == "excursion-tail") exp_excursion_tail(ctx);
        else if (name == "spine-check") exp_spine_check(ctx);
        else if (name == "zr-moments") exp_zr_moments(ctx);
        else if (name == "mu-l") exp_mu_l(ctx);
        else if (name == "rw1d-suite") exp_rw1d_suite(ctx);
        else if (name == "extremes") exp_extremes(ctx);
        else {
            std::cerr << "unknown experiment: " << name << "\n";
            return kExitUnknownExperiment;
        }
    } catch (const BudgetError& e) {
        std::cerr << e.what() << "\n";
        return kExitBudgetExceeded;
    }

    json summary;
    summary["schema_version"] = 1;
    summary["experiment"] = name;
    summary["config_digest"] = config.digest();
    summary["metrics"] = ctx.metrics;
    summary["verdicts"] = ctx.verdicts;
    const std::filesystem::path out =
        std::filesystem::path(options.out_dir) / (name + "-summary.json");
    std::filesystem::create_directories(out.parent_path());
    std::ofstream(out) << summary.dump(2) << "\n";

    if (options.assert_verdicts && ctx.failed > 0) return kExitAssertFailed;
    return kExitOk;
}

// ------------------------------------------------------------------ summarize

std::vector<std::string> csv_data_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read csv: " + path);
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        rows.push_back(line);
    }
    return rows;
}

std::string summarize_csv(const std::vector<std::string>& csv_paths,
                          const std::string& x_column, const std::string& y_column) {
    if (csv_paths.empty()) throw std::runtime_error("summarize: no input files");
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cells.push_back(trim(tok));
        return cells;
    };
    for (const auto& path : csv_paths) {
        auto lines = csv_data_rows(path);
        if (lines.empty()) throw std::runtime_error("summarize: empty csv: " + path);
        const auto h = split(lines.front());
        if (header.empty()) header = h;
        else if (h != header) throw std::runtime_error("summarize: schema mismatch in " + path);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            rows.push_back(split(lines[i]));
        }
    }

    json out;
    out["schema_version"] = 1;
    out["n_rows"] = rows.size();
    json cols = json::object();
    std::vector<std::vector<double>> numeric(header.size());
    std::vector<bool> is_numeric(header.size(), true);
    for (std::size_t c = 0; c < header.size(); ++c) {
        for (const auto& row : rows) {
            if (c >= row.size()) { is_numeric[c] = false; break; }
            try {
                std::size_t pos = 0;
                const double v = std::stod(row[c], &pos);
                if (pos != row[c].size()) { is_numeric[c] = false; break; }
                numeric[c].push_back(v);
            } catch (const std::exception&) {
                is_numeric[c] = false;
                break;
            }
        }
        if (is_numeric[c] && !numeric[c].empty()) {
            json stats;
            stats["median"] = median_of(numeric[c]);
            stats["iqr"] = quantile_of(numeric[c], 0.75) - quantile_of(numeric[c], 0.25);
            cols[header[c]] = stats;
        }
    }
    out["columns"] = cols;

    if (!x_column.empty() && !y_column.empty()) {
        const auto xi = std::find(header.begin(), header.end(), x_column);
        const auto yi = std::find(header.begin(), header.end(), y_column);
        if (xi == header.end() || yi == header.end())
            throw std::runtime_error("summarize: unknown slope column");
        const std::size_t xc = static_cast<std::size_t>(xi - header.begin());
        const std::size_t yc = static_cast<std::size_t>(yi - header.begin());
        if (!is_numeric[xc] || !is_numeric[yc])
            throw std::runtime_error("summarize: slope columns must be numeric");
        out["slope"] = ols_slope(numeric[xc], numeric[yc]);
        out["slope_x"] = x_column;
        out["slope_y"] = y_column;
    }
    return out.dump(2);
}

}  // namespace gwlab
