#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gwlab/environment.hpp"
#include "gwlab/estimate.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

// One step of the distinguished ray under the size-biased measure. For
// discrete laws the configuration is sampled exactly (weight 1); for
// continuous laws the base law serves as proposal and `weight` carries the
// likelihood ratio W_1 of the sampled generation.
struct SpineStep {
    double ds = 0.0;             // spine displacement
    double lambda = 0.0;         // sum over all children of e^{-dv}
    std::int32_t n_children = 0;
    double weight = 1.0;
};

// One Q-distributed spine trajectory up to a fixed length or a first-passage
// stop; increments and companion statistics are i.i.d. across steps.
struct SpineSample {
    std::vector<double> ds;
    std::vector<double> lambda;
    double terminal_s = 0.0;
    double weight = 1.0;  // product of per-step weights
    bool capped = false;  // first-passage run exceeded the step cap
};

SpineStep sample_spine_step(const EnvironmentLaw& law, Rng& rng);

// spine run to generation n
SpineSample run_spine(const EnvironmentLaw& law, std::int64_t n, Rng& rng);

// spine run to first passage of level r (S_i >= r), subject to a step cap
SpineSample run_spine_to_level(const EnvironmentLaw& law, double r, Rng& rng,
                               std::int64_t step_cap = 1000000);

// path functional of (S_1, ..., S_n)
using PathFunction = std::function<double(std::span<const double>)>;

// E[sum over generation-n vertices of g(V(x_1), ..., V(x_n))] as the
// weighted spine average of e^{S_n} g(S_1, ..., S_n)
Estimate many_to_one(const EnvironmentLaw& law, std::int64_t n, const PathFunction& g,
                     std::uint64_t n_samples, std::uint64_t seed);

struct LineEstimate {
    Estimate estimate;
    std::uint64_t discarded = 0;  // spines that hit the step cap
};

// stopping-line analogue: expectation of the sum over the first-passage line
LineEstimate many_to_one_line(const EnvironmentLaw& law, double r, const PathFunction& g,
                              std::uint64_t n_samples, std::uint64_t seed,
                              std::int64_t step_cap = 1000000);

struct OvershootPoint {
    double b = 0.0;
    Estimate moment;  // E_Q[exp(c * overshoot at first passage of b)]
};

std::vector<OvershootPoint> overshoot_moment(const EnvironmentLaw& law, double c,
                                             std::span<const double> b_grid,
                                             std::uint64_t n_samples, std::uint64_t seed);

// mean of the block-restricted population functional behind the embedded
// supercritical tree: E_Q[e^{S_L} 1{S_L >= L^a} 1{max S < 2 L^a}
// 1{prod(1 + Lambda_j) <= e^{c4 L}}]
Estimate mu_l(const EnvironmentLaw& law, std::int64_t block_len, double alpha, double c4,
              std::uint64_t n_samples, std::uint64_t seed);

// direct simulation of E[W_n] over fresh trees (expected value 1)
Estimate martingale_check(const EnvironmentLaw& law, std::int64_t n,
                          std::uint64_t n_samples, std::uint64_t seed);

// empirical probe for the largest exponent q with a finite-looking moment
// E_Q[(sum e^{-V})^q]; only used to sanity-check grid parameters
double probe_weight_moment_exponent(const EnvironmentLaw& law, std::uint64_t n_samples,
                                    std::uint64_t seed);

}  // namespace gwlab
