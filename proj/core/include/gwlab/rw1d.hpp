#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gwlab/environment.hpp"
#include "gwlab/estimate.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

// Centered one-dimensional step law: the +-1 lattice (exact oracles live
// here), a plain Gaussian, or the spine marginal of an environment law.
class StepLaw1D {
public:
    static StepLaw1D simple_lattice();
    static StepLaw1D gaussian(double variance);
    static StepLaw1D spine_marginal(const EnvironmentLaw& law);

    double sample(Rng& rng) const;
    double variance() const { return variance_; }
    bool is_lattice() const { return kind_ == Kind::Lattice; }
    bool bounded_jumps() const {
        return kind_ == Kind::Lattice || kind_ == Kind::TwoPointMarginal;
    }

private:
    enum class Kind { Lattice, Gaussian, TwoPointMarginal, GaussianMarginal };
    Kind kind_ = Kind::Lattice;
    double variance_ = 1.0;
    double jump_ = 1.0;  // two-point marginal: +-jump with probability 1/2
};

struct ExitResult {
    Estimate mc;                        // P{H_a < H^-_{-b}} by simulation
    std::optional<double> closed_form;  // b/(a+b) on the lattice
};

ExitResult exit_prob(const StepLaw1D& law, double a, double b, std::uint64_t n_samples,
                     std::uint64_t seed);

enum class CorridorMode { WithFloor, NoFloor };
enum class CorridorMethod { MonteCarlo, LatticeDp };

// P{drawdown max(S)-S < lambda (and S >= 0 if WithFloor) for all j <= H_r};
// LatticeDp is exact for the +-1 lattice via a layered gambler's-ruin pass
// over (running max, drawdown) states
Estimate corridor_prob(const StepLaw1D& law, double r, double lambda, CorridorMode mode,
                       CorridorMethod method, std::uint64_t n_samples = 0,
                       std::uint64_t seed = 1, std::uint64_t state_budget = 100000000ULL);

struct LadderStats {
    Estimate first_ladder_height;  // E[S at the first ascending ladder epoch]
    std::vector<double> b_grid;
    std::vector<Estimate> overshoot_mean;  // E[S_{H_b} - b] per level
};

LadderStats ladder_stats(const StepLaw1D& law, std::uint64_t n_samples, std::uint64_t seed,
                         std::span<const double> b_grid = {});

// max of n i.i.d. exponential-tailed variables over log n; approaches 1/alpha
double extremes_check(double alpha, std::uint64_t n, std::uint64_t seed);

}  // namespace gwlab
