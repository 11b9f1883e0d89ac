#include "gwlab/rw1d.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gwlab {

StepLaw1D StepLaw1D::simple_lattice() {
    StepLaw1D l;
    l.kind_ = Kind::Lattice;
    l.variance_ = 1.0;
    return l;
}

StepLaw1D StepLaw1D::gaussian(double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("gaussian step law: variance must be > 0");
    StepLaw1D l;
    l.kind_ = Kind::Gaussian;
    l.variance_ = variance;
    return l;
}

StepLaw1D StepLaw1D::spine_marginal(const EnvironmentLaw& law) {
    StepLaw1D l;
    if (law.family() == Family::TwoPoint) {
        // under the size-biased measure the spine increment is +-a with
        // probability 1/2 each
        l.kind_ = Kind::TwoPointMarginal;
        l.jump_ = law.jump();
        l.variance_ = law.jump() * law.jump();
    } else {
        // Gaussian families: e^{-v} tilting of N(mu, s2) with mu = s2 is
        // exactly N(0, s2)
        l.kind_ = Kind::GaussianMarginal;
        l.variance_ = law.displacement_var();
    }
    return l;
}

double StepLaw1D::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::Lattice: return rng.bernoulli(0.5) ? 1.0 : -1.0;
        case Kind::TwoPointMarginal: return rng.bernoulli(0.5) ? jump_ : -jump_;
        case Kind::Gaussian:
        case Kind::GaussianMarginal: return rng.gaussian(0.0, std::sqrt(variance_));
    }
    return 0.0;
}

ExitResult exit_prob(const StepLaw1D& law, double a, double b, std::uint64_t n_samples,
                     std::uint64_t seed) {
    if (!(a >= 0.0 && b >= 0.0 && a + b > 0.0))
        throw std::invalid_argument("exit_prob: need a >= 0, b >= 0, a + b > 0");
    ExitResult out;
    MeanAccumulator acc;
    Rng rng(mix64(seed));
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        double s = 0.0;
        for (;;) {
            s += law.sample(rng);
            if (s >= a) { acc.add(1.0); break; }
            if (s <= -b) { acc.add(0.0); break; }
        }
    }
    out.mc = acc.estimate();
    if (law.is_lattice() && a >= 1.0 && b >= 1.0 && a == std::floor(a) && b == std::floor(b))
        out.closed_form = b / (a + b);
    return out;
}

namespace {

// Exact corridor probability on the +-1 lattice. The walk climbs through
// layers of the running max M; within a layer the drawdown D performs a
// symmetric walk absorbed either at a fresh max (-> next layer) or at the
// kill boundary. Entering each layer at D = 0 makes the layer passages
// independent, so the probability is a product of gambler's-ruin factors.
double corridor_lattice_dp(double r, double lambda, CorridorMode mode,
                           std::uint64_t state_budget) {
    const std::int64_t top = static_cast<std::int64_t>(std::ceil(r));
    const std::int64_t dmax_global = static_cast<std::int64_t>(std::ceil(lambda)) - 1;
    if (dmax_global < 0) return 0.0;
    if (static_cast<std::uint64_t>(top) * static_cast<std::uint64_t>(dmax_global + 1) >
        state_budget)
        throw BudgetError("corridor_prob: lattice DP state budget exceeded at (r = " +
                          std::to_string(r) + ", lambda = " + std::to_string(lambda) + ")");
    double prob = 1.0;
    for (std::int64_t m = 0; m < top; ++m) {
        std::int64_t dmax = dmax_global;
        if (mode == CorridorMode::WithFloor && m < dmax) dmax = m;  // S = M - D >= 0
        // drawdown chain on {0..dmax}, absorbed at -1 (new max) or dmax + 1
        prob *= static_cast<double>(dmax + 1) / static_cast<double>(dmax + 2);
    }
    return prob;
}

}  // namespace

Estimate corridor_prob(const StepLaw1D& law, double r, double lambda, CorridorMode mode,
                       CorridorMethod method, std::uint64_t n_samples, std::uint64_t seed,
                       std::uint64_t state_budget) {
    if (!(r >= 1.0 && lambda >= 1.0))
        throw std::invalid_argument("corridor_prob: need r >= 1 and lambda >= 1");
    if (method == CorridorMethod::LatticeDp) {
        if (!law.is_lattice())
            throw std::invalid_argument("corridor_prob: lattice DP requires the +-1 lattice law");
        return Estimate::exact(corridor_lattice_dp(r, lambda, mode, state_budget));
    }
    MeanAccumulator acc;
    Rng rng(mix64(seed));
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        double s = 0.0, smax = 0.0;
        double outcome = 1.0;
        while (s < r) {
            s += law.sample(rng);
            if (s > smax) smax = s;
            if (smax - s >= lambda || (mode == CorridorMode::WithFloor && s < 0.0)) {
                outcome = 0.0;
                break;
            }
        }
        acc.add(outcome);
    }
    return acc.estimate();
}

LadderStats ladder_stats(const StepLaw1D& law, std::uint64_t n_samples, std::uint64_t seed,
                         std::span<const double> b_grid) {
    LadderStats out;
    MeanAccumulator ladder;
    Rng rng(mix64(seed));
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        double s = 0.0;
        do s += law.sample(rng); while (s <= 0.0);
        ladder.add(s);
    }
    out.first_ladder_height = ladder.estimate();
    for (double b : b_grid) {
        MeanAccumulator acc;
        for (std::uint64_t i = 0; i < n_samples; ++i) {
            double s = 0.0;
            while (s < b) s += law.sample(rng);
            acc.add(s - b);
        }
        out.b_grid.push_back(b);
        out.overshoot_mean.push_back(acc.estimate());
    }
    return out;
}

double extremes_check(double alpha, std::uint64_t n, std::uint64_t seed) {
    if (!(alpha > 0.0 && n >= 10)) throw std::invalid_argument("extremes_check: alpha > 0, n >= 10");
    Rng rng(mix64(seed));
    double best = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        const double xi = -std::log(u) / alpha;
        if (xi > best) best = xi;
    }
    return best / std::log(static_cast<double>(n));
}

}  // namespace gwlab
