#include "gwlab/environment.hpp"

#include <cmath>
#include <ostream>

namespace gwlab {

namespace {

constexpr double kPi = 3.141592653589793238462643;

// E[e^{t V}] for V ~ N(mu, s2)
double gaussian_mgf(double t, double mu, double s2) {
    return std::exp(t * mu + 0.5 * t * t * s2);
}

// composite Simpson of f over [lo, hi]
template <typename F>
double simpson(F f, double lo, double hi, int n) {
    if (n % 2) ++n;
    const double h = (hi - lo) / n;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// E[g(V)] for V ~ N(mu, s2) by quadrature over +-12 stddev
template <typename G>
double gaussian_quad(G g, double mu, double s2) {
    const double s = std::sqrt(s2);
    auto f = [&](double v) {
        const double z = (v - mu) / s;
        return g(v) * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * kPi));
    };
    return simpson(f, mu - 12.0 * s, mu + 12.0 * s, 4000);
}

constexpr double kDeltaGrid[] = {0.1, 0.25, 0.5};

}  // namespace

const char* to_string(Family f) {
    switch (f) {
        case Family::FixedGaussian: return "fixed-gaussian";
        case Family::TwoPoint: return "two-point";
        case Family::PoissonGaussian: return "poisson-gaussian";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    if (s == "fixed-gaussian" || s == "FixedGaussian") return Family::FixedGaussian;
    if (s == "two-point" || s == "TwoPoint") return Family::TwoPoint;
    if (s == "poisson-gaussian" || s == "PoissonGaussian") return Family::PoissonGaussian;
    throw LawError("unknown law family: " + s);
}

EnvironmentLaw EnvironmentLaw::fixed_gaussian(int branching) {
    if (branching < 2)
        throw LawError("fixed-gaussian: not supercritical (need b >= 2, got b = " +
                       std::to_string(branching) + ")");
    EnvironmentLaw law;
    law.family_ = Family::FixedGaussian;
    law.branching_ = branching;
    // m0 = 1 forces mu - s2/2 = log b; m1 = 0 forces mu = s2
    law.mu_ = 2.0 * std::log(static_cast<double>(branching));
    law.s2_ = law.mu_;
    // per child E[V^2 e^{-V}] = ((mu - s2)^2 + s2) e^{-mu + s2/2} = s2 / b
    law.sigma2_ = law.s2_;
    return law;
}

EnvironmentLaw EnvironmentLaw::two_point() {
    EnvironmentLaw law;
    law.family_ = Family::TwoPoint;
    law.branching_ = 2;
    // 2(p e^{-a} + (1-p) e^{a}) = 1 and p e^{-a} = (1-p) e^{a}
    // force cosh(a) = 2, p = e^{a}/4
    law.jump_a_ = std::log(2.0 + std::sqrt(3.0));  // arccosh(2)
    law.prob_up_ = (2.0 + std::sqrt(3.0)) / 4.0;
    law.sigma2_ = law.jump_a_ * law.jump_a_;
    return law;
}

EnvironmentLaw EnvironmentLaw::poisson_gaussian(double lambda) {
    if (!(lambda > 1.0))
        throw LawError("poisson-gaussian: not supercritical (need lambda > 1, got " +
                       std::to_string(lambda) + ")");
    EnvironmentLaw law;
    law.family_ = Family::PoissonGaussian;
    law.lambda_ = lambda;
    law.mu_ = 2.0 * std::log(lambda);
    law.s2_ = law.mu_;
    law.sigma2_ = law.s2_;
    return law;
}

EnvironmentLaw make_law(Family family, double param) {
    switch (family) {
        case Family::FixedGaussian: {
            const int b = static_cast<int>(std::llround(param));
            if (static_cast<double>(b) != param)
                throw LawError("fixed-gaussian: branching parameter must be an integer");
            return EnvironmentLaw::fixed_gaussian(b);
        }
        case Family::TwoPoint:
            return EnvironmentLaw::two_point();
        case Family::PoissonGaussian:
            return EnvironmentLaw::poisson_gaussian(param);
    }
    throw LawError("unknown family");
}

double EnvironmentLaw::offspring_mean() const {
    switch (family_) {
        case Family::FixedGaussian: return branching_;
        case Family::TwoPoint: return 2.0;
        case Family::PoissonGaussian: return lambda_;
    }
    return 0.0;
}

void EnvironmentLaw::sample_offspring(Rng& rng, std::vector<double>& out) const {
    out.clear();
    switch (family_) {
        case Family::FixedGaussian: {
            const double s = std::sqrt(s2_);
            for (int i = 0; i < branching_; ++i) out.push_back(rng.gaussian(mu_, s));
            break;
        }
        case Family::TwoPoint: {
            for (int i = 0; i < 2; ++i)
                out.push_back(rng.bernoulli(prob_up_) ? jump_a_ : -jump_a_);
            break;
        }
        case Family::PoissonGaussian: {
            const int n = rng.poisson(lambda_);
            const double s = std::sqrt(s2_);
            for (int i = 0; i < n; ++i) out.push_back(rng.gaussian(mu_, s));
            break;
        }
    }
}

std::string EnvironmentLaw::describe() const {
    switch (family_) {
        case Family::FixedGaussian:
            return "fixed-gaussian(b=" + std::to_string(branching_) + ")";
        case Family::TwoPoint:
            return "two-point";
        case Family::PoissonGaussian:
            return "poisson-gaussian(lambda=" + std::to_string(lambda_) + ")";
    }
    return "?";
}

BoundaryReport EnvironmentLaw::verify_boundary_case(MomentMethod method,
                                                    std::uint64_t n_samples) const {
    BoundaryReport rep;
    const double mean_n = offspring_mean();

    auto closed_probe = [&](double delta) {
        DeltaProbe p;
        p.delta = delta;
        double down, up, cnt;
        switch (family_) {
            case Family::FixedGaussian:
            case Family::PoissonGaussian: {
                down = mean_n * gaussian_mgf(-(1.0 + delta), mu_, s2_);
                up = mean_n * gaussian_mgf(delta, mu_, s2_);
                if (family_ == Family::FixedGaussian) {
                    cnt = std::pow(static_cast<double>(branching_), 1.0 + delta);
                } else {
                    // E[N^{1+delta}] by direct summation of the Poisson pmf
                    cnt = 0.0;
                    double pmf = std::exp(-lambda_);
                    for (int k_ = 0; k_ < 400; ++k_) {
                        if (k_ > 0) pmf *= lambda_ / k_;
                        cnt += std::pow(static_cast<double>(k_), 1.0 + delta) * pmf;
                    }
                }
                break;
            }
            case Family::TwoPoint: {
                auto two = [&](double t) {
                    return 2.0 * (prob_up_ * std::exp(t * jump_a_) +
                                  (1.0 - prob_up_) * std::exp(-t * jump_a_));
                };
                down = two(-(1.0 + delta));
                up = two(delta);
                cnt = std::pow(2.0, 1.0 + delta);
                break;
            }
            default:
                down = up = cnt = 0.0;
        }
        p.down_moment = Estimate::exact(down);
        p.up_moment = Estimate::exact(up);
        p.count_moment = Estimate::exact(cnt);
        return p;
    };

    switch (method) {
        case MomentMethod::ClosedForm: {
            double m0, m1, s2;
            if (family_ == Family::TwoPoint) {
                const double eup = std::exp(-jump_a_), edn = std::exp(jump_a_);
                m0 = 2.0 * (prob_up_ * eup + (1.0 - prob_up_) * edn);
                m1 = 2.0 * (prob_up_ * jump_a_ * eup - (1.0 - prob_up_) * jump_a_ * edn);
                s2 = 2.0 * jump_a_ * jump_a_ * (prob_up_ * eup + (1.0 - prob_up_) * edn);
            } else {
                const double base = gaussian_mgf(-1.0, mu_, s2_);
                m0 = mean_n * base;
                m1 = mean_n * (mu_ - s2_) * base;
                const double d = mu_ - s2_;
                s2 = mean_n * (d * d + s2_) * base;
            }
            rep.m0 = Estimate::exact(m0);
            rep.m1 = Estimate::exact(m1);
            rep.sigma2 = Estimate::exact(s2);
            for (double d : kDeltaGrid) rep.probes.push_back(closed_probe(d));
            break;
        }
        case MomentMethod::Quadrature: {
            if (family_ == Family::TwoPoint) {
                // two-point enumeration is already exact
                return verify_boundary_case(MomentMethod::ClosedForm, 0);
            }
            auto per_child = [&](auto g) { return mean_n * gaussian_quad(g, mu_, s2_); };
            rep.m0 = Estimate::exact(per_child([](double v) { return std::exp(-v); }));
            rep.m1 = Estimate::exact(per_child([](double v) { return v * std::exp(-v); }));
            rep.sigma2 = Estimate::exact(per_child([](double v) { return v * v * std::exp(-v); }));
            for (double d : kDeltaGrid) {
                DeltaProbe p;
                p.delta = d;
                p.down_moment = Estimate::exact(
                    per_child([d](double v) { return std::exp(-(1.0 + d) * v); }));
                p.up_moment = Estimate::exact(
                    per_child([d](double v) { return std::exp(d * v); }));
                p.count_moment = closed_probe(d).count_moment;
                rep.probes.push_back(p);
            }
            break;
        }
        case MomentMethod::MonteCarlo: {
            if (n_samples < 1) throw LawError("monte_carlo verification needs n_samples >= 1");
            MeanAccumulator a0, a1, a2;
            std::vector<MeanAccumulator> down(std::size(kDeltaGrid)), up(std::size(kDeltaGrid)),
                cnt(std::size(kDeltaGrid));
            Rng rng(mix64(0x6177616c6cULL));
            std::vector<double> kids;
            for (std::uint64_t i = 0; i < n_samples; ++i) {
                sample_offspring(rng, kids);
                double s0 = 0.0, s1 = 0.0, s2 = 0.0;
                std::vector<double> sd(std::size(kDeltaGrid), 0.0), su(std::size(kDeltaGrid), 0.0);
                for (double v : kids) {
                    const double w = std::exp(-v);
                    s0 += w;
                    s1 += v * w;
                    s2 += v * v * w;
                    for (std::size_t j = 0; j < std::size(kDeltaGrid); ++j) {
                        sd[j] += std::exp(-(1.0 + kDeltaGrid[j]) * v);
                        su[j] += std::exp(kDeltaGrid[j] * v);
                    }
                }
                a0.add(s0);
                a1.add(s1);
                a2.add(s2);
                for (std::size_t j = 0; j < std::size(kDeltaGrid); ++j) {
                    down[j].add(sd[j]);
                    up[j].add(su[j]);
                    cnt[j].add(std::pow(static_cast<double>(kids.size()), 1.0 + kDeltaGrid[j]));
                }
            }
            rep.m0 = a0.estimate();
            rep.m1 = a1.estimate();
            rep.sigma2 = a2.estimate();
            for (std::size_t j = 0; j < std::size(kDeltaGrid); ++j) {
                rep.probes.push_back(DeltaProbe{kDeltaGrid[j], down[j].estimate(),
                                               up[j].estimate(), cnt[j].estimate()});
            }
            break;
        }
    }
    return rep;
}

TreeArena::TreeArena(EnvironmentLaw law, std::uint64_t master_seed, std::uint64_t replica)
    : law_(std::move(law)) {
    VertexRecord root;
    root.parent = kParentOfRoot;
    root.stream = combine_streams(mix64(master_seed), mix64(replica + 0x5452454541ULL));
    v_.push_back(root);
}

ChildRange TreeArena::expand(VertexId id) {
    auto& rec = v_[static_cast<std::size_t>(id)];
    if (rec.expanded) return children_of(id);

    Rng rng(combine_streams(rec.stream, 0x4558ULL));
    law_.sample_offspring(rng, scratch_);

    const VertexId first = static_cast<VertexId>(v_.size());
    const double pv = rec.v, pbar = rec.vbar, pmin = rec.vmin;
    const std::int32_t pdepth = rec.depth;
    const std::uint64_t pstream = rec.stream;
    double lambda = 0.0;
    // note: push_back may reallocate, rec is dead past this point
    rec.expanded = true;
    rec.child_begin = first;
    rec.child_count = static_cast<std::int32_t>(scratch_.size());
    rec.lambda = 0.0;

    for (std::size_t i = 0; i < scratch_.size(); ++i) {
        VertexRecord c;
        c.parent = id;
        c.dv = scratch_[i];
        c.v = pv + c.dv;
        c.vbar = std::max(pbar, c.v);
        c.vmin = std::min(pmin, c.v);
        c.depth = pdepth + 1;
        c.stream = combine_streams(pstream, static_cast<std::uint64_t>(i) + 1);
        lambda += std::exp(-c.dv);
        v_.push_back(c);
    }
    v_[static_cast<std::size_t>(id)].lambda = lambda;
    return children_of(id);
}

ChildRange TreeArena::children_of(VertexId id) const {
    const auto& rec = v_[static_cast<std::size_t>(id)];
    return ChildRange{rec.child_begin, rec.child_count};
}

double TreeArena::recompute_lambda(VertexId id) const {
    double acc = 0.0;
    for (VertexId c : children_of(id)) acc += std::exp(-at(c).dv);
    return acc;
}

Transition TreeArena::transition_probs(VertexId id) const {
    const auto& rec = v_[static_cast<std::size_t>(id)];
    if (!rec.expanded)
        throw std::logic_error("transition_probs: vertex not expanded");
    Transition t;
    const double denom = 1.0 + rec.lambda;
    t.p_parent = 1.0 / denom;
    t.children.reserve(static_cast<std::size_t>(rec.child_count));
    for (VertexId c : children_of(id))
        t.children.emplace_back(c, std::exp(-at(c).dv) / denom);
    return t;
}

void TreeArena::dump(std::ostream& os) const {
    for (std::size_t i = 0; i < v_.size(); ++i) {
        const auto& r = v_[i];
        os << i << ", " << r.parent << ", " << r.v << ", " << r.dv << "\n";
    }
}

}  // namespace gwlab
