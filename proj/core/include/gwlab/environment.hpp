#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwlab/estimate.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

enum class Family { FixedGaussian, TwoPoint, PoissonGaussian };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

enum class MomentMethod { ClosedForm, Quadrature, MonteCarlo };

struct DeltaProbe {
    double delta;
    Estimate down_moment;   // E[sum e^{-(1+delta)V}]
    Estimate up_moment;     // E[sum e^{delta V}]
    Estimate count_moment;  // E[(#offspring)^{1+delta}]
};

struct BoundaryReport {
    Estimate m0;      // E[sum e^{-V}], expect 1
    Estimate m1;      // E[sum V e^{-V}], expect 0
    Estimate sigma2;  // E[sum V^2 e^{-V}]
    std::vector<DeltaProbe> probes;
};

struct LawError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Parametric joint law of (offspring count, child displacements). Free
// parameters are solved at construction so the defining moment conditions
// m0 = 1, m1 = 0 hold exactly.
class EnvironmentLaw {
public:
    // b >= 2 children, i.i.d. N(2 log b, 2 log b) displacements
    static EnvironmentLaw fixed_gaussian(int branching);
    // exactly 2 children, displacement +a w.p. p, -a w.p. 1-p,
    // a = arccosh(2), p = (2+sqrt(3))/4
    static EnvironmentLaw two_point();
    // Poisson(lambda) offspring, lambda > 1, i.i.d. N(2 log lambda, 2 log lambda)
    static EnvironmentLaw poisson_gaussian(double lambda);

    Family family() const { return family_; }
    double offspring_mean() const;
    double sigma2() const { return sigma2_; }

    // Gaussian families: (mu, s2); TwoPoint: (a, p)
    double displacement_mean() const { return mu_; }
    double displacement_var() const { return s2_; }
    double jump() const { return jump_a_; }
    double up_prob() const { return prob_up_; }
    int branching() const { return branching_; }
    double poisson_mean() const { return lambda_; }

    // one fresh generation of child displacements
    void sample_offspring(Rng& rng, std::vector<double>& out) const;

    BoundaryReport verify_boundary_case(MomentMethod method,
                                        std::uint64_t n_samples = 0) const;

    std::string describe() const;

private:
    EnvironmentLaw() = default;

    Family family_ = Family::TwoPoint;
    int branching_ = 0;      // FixedGaussian
    double lambda_ = 0.0;    // PoissonGaussian
    double mu_ = 0.0, s2_ = 0.0;
    double jump_a_ = 0.0, prob_up_ = 0.0;
    double sigma2_ = 0.0;
};

// generic factory used by the config layer; param is b for FixedGaussian,
// ignored for TwoPoint, lambda for PoissonGaussian
EnvironmentLaw make_law(Family family, double param = 0.0);

using VertexId = std::int64_t;
inline constexpr VertexId kParentOfRoot = -1;  // the reflecting vertex above the root

struct VertexRecord {
    VertexId parent = kParentOfRoot;
    double v = 0.0;     // potential V(x), nats
    double dv = 0.0;    // V(x) - V(parent)
    double vbar = 0.0;  // max of V along [[root, x]]
    double vmin = 0.0;  // min of V along [[root, x]]
    std::int32_t depth = 0;
    std::int32_t child_count = 0;
    VertexId child_begin = -1;       // children stored contiguously
    double lambda = 0.0;             // sum_children e^{-dv}, valid once expanded
    bool expanded = false;
    std::uint64_t stream = 0;        // RNG stream key of this vertex
};

struct Transition {
    double p_parent;
    std::vector<std::pair<VertexId, double>> children;
};

// Children of one vertex; contiguous ids [first, first + count)
struct ChildRange {
    VertexId first = -1;
    std::int32_t count = 0;
    struct iterator {
        VertexId id;
        VertexId operator*() const { return id; }
        iterator& operator++() { ++id; return *this; }
        bool operator!=(const iterator& o) const { return id != o.id; }
    };
    iterator begin() const { return {first}; }
    iterator end() const { return {first + count}; }
    bool empty() const { return count == 0; }
    VertexId operator[](std::int32_t i) const { return first + i; }
};

// Lazily realized quenched environment. Children are sampled exactly once per
// vertex, from an RNG stream keyed to the vertex identity, so expansion order
// cannot change the realized tree.
class TreeArena {
public:
    TreeArena(EnvironmentLaw law, std::uint64_t master_seed, std::uint64_t replica = 0);

    const EnvironmentLaw& law() const { return law_; }
    VertexId root() const { return 0; }
    std::size_t size() const { return v_.size(); }
    const VertexRecord& at(VertexId id) const { return v_[static_cast<std::size_t>(id)]; }

    // samples offspring on first call, returns existing children afterwards
    ChildRange expand(VertexId id);
    bool is_expanded(VertexId id) const { return v_[static_cast<std::size_t>(id)].expanded; }
    ChildRange children_of(VertexId id) const;

    Transition transition_probs(VertexId id) const;

    // recompute Lambda from stored children (consistency checks)
    double recompute_lambda(VertexId id) const;

    // line-based debug dump: vertex_id, parent_id, V, dV
    void dump(std::ostream& os) const;

private:
    EnvironmentLaw law_;
    std::vector<VertexRecord> v_;
    std::vector<double> scratch_;
};

}  // namespace gwlab
