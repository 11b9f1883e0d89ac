#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gwlab {

// Thrown when a declared step/state/vertex budget would be exceeded; the
// harness maps it to a dedicated exit code instead of emitting partial data.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EstimatorKind {
    ExactEnumeration,
    QMonteCarlo,
    DirectMonteCarlo,
};

inline const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::ExactEnumeration: return "exact-enumeration";
        case EstimatorKind::QMonteCarlo: return "Q-monte-carlo";
        case EstimatorKind::DirectMonteCarlo: return "direct-monte-carlo";
    }
    return "?";
}

// Universal Monte Carlo return type: point value, standard error, sample count.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    EstimatorKind kind = EstimatorKind::DirectMonteCarlo;

    static Estimate exact(double v) {
        return Estimate{v, 0.0, 1, EstimatorKind::ExactEnumeration};
    }
    // |value - other| in units of the combined standard error
    double sigma_distance(double reference) const {
        if (stderr_ == 0.0) return value == reference ? 0.0 : INFINITY;
        return std::abs(value - reference) / stderr_;
    }
};

// Streaming (mean, M2, count) accumulator; merges are exact, so parallel
// replicas can reduce in replica order deterministically.
class MeanAccumulator {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    void merge(const MeanAccumulator& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) { *this = o; return; }
        const double d = o.mean_ - mean_;
        const double nt = static_cast<double>(n_ + o.n_);
        m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / nt;
        mean_ = (mean_ * static_cast<double>(n_) + o.mean_ * static_cast<double>(o.n_)) / nt;
        n_ += o.n_;
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_of_mean() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }
    Estimate estimate(EstimatorKind kind = EstimatorKind::DirectMonteCarlo) const {
        return Estimate{mean(), stderr_of_mean(), n_, kind};
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Ratio estimator sum(w*y)/sum(w) with delta-method standard error; used by
// the self-normalized importance-weighted samplers.
class WeightedAccumulator {
public:
    void add(double y, double w) {
        ++n_;
        sw_ += w;
        swy_ += w * y;
        sww_ += w * w;
        swwyy_ += w * w * y * y;
        swwy_ += w * w * y;
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return sw_ > 0.0 ? swy_ / sw_ : 0.0; }
    double stderr_of_mean() const {
        if (n_ < 2 || sw_ <= 0.0) return 0.0;
        const double m = mean();
        // var of ratio: sum w^2 (y - m)^2 / (sum w)^2
        const double num = swwyy_ - 2.0 * m * swwy_ + m * m * sww_;
        return std::sqrt(num > 0.0 ? num : 0.0) / sw_;
    }
    Estimate estimate(EstimatorKind kind = EstimatorKind::QMonteCarlo) const {
        return Estimate{mean(), stderr_of_mean(), n_, kind};
    }

private:
    std::uint64_t n_ = 0;
    double sw_ = 0.0, swy_ = 0.0, sww_ = 0.0, swwyy_ = 0.0, swwy_ = 0.0;
};

}  // namespace gwlab
