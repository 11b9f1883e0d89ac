#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace gwlab {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b), stable for widely separated magnitudes
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// log(e^a - e^b), requires a >= b
inline double log_sub(double a, double b) {
    if (b == kNegInf) return a;
    return a + std::log1p(-std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs)
        if (x > hi) hi = x;
    if (hi == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

}  // namespace gwlab
