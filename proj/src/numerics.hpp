#pragma once

#include <cmath>

namespace oubridge::detail {

// Below this argument the closed forms switch to their Taylor expansions.
inline constexpr double kSmallArgument = 1e-8;

/// (1 - e^{-u}) / u, continuous at u = 0.
inline double one_minus_exp_over(double u) {
    if (std::abs(u) < kSmallArgument) return 1.0 - u / 2.0 + u * u / 6.0;
    return -std::expm1(-u) / u;
}

/// lambda (1 - e^{-2 alpha t}) / (2 alpha), equal to lambda t when alpha = 0.
inline double ou_variance(double alpha, double lambda, double t) {
    return lambda * t * one_minus_exp_over(2.0 * alpha * t);
}

/// Q_t / Q_T (lambda cancels).
inline double variance_ratio(double alpha, double t, double T) {
    return (t * one_minus_exp_over(2.0 * alpha * t)) / (T * one_minus_exp_over(2.0 * alpha * T));
}

}  // namespace oubridge::detail
