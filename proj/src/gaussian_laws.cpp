#include "oubridge/gaussian_laws.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "numerics.hpp"

namespace oubridge {

namespace {

void check_size(const SpectralModel& model, const ModeVector& v, const char* name) {
    if (static_cast<std::size_t>(v.size()) != model.n_modes()) {
        throw std::invalid_argument(std::string(name) + " has the wrong number of modes");
    }
}

void require_invariant(const SpectralModel& model) {
    if (!model.has_invariant_measure()) {
        throw std::domain_error("no invariant measure: some alpha_n = 0");
    }
}

}  // namespace

GaussianMarginal ou_marginal(const SpectralModel& model, const ModeVector& x, double t) {
    check_size(model, x, "x");
    GaussianMarginal out{ModeVector(x.size()), ModeVector(x.size())};
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        out.mean[n] = semigroup_factor(model, t, n) * x[n];
        out.variance[n] = covariance_qt(model, t, n);
    }
    return out;
}

GaussianMarginal bridge_marginal(const SpectralModel& model, const ModeVector& x,
                                 const ModeVector& y, double t, double T) {
    check_size(model, x, "x");
    check_size(model, y, "y");
    GaussianMarginal out{ModeVector(x.size()), ModeVector(x.size())};
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double drift_end = semigroup_factor(model, T, n) * x[n];
        out.mean[n] = semigroup_factor(model, t, n) * x[n] +
                      bridge_gain(model, t, T, n) * (y[n] - drift_end);
        out.variance[n] = bridge_variance(model, t, T, n);
    }
    return out;
}

double two_time_covariance(const SpectralModel& model, double s, double t, std::size_t n) {
    if (s > t) throw std::invalid_argument("two_time_covariance needs s <= t");
    return semigroup_factor(model, t - s, n) * covariance_qt(model, s, n);
}

double log_g_factor(const SpectralModel& model, double T, const ModeVector& x, const ModeVector& y) {
    check_size(model, x, "x");
    check_size(model, y, "y");
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    double log_g = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double s = semigroup_factor(model, T, n);
        const double q = covariance_qt(model, T, n);
        log_g += (x[n] * y[n] * s - 0.5 * x[n] * x[n] * s * s) / q;
    }
    return log_g;
}

double g_factor(const SpectralModel& model, double T, const ModeVector& x, const ModeVector& y) {
    return std::exp(log_g_factor(model, T, x, y));
}

double log_k_factor(const SpectralModel& model, double T, const ModeVector& y) {
    check_size(model, y, "y");
    require_invariant(model);
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    double log_k = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double one_minus_s2 = -std::expm1(-2.0 * model.alpha(n) * T);
        log_k += -0.5 * std::log(one_minus_s2) - 0.5 * regularity_ct(model, T, n) * y[n] * y[n];
    }
    return log_k;
}

double k_factor(const SpectralModel& model, double T, const ModeVector& y) {
    return std::exp(log_k_factor(model, T, y));
}

double log_invariant_density(const SpectralModel& model, const ModeVector& y) {
    check_size(model, y, "y");
    require_invariant(model);
    double log_p = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double v = stationary_variance(model, n);
        log_p += -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * y[n] * y[n] / v;
    }
    return log_p;
}

double psi_density(const SpectralModel& model, double t, double T, const ModeVector& x,
                   const ModeVector& z) {
    check_size(model, x, "x");
    check_size(model, z, "z");
    if (!(t > 0.0 && t < T)) throw std::invalid_argument("psi needs 0 < t < T");
    double log_psi = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double a = model.alpha(n);
        const double l = model.lambda(n);
        const double st_x = std::exp(-a * t) * x[n];
        const double sT_x = std::exp(-a * T) * x[n];
        const double q_t = detail::ou_variance(a, l, t);
        const double q_T = detail::ou_variance(a, l, T);
        log_psi += -0.5 * st_x * st_x / q_t + 0.5 * sT_x * sT_x / q_T + z[n] * st_x / q_t;
    }
    return std::exp(log_psi);
}

double psi_density_pinned(const SpectralModel& model, double t, double T, const ModeVector& x,
                          const ModeVector& y, const ModeVector& z) {
    check_size(model, y, "y");
    check_size(model, z, "z");
    ModeVector shifted(z.size());
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        shifted[n] = z[n] - bridge_gain(model, t, T, n) * y[n];
    }
    return psi_density(model, t, T, x, shifted);
}

double hs_norm_linear(const SpectralModel& model, double T) {
    require_invariant(model);
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    double log_norm = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        log_norm += -0.5 * std::log(-std::expm1(-2.0 * model.alpha(n) * T));
    }
    return std::exp(log_norm);
}

}  // namespace oubridge
