#pragma once

#include <cstddef>

#include "oubridge/spectral_model.hpp"

namespace oubridge {

/// Gaussian law with diagonal covariance in the mode basis.
struct GaussianMarginal {
    ModeVector mean;
    ModeVector variance;
};

/// Law of Z_t^x: N(S_t x, Q_t).
GaussianMarginal ou_marginal(const SpectralModel& model, const ModeVector& x, double t);

/// Law of the bridge from x to y at time t: mean S_t x + gain (y - S_T x),
/// variance Q_t (1 - V_t^2).
GaussianMarginal bridge_marginal(const SpectralModel& model, const ModeVector& x,
                                 const ModeVector& y, double t, double T);

/// Cov(Z_t, Z_s) per mode for 0 <= s <= t, i.e. e^{-alpha (t - s)} Q_s.
double two_time_covariance(const SpectralModel& model, double s, double t, std::size_t n);

/// log of d mu_T^x / d mu_T^0 (y) (Cameron-Martin).
double log_g_factor(const SpectralModel& model, double T, const ModeVector& x, const ModeVector& y);
double g_factor(const SpectralModel& model, double T, const ModeVector& x, const ModeVector& y);

/// log of d mu_T^0 / d nu (y), written through C(T):
///   sum_n [-1/2 log(1 - s_n^2) - 1/2 C_n(T) y_n^2],  s_n = e^{-alpha_n T}.
double log_k_factor(const SpectralModel& model, double T, const ModeVector& y);
double k_factor(const SpectralModel& model, double T, const ModeVector& y);

/// Density of nu = N(0, Q_inf) with respect to Lebesgue measure, in log form.
double log_invariant_density(const SpectralModel& model, const ModeVector& y);

/// Density of mu_t^{x,y} with respect to mu_t^{0,y} at z for the bridge pinned
/// at y = 0:
///   exp(-1/2 |Q_t^{-1/2} S_t x|^2 + 1/2 |Q_T^{-1/2} S_T x|^2
///       + <Q_t^{-1/2} z, Q_t^{-1/2} S_t x>).
/// For a general endpoint the same expression applies to z shifted by the
/// y-dependent part of the bridge mean; see psi_density_pinned.
double psi_density(const SpectralModel& model, double t, double T, const ModeVector& x,
                   const ModeVector& z);

/// psi for an arbitrary endpoint y: psi_density at z - gain(t) y.
double psi_density_pinned(const SpectralModel& model, double t, double T, const ModeVector& x,
                          const ModeVector& y, const ModeVector& z);

/// ||P_T||_{2,2} of the OU semigroup on L^2(nu): prod_n (1 - e^{-2 alpha_n T})^{-1/2}.
double hs_norm_linear(const SpectralModel& model, double T);

}  // namespace oubridge
