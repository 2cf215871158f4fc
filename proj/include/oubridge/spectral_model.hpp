#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oubridge {

/// Coefficient vector in the eigenbasis of A (one entry per retained mode).
using ModeVector = Eigen::VectorXd;

enum class Basis { abstract, dirichlet_sine };

/// Diagonal pair (A, Q): A e_n = -alpha_n e_n, Q e_n = lambda_n e_n.
///
/// Immutable after construction; every operator of the linear theory is a
/// per-mode scalar function of (alpha_n, lambda_n, times).
class SpectralModel {
public:
    SpectralModel(std::vector<double> alpha, std::vector<double> lambda,
                  Basis basis = Basis::abstract);

    /// Stochastic heat equation on (0,1) with Dirichlet conditions:
    /// alpha_n = (n pi)^2, e_n(xi) = sqrt(2) sin(n pi xi), n = 1..n_modes.
    static SpectralModel heat(std::size_t n_modes, double lambda = 1.0);
    static SpectralModel heat(std::size_t n_modes, std::vector<double> lambda);

    std::size_t n_modes() const noexcept { return alpha_.size(); }
    Basis basis() const noexcept { return basis_; }
    double alpha(std::size_t n) const { return alpha_.at(n); }
    double lambda(std::size_t n) const { return lambda_.at(n); }
    std::span<const double> alphas() const noexcept { return alpha_; }
    std::span<const double> lambdas() const noexcept { return lambda_; }
    double max_lambda() const noexcept;

    /// True when every mode has alpha_n > 0, i.e. N(0, Q_inf) exists.
    bool has_invariant_measure() const noexcept;
    /// Sum of lambda_n / (2 alpha_n); throws when some alpha_n = 0.
    double invariant_trace() const;

private:
    std::vector<double> alpha_;
    std::vector<double> lambda_;
    Basis basis_;
};

// Per-mode operators. All are pure functions of the model and the times;
// mode index n is zero-based.

/// e^{-alpha_n t}
double semigroup_factor(const SpectralModel& model, double t, std::size_t n);

/// Q_t = lambda_n (1 - e^{-2 alpha_n t}) / (2 alpha_n), with limit lambda_n t.
double covariance_qt(const SpectralModel& model, double t, std::size_t n);

/// Q_inf = lambda_n / (2 alpha_n).
double stationary_variance(const SpectralModel& model, std::size_t n);

/// V_t = e^{-alpha_n (T - t)} sqrt(Q_t / Q_T).
double contraction_vt(const SpectralModel& model, double t, double T, std::size_t n);

/// Endpoint coefficient of the bridge mean, e^{-alpha_n (T-t)} Q_t / Q_T.
double bridge_gain(const SpectralModel& model, double t, double T, std::size_t n);

/// Bridge marginal variance Q_t (1 - V_t^2).
double bridge_variance(const SpectralModel& model, double t, double T, std::size_t n);

/// F_s = sqrt(lambda_n) e^{-alpha_n (T-s)} / sqrt(Q_{T-s}); singular at s = T.
double feedback_fs(const SpectralModel& model, double s, double T, std::size_t n);

struct BOperators {
    double b1;
    double b2;
    double b3;
};

/// Per-mode factors of the three operators in the Girsanov weight:
///   B1(s) = F_s Q_{T-s}^{-1/2} e^{-alpha (T-s)}
///   B2(s) = sqrt(lambda) e^{-alpha (T-s)} Q_T^{-1} e^{-alpha T}
///   B3(s) = sqrt(lambda) e^{-alpha (T-s)} Q_T^{-1}
///
/// These are composed from the operator definitions. The closed forms printed
/// for the heat example carry (1 - e^{-alpha T})^{-1} where composing with
/// Q_T gives (1 - e^{-2 alpha T})^{-1}; the composed form is used here.
BOperators b_operators(const SpectralModel& model, double s, double T, std::size_t n);

/// S_0(T) = Q_inf^{-1/2} S_T Q_inf^{1/2} per mode, i.e. e^{-alpha_n T}.
double stationary_contraction(const SpectralModel& model, double T, std::size_t n);
/// max_n e^{-alpha_n T}.
double stationary_contraction_norm(const SpectralModel& model, double T);

/// C(T) = s^2 / ((1 - s^2) Q_inf), s = e^{-alpha_n T}.
double regularity_ct(const SpectralModel& model, double T, std::size_t n);

/// Operator norm of B3(s) over the retained modes.
double b3_operator_norm(const SpectralModel& model, double s, double T);

/// int_0^T |B2(s) x|^2 ds by adaptive Gauss-Kronrod quadrature, per mode.
ModeVector b2_isometry_integral(const SpectralModel& model, double T, const ModeVector& x);

/// int_0^{T - epsilon} |B3(s) y| ds, composite Gauss-Legendre on panels graded
/// geometrically toward s = T.
double b3_norm_integral(const SpectralModel& model, double T, const ModeVector& y,
                        double epsilon);

/// Physical-space transforms for the Dirichlet sine basis.
///
/// synthesize: u(xi_j) = sum_n z_n sqrt(2) sin((n+1) pi xi_j).
/// analyze: trapezoid quadrature of u(xi) e_n(xi) over [0, 1] with zero
/// boundary values; exact inverse of synthesize on a uniform interior grid
/// with at least n_modes points.
Eigen::VectorXd synthesize(const SpectralModel& model, const ModeVector& coeffs,
                           std::span<const double> points);
ModeVector analyze(const SpectralModel& model, const Eigen::VectorXd& values,
                   std::span<const double> points);

/// Uniform interior grid j / (count + 1), j = 1..count.
std::vector<double> interior_grid(std::size_t count);

/// Dense synthesis matrix Phi(j, n) = e_n(xi_j) and matching analysis matrix
/// (trapezoid weights folded in), so analyze(u) = W * u.
struct SineTransform {
    Eigen::MatrixXd synthesis;
    Eigen::MatrixXd analysis;
};
SineTransform make_sine_transform(const SpectralModel& model, std::span<const double> points);

}  // namespace oubridge
