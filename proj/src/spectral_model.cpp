#include "oubridge/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "numerics.hpp"

namespace oubridge {

namespace {

void check_mode(const SpectralModel& model, std::size_t n) {
    if (n >= model.n_modes()) {
        throw std::out_of_range("mode index " + std::to_string(n) + " out of range");
    }
}

void check_time(double t, const char* what) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument(std::string(what) + " must be a finite non-negative time");
    }
}

void check_interval(double t, double T) {
    check_time(t, "t");
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw std::invalid_argument("horizon T must be positive");
    }
    if (t > T) {
        throw std::invalid_argument("t must not exceed the horizon T");
    }
}

double heat_alpha(std::size_t n) {
    const double k = static_cast<double>(n + 1) * std::numbers::pi;
    return k * k;
}

void require_sine_basis(const SpectralModel& model) {
    if (model.basis() != Basis::dirichlet_sine) {
        throw std::invalid_argument("no physical representation for an abstract basis");
    }
}

}  // namespace

SpectralModel::SpectralModel(std::vector<double> alpha, std::vector<double> lambda, Basis basis)
    : alpha_(std::move(alpha)), lambda_(std::move(lambda)), basis_(basis) {
    if (alpha_.empty()) {
        throw std::invalid_argument("model needs at least one mode");
    }
    if (alpha_.size() != lambda_.size()) {
        throw std::invalid_argument("alpha and lambda must have one entry per mode");
    }
    for (std::size_t n = 0; n < alpha_.size(); ++n) {
        if (!(alpha_[n] >= 0.0) || !std::isfinite(alpha_[n])) {
            throw std::invalid_argument("alpha_" + std::to_string(n) + " must be finite and >= 0");
        }
        if (!(lambda_[n] > 0.0) || !std::isfinite(lambda_[n])) {
            throw std::invalid_argument("lambda_" + std::to_string(n) + " must be finite and > 0");
        }
        if (basis_ == Basis::dirichlet_sine) {
            const double expected = heat_alpha(n);
            if (std::abs(alpha_[n] - expected) > 1e-12 * expected) {
                throw std::invalid_argument("dirichlet-sine basis requires alpha_n = (n pi)^2");
            }
        }
    }
}

SpectralModel SpectralModel::heat(std::size_t n_modes, double lambda) {
    return heat(n_modes, std::vector<double>(n_modes, lambda));
}

SpectralModel SpectralModel::heat(std::size_t n_modes, std::vector<double> lambda) {
    std::vector<double> alpha(n_modes);
    for (std::size_t n = 0; n < n_modes; ++n) alpha[n] = heat_alpha(n);
    return SpectralModel(std::move(alpha), std::move(lambda), Basis::dirichlet_sine);
}

double SpectralModel::max_lambda() const noexcept {
    return *std::max_element(lambda_.begin(), lambda_.end());
}

bool SpectralModel::has_invariant_measure() const noexcept {
    return std::all_of(alpha_.begin(), alpha_.end(), [](double a) { return a > 0.0; });
}

double SpectralModel::invariant_trace() const {
    double trace = 0.0;
    for (std::size_t n = 0; n < n_modes(); ++n) trace += stationary_variance(*this, n);
    return trace;
}

double semigroup_factor(const SpectralModel& model, double t, std::size_t n) {
    check_mode(model, n);
    check_time(t, "t");
    return std::exp(-model.alpha(n) * t);
}

double covariance_qt(const SpectralModel& model, double t, std::size_t n) {
    check_mode(model, n);
    check_time(t, "t");
    return detail::ou_variance(model.alpha(n), model.lambda(n), t);
}

double stationary_variance(const SpectralModel& model, std::size_t n) {
    check_mode(model, n);
    if (!(model.alpha(n) > 0.0)) {
        throw std::domain_error("no invariant measure for this mode (alpha = 0)");
    }
    return model.lambda(n) / (2.0 * model.alpha(n));
}

double contraction_vt(const SpectralModel& model, double t, double T, std::size_t n) {
    check_mode(model, n);
    check_interval(t, T);
    if (t == T) return 1.0;
    const double a = model.alpha(n);
    const double ratio = detail::variance_ratio(a, t, T);
    return std::exp(-a * (T - t)) * std::sqrt(ratio);
}

double bridge_gain(const SpectralModel& model, double t, double T, std::size_t n) {
    check_mode(model, n);
    check_interval(t, T);
    if (t == T) return 1.0;
    const double a = model.alpha(n);
    return std::exp(-a * (T - t)) * detail::variance_ratio(a, t, T);
}

double bridge_variance(const SpectralModel& model, double t, double T, std::size_t n) {
    check_mode(model, n);
    check_interval(t, T);
    if (t == 0.0 || t == T) return 0.0;
    const double a = model.alpha(n);
    const double l = model.lambda(n);
    // Q_t Q_{T-t} / Q_T, algebraically equal to Q_t (1 - V_t^2) by the
    // decomposition Q_T = Q_{T-t} + e^{-2 alpha (T-t)} Q_t.
    return detail::ou_variance(a, l, t) * detail::ou_variance(a, l, T - t) /
           detail::ou_variance(a, l, T);
}

double feedback_fs(const SpectralModel& model, double s, double T, std::size_t n) {
    check_mode(model, n);
    check_interval(s, T);
    if (s == T) {
        throw std::invalid_argument("F_s is singular at s = T");
    }
    const double a = model.alpha(n);
    const double l = model.lambda(n);
    const double tau = T - s;
    return std::sqrt(l) * std::exp(-a * tau) / std::sqrt(detail::ou_variance(a, l, tau));
}

BOperators b_operators(const SpectralModel& model, double s, double T, std::size_t n) {
    check_mode(model, n);
    check_interval(s, T);
    if (s == T) {
        throw std::invalid_argument("B1(s) is singular at s = T");
    }
    const double a = model.alpha(n);
    const double l = model.lambda(n);
    const double tau = T - s;
    const double q_tau = detail::ou_variance(a, l, tau);
    const double q_T = detail::ou_variance(a, l, T);
    const double decay_tau = std::exp(-a * tau);
    const double root_l = std::sqrt(l);
    return BOperators{
        .b1 = root_l * decay_tau * decay_tau / q_tau,
        .b2 = root_l * decay_tau * std::exp(-a * T) / q_T,
        .b3 = root_l * decay_tau / q_T,
    };
}

double stationary_contraction(const SpectralModel& model, double T, std::size_t n) {
    check_mode(model, n);
    check_time(T, "T");
    if (!(model.alpha(n) > 0.0)) {
        throw std::domain_error("no invariant measure for this mode (alpha = 0)");
    }
    return std::exp(-model.alpha(n) * T);
}

double stationary_contraction_norm(const SpectralModel& model, double T) {
    double norm = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        norm = std::max(norm, stationary_contraction(model, T, n));
    }
    return norm;
}

double regularity_ct(const SpectralModel& model, double T, std::size_t n) {
    check_mode(model, n);
    if (!(T > 0.0)) throw std::invalid_argument("C(T) needs T > 0");
    const double a = model.alpha(n);
    if (!(a > 0.0)) {
        throw std::domain_error("no invariant measure for this mode (alpha = 0)");
    }
    const double s2 = std::exp(-2.0 * a * T);
    const double one_minus_s2 = -std::expm1(-2.0 * a * T);
    return s2 / (one_minus_s2 * stationary_variance(model, n));
}

double b3_operator_norm(const SpectralModel& model, double s, double T) {
    check_interval(s, T);
    double norm = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double a = model.alpha(n);
        const double l = model.lambda(n);
        norm = std::max(norm, std::sqrt(l) * std::exp(-a * (T - s)) /
                                  detail::ou_variance(a, l, T));
    }
    return norm;
}

ModeVector b2_isometry_integral(const SpectralModel& model, double T, const ModeVector& x) {
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    if (static_cast<std::size_t>(x.size()) != model.n_modes()) {
        throw std::invalid_argument("x has the wrong number of modes");
    }
    using boost::math::quadrature::gauss_kronrod;
    ModeVector result(x.size());
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double a = model.alpha(n);
        const double l = model.lambda(n);
        const double q_T = detail::ou_variance(a, l, T);
        const double coeff = std::sqrt(l) * std::exp(-a * T) / q_T * x[n];
        auto integrand = [&](double s) {
            const double v = coeff * std::exp(-a * (T - s));
            return v * v;
        };
        result[n] = gauss_kronrod<double, 31>::integrate(integrand, 0.0, T, 15, 1e-13);
    }
    return result;
}

double b3_norm_integral(const SpectralModel& model, double T, const ModeVector& y,
                        double epsilon) {
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    if (!(epsilon >= 0.0) || epsilon >= T) {
        throw std::invalid_argument("cutoff epsilon must lie in [0, T)");
    }
    if (static_cast<std::size_t>(y.size()) != model.n_modes()) {
        throw std::invalid_argument("y has the wrong number of modes");
    }
    std::vector<double> scale(model.n_modes());
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double a = model.alpha(n);
        const double l = model.lambda(n);
        scale[n] = std::sqrt(l) / detail::ou_variance(a, l, T) * y[n];
    }
    // Integrate in tau = T - s.
    auto integrand = [&](double tau) {
        double sq = 0.0;
        for (std::size_t n = 0; n < model.n_modes(); ++n) {
            const double v = scale[n] * std::exp(-model.alpha(n) * tau);
            sq += v * v;
        }
        return std::sqrt(sq);
    };
    using boost::math::quadrature::gauss;
    double total = 0.0;
    double lo = epsilon;
    if (lo == 0.0) {
        const double first = std::ldexp(T, -60);
        total += gauss<double, 20>::integrate(integrand, 0.0, first);
        lo = first;
    }
    while (lo < T) {
        const double hi = std::min(2.0 * lo, T);
        total += gauss<double, 20>::integrate(integrand, lo, hi);
        lo = hi;
    }
    return total;
}

std::vector<double> interior_grid(std::size_t count) {
    std::vector<double> points(count);
    for (std::size_t j = 0; j < count; ++j) {
        points[j] = static_cast<double>(j + 1) / static_cast<double>(count + 1);
    }
    return points;
}

SineTransform make_sine_transform(const SpectralModel& model, std::span<const double> points) {
    require_sine_basis(model);
    const auto n_points = static_cast<Eigen::Index>(points.size());
    const auto n_modes = static_cast<Eigen::Index>(model.n_modes());
    if (n_points == 0) throw std::invalid_argument("empty physical grid");
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (!(points[j] > 0.0 && points[j] < 1.0)) {
            throw std::invalid_argument("physical grid points must lie in (0, 1)");
        }
        if (j > 0 && !(points[j] > points[j - 1])) {
            throw std::invalid_argument("physical grid must be strictly increasing");
        }
    }
    SineTransform out{Eigen::MatrixXd(n_points, n_modes), Eigen::MatrixXd(n_modes, n_points)};
    for (Eigen::Index j = 0; j < n_points; ++j) {
        const double left = j == 0 ? 0.0 : points[j - 1];
        const double right = j + 1 == n_points ? 1.0 : points[j + 1];
        const double weight = 0.5 * (right - left);
        for (Eigen::Index n = 0; n < n_modes; ++n) {
            const double e =
                std::numbers::sqrt2 * std::sin(static_cast<double>(n + 1) * std::numbers::pi * points[j]);
            out.synthesis(j, n) = e;
            out.analysis(n, j) = weight * e;
        }
    }
    return out;
}

Eigen::VectorXd synthesize(const SpectralModel& model, const ModeVector& coeffs,
                           std::span<const double> points) {
    if (static_cast<std::size_t>(coeffs.size()) != model.n_modes()) {
        throw std::invalid_argument("coefficient vector has the wrong number of modes");
    }
    return make_sine_transform(model, points).synthesis * coeffs;
}

ModeVector analyze(const SpectralModel& model, const Eigen::VectorXd& values,
                   std::span<const double> points) {
    if (static_cast<std::size_t>(values.size()) != points.size()) {
        throw std::invalid_argument("values and grid points differ in length");
    }
    return make_sine_transform(model, points).analysis * values;
}

}  // namespace oubridge
