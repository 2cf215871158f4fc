#include "oubridge/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oubridge/density_engine.hpp"
#include "oubridge/gaussian_laws.hpp"
#include "oubridge/path_sampler.hpp"

namespace oubridge {

namespace {

std::string format(double value) {
    std::ostringstream out;
    out.precision(3);
    out << std::scientific << value;
    return out.str();
}

double relative(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

CheckResult covariance_split(const SpectralModel& model, double T) {
    double worst = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        for (int i = 0; i <= 20; ++i) {
            const double t = T * i / 20.0;
            const double whole = covariance_qt(model, T, n);
            const double split = covariance_qt(model, t, n) +
                                 std::exp(-2.0 * model.alpha(n) * t) * covariance_qt(model, T - t, n);
            worst = std::max(worst, relative(whole, split));
        }
    }
    return {"Q_T = Q_t + S_t^2 Q_{T-t}", worst <= 1e-12, "max rel err " + format(worst)};
}

CheckResult bridge_variance_factorization(const SpectralModel& model, double T) {
    double worst = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        for (int i = 0; i <= 20; ++i) {
            const double t = T * i / 20.0;
            const double v = contraction_vt(model, t, T, n);
            const double direct = bridge_variance(model, t, T, n);
            const double factored = covariance_qt(model, t, n) * (1.0 - v * v);
            worst = std::max(worst, std::abs(direct - factored) /
                                        std::max(covariance_qt(model, T, n), 1e-300));
        }
    }
    return {"bridge variance = Q_t (1 - V_t^2)", worst <= 1e-12, "max err / Q_T " + format(worst)};
}

CheckResult contraction_bounds(const SpectralModel& model, double T) {
    bool ok = true;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        double previous = 0.0;
        for (int i = 1; i < 1000; ++i) {
            const double v = contraction_vt(model, T * i / 1000.0, T, n);
            ok = ok && v > 0.0 && v < 1.0 && v >= previous;
            previous = v;
        }
        ok = ok && contraction_vt(model, T, T, n) == 1.0;
    }
    return {"0 < V_t < 1, increasing to V_T = 1", ok, ""};
}

CheckResult feedback_monotone(const SpectralModel& model, double T) {
    bool ok = true;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        double previous = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 1000; ++i) {
            const double tau = T * i / 1000.0;
            const double f = feedback_fs(model, T - tau, T, n);
            ok = ok && f <= previous;
            previous = f;
        }
    }
    return {"|Q_t^{-1/2} S_t Q^{1/2}| nonincreasing", ok, ""};
}

CheckResult isometry(const SpectralModel& model, double T, const ModeVector& x) {
    const ModeVector quad = b2_isometry_integral(model, T, x);
    double worst = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double s = semigroup_factor(model, T, n) * x[static_cast<Eigen::Index>(n)];
        const double exact = s * s / covariance_qt(model, T, n);
        worst = std::max(worst, std::abs(quad[static_cast<Eigen::Index>(n)] - exact) / std::max(exact, 1e-300));
        if (exact == 0.0) worst = std::max(worst, std::abs(quad[static_cast<Eigen::Index>(n)]));
    }
    return {"int |B2(s) x|^2 ds = |Q_T^{-1/2} S_T x|^2", worst <= 1e-6, "max rel err " + format(worst)};
}

CheckResult b_ratio(const SpectralModel& model, double T) {
    double worst = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        for (int i = 0; i < 20; ++i) {
            const BOperators b = b_operators(model, T * i / 20.0, T, n);
            worst = std::max(worst, relative(b.b2 / b.b3, semigroup_factor(model, T, n)));
        }
    }
    return {"B2 / B3 = S_T", worst <= 1e-13, "max rel err " + format(worst)};
}

CheckResult k_two_ways(const SpectralModel& model, double T, const ModeVector& y) {
    if (!model.has_invariant_measure()) return {"k via C(T) = Gaussian ratio", true, "skipped: no invariant measure"};
    // log N(0, Q_T)(y) - log N(0, Q_inf)(y)
    double direct = 0.0;
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        const double yn = y[static_cast<Eigen::Index>(n)];
        const double qt = covariance_qt(model, T, n);
        const double qi = stationary_variance(model, n);
        direct += -0.5 * std::log(qt / qi) - 0.5 * yn * yn / qt + 0.5 * yn * yn / qi;
    }
    const double err = std::abs(log_k_factor(model, T, y) - direct);
    return {"k via C(T) = Gaussian ratio", err <= 1e-10, "abs log err " + format(err)};
}

CheckResult b3_cauchy(const SpectralModel& model, double T) {
    ModeVector y(static_cast<Eigen::Index>(model.n_modes()));
    for (Eigen::Index n = 0; n < y.size(); ++n) y[n] = 1.0 / static_cast<double>((n + 1) * (n + 1));
    double eps = 1e-4;
    double previous = b3_norm_integral(model, T, y, eps);
    double last_gap = 0.0;
    for (int i = 0; i < 12; ++i) {
        eps *= 0.5;
        const double next = b3_norm_integral(model, T, y, eps);
        last_gap = std::abs(next - previous);
        previous = next;
    }
    return {"int |B3(s) y| ds Cauchy in epsilon (y_n = n^-2)", last_gap < 1e-4,
            "last halving changed it by " + format(last_gap)};
}

CheckResult linear_exactness(const ExperimentConfig& cfg) {
    if (!cfg.model.has_invariant_measure()) return {"G = 0: h = 1, d = g k", true, "skipped: no invariant measure"};
    const Nonlinearity zero(NonlinearityConfig{}, cfg.model);
    const RngStream rng(cfg.seed);
    const DensityEstimate h = estimate_h(cfg.model, zero, cfg.x, cfg.y, cfg.horizon, 16, rng, cfg.density);
    const DensityEstimate d =
        estimate_density(cfg.model, zero, cfg.x, cfg.y, cfg.horizon, 16, rng, cfg.density);
    const double gk = g_factor(cfg.model, cfg.horizon, cfg.x, cfg.y) * k_factor(cfg.model, cfg.horizon, cfg.y);
    const double err = relative(d.value, gk);
    return {"G = 0: h = 1, d = g k", h.value == 1.0 && h.std_error == 0.0 && err <= 1e-12,
            "h = " + format(h.value) + ", rel err d " + format(err)};
}

CheckResult exact_bridge_moments(const ExperimentConfig& cfg) {
    const std::size_t n_paths = std::min<std::size_t>(cfg.n_paths, 20000);
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, 10);
    const PathEnsemble bridge = sample_bridge_exact(cfg.model, cfg.x, cfg.y, grid, RngStream(cfg.seed),
                                                    {0, n_paths}, cfg.threads);
    const EnsembleSummary s = summarize(bridge);
    double worst = 0.0;
    bool pinned = true;
    for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
        const GaussianMarginal law = bridge_marginal(cfg.model, cfg.x, cfg.y, grid.node(k), cfg.horizon);
        for (std::size_t n = 0; n < cfg.model.n_modes(); ++n) {
            const std::size_t c = k * cfg.model.n_modes() + n;
            const auto i = static_cast<Eigen::Index>(n);
            worst = std::max(worst, std::abs(s.mean[c] - law.mean[i]) / s.mean_std_error[c]);
            worst = std::max(worst, std::abs(s.variance[c] - law.variance[i]) / s.variance_std_error[c]);
        }
    }
    for (std::size_t p = 0; p < bridge.n_paths(); ++p) {
        for (std::size_t n = 0; n < cfg.model.n_modes(); ++n) {
            pinned = pinned && bridge.state(p, grid.size() - 1, n) == cfg.y[static_cast<Eigen::Index>(n)];
        }
    }
    return {"exact bridge marginals within 4 sigma, pinned at y", pinned && worst <= 4.0,
            "max |z-score| " + format(worst) + " over " + std::to_string(n_paths) + " paths"};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const ExperimentConfig& cfg) {
    const SpectralModel& m = cfg.model;
    const double T = cfg.horizon;
    std::vector<CheckResult> out;
    out.push_back(covariance_split(m, T));
    out.push_back(bridge_variance_factorization(m, T));
    out.push_back(contraction_bounds(m, T));
    out.push_back(feedback_monotone(m, T));
    out.push_back(isometry(m, T, cfg.x));
    out.push_back(b_ratio(m, T));
    out.push_back(k_two_ways(m, T, cfg.y));
    out.push_back(b3_cauchy(m, T));
    out.push_back(linear_exactness(cfg));
    out.push_back(exact_bridge_moments(cfg));
    return out;
}

}  // namespace oubridge
