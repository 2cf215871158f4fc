#include "oubridge/density_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "numerics.hpp"
#include "oubridge/errors.hpp"
#include "oubridge/gaussian_laws.hpp"
#include "oubridge/parallel.hpp"
#include "oubridge/statistics.hpp"

namespace oubridge {

namespace {

std::span<const double> as_span(const ModeVector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_modes(const SpectralModel& model, const ModeVector& v, const char* name) {
    if (static_cast<std::size_t>(v.size()) != model.n_modes()) {
        throw std::invalid_argument(std::string(name) + " has the wrong number of modes");
    }
}

// Outer Monte Carlo draws use their own sub-streams so that they never share
// random numbers with the bridge paths.
constexpr std::uint64_t kOuterX = 0x6f75746572785f31ull;
constexpr std::uint64_t kOuterY = 0x6f75746572795f32ull;
constexpr std::uint64_t kInner = 0x696e6e65725f3033ull;

}  // namespace

TimeGrid density_grid(double T, const DensityOptions& options) {
    return TimeGrid::refined(T, options.dt_max, options.refinement, options.epsilon);
}

GirsanovKernel::GirsanovKernel(const SpectralModel& model, const Nonlinearity& nonlinearity,
                               const TimeGrid& grid, BridgeSdeOptions options)
    : model_(&model),
      nonlinearity_(&nonlinearity),
      integrator_(model, grid, options),
      n_modes_(model.n_modes()) {
    if (nonlinearity.n_modes() != n_modes_) {
        throw std::invalid_argument("nonlinearity and model differ in mode count");
    }
    const double T = grid.horizon();
    const std::size_t steps = grid.steps();
    dt_.resize(steps);
    b1_.resize(steps * n_modes_);
    b2_.resize(steps * n_modes_);
    b3_.resize(steps * n_modes_);
    semigroup_.resize(steps * n_modes_);
    gain_.resize(steps * n_modes_);
    w_coeff_.resize(steps * n_modes_);
    horizon_decay_.resize(n_modes_);
    for (std::size_t n = 0; n < n_modes_; ++n) horizon_decay_[n] = semigroup_factor(model, T, n);
    for (std::size_t k = 0; k < steps; ++k) {
        const double s = grid.node(k);
        dt_[k] = grid.step(k);
        for (std::size_t n = 0; n < n_modes_; ++n) {
            const std::size_t c = k * n_modes_ + n;
            const BOperators b = b_operators(model, s, T, n);
            b1_[c] = b.b1;
            b2_[c] = b.b2;
            b3_[c] = b.b3;
            semigroup_[c] = semigroup_factor(model, s, n);
            gain_[c] = bridge_gain(model, s, T, n);
            w_coeff_[c] = integrator_.feedback_rate(k, n) / std::sqrt(model.lambda(n));
        }
    }
}

GirsanovKernel::Workspace GirsanovKernel::make_workspace() const {
    Workspace ws;
    ws.states.resize(integrator_.state_grid().size() * n_modes_);
    ws.zeta.resize(integrator_.steps() * n_modes_);
    ws.g.resize(n_modes_);
    return ws;
}

double GirsanovKernel::exponent(std::span<const double> states, std::span<const double> zeta,
                                std::span<const double> x, std::span<const double> y,
                                GirsanovRoute route, Workspace& ws) const {
    const std::size_t steps = integrator_.steps();
    if (states.size() != integrator_.state_grid().size() * n_modes_ ||
        zeta.size() != steps * n_modes_) {
        throw std::invalid_argument("bridge path does not match the weight grid");
    }
    if (nonlinearity_->is_zero()) return 0.0;
    ws.g.resize(n_modes_);
    double stochastic = 0.0;
    double quadratic = 0.0;
    double drift = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double* z = states.data() + k * n_modes_;
        const double* dz = zeta.data() + k * n_modes_;
        nonlinearity_->evaluate({z, n_modes_}, ws.g, ws.nonlinear);
        const double dt = dt_[k];
        for (std::size_t n = 0; n < n_modes_; ++n) {
            const std::size_t c = k * n_modes_ + n;
            const double g = ws.g[n];
            quadratic += g * g * dt;
            if (route == GirsanovRoute::bridge_noise) {
                const double mean =
                    semigroup_[c] * x[n] + gain_[c] * (y[n] - horizon_decay_[n] * x[n]);
                const double centered = z[n] - mean;
                stochastic += g * dz[n];
                drift += g * (b1_[c] * centered + b2_[c] * x[n] - b3_[c] * y[n]) * dt;
            } else {
                const double dw =
                    dz[n] + w_coeff_[c] * (y[n] - integrator_.endpoint_decay(k, n) * z[n]) * dt;
                stochastic += g * dw;
            }
        }
    }
    return stochastic - 0.5 * quadratic - drift;
}

double GirsanovKernel::sample(std::span<const double> x, std::span<const double> y,
                              const NormalStream& stream, GirsanovRoute route,
                              Workspace& ws) const {
    integrator_.integrate(x, y, stream, ws.states, ws.zeta);
    return exponent(ws.states, ws.zeta, x, y, route, ws);
}

double girsanov_exponent(const SpectralModel& model, const Nonlinearity& nonlinearity,
                         const PathEnsemble& bridge, std::size_t p, const ModeVector& x,
                         const ModeVector& y, GirsanovRoute route) {
    check_modes(model, x, "x");
    check_modes(model, y, "y");
    if (bridge.kind() != PathKind::bridge_sde || !bridge.has_noise()) {
        throw std::invalid_argument("Girsanov exponent needs bridge SDE paths with stored increments");
    }
    const auto nodes = bridge.grid().nodes();
    if (nodes.size() != bridge.noise_steps() + 2) {
        throw std::invalid_argument("bridge path grid does not match its stored increments");
    }
    const TimeGrid sde_grid = TimeGrid::from_nodes(
        bridge.grid().horizon(), std::vector<double>(nodes.begin(), nodes.end() - 1));
    const GirsanovKernel kernel(model, nonlinearity, sde_grid);
    auto ws = kernel.make_workspace();
    return kernel.exponent(bridge.path_states(p), bridge.path_noise(p), as_span(x), as_span(y),
                           route, ws);
}

DensityEngine::DensityEngine(const SpectralModel& model, const Nonlinearity& nonlinearity,
                             double T, DensityOptions options)
    : model_(&model),
      nonlinearity_(&nonlinearity),
      horizon_(T),
      options_(options),
      grid_(density_grid(T, options)),
      kernel_(model, nonlinearity, grid_, options.sde) {}

std::vector<double> DensityEngine::log_weights(const ModeVector& x, const ModeVector& y,
                                               std::size_t n_paths, const RngStream& rng) const {
    check_modes(*model_, x, "x");
    check_modes(*model_, y, "y");
    std::vector<double> out(n_paths, 0.0);
    if (nonlinearity_->is_zero()) return out;
    parallel_for(n_paths, options_.threads, [&](std::size_t begin, std::size_t end) {
        auto ws = kernel_.make_workspace();
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = kernel_.sample(as_span(x), as_span(y), rng.path(i), options_.route, ws);
        }
    });
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (!std::isfinite(out[i])) {
            throw NumericalError("non-finite Girsanov exponent on bridge path " + std::to_string(i));
        }
    }
    return out;
}

DensityEstimate DensityEngine::from_log_weights(std::span<const double> log_weights,
                                                double q) const {
    DensityEstimate est;
    est.n_samples = log_weights.size();
    std::vector<double> scaled(log_weights.begin(), log_weights.end());
    for (double& w : scaled) w *= q;
    const ExpMeanSummary s = exp_mean(scaled);
    est.value = s.value;
    est.std_error = s.std_error;
    est.diagnostics.min_log_weight = s.min_log_weight;
    est.diagnostics.max_log_weight = s.max_log_weight;
    est.diagnostics.effective_sample_size = s.effective_sample_size;
    if (s.effective_sample_size < options_.min_effective_sample_size) {
        std::ostringstream msg;
        msg << "effective sample size " << s.effective_sample_size << " below "
            << options_.min_effective_sample_size;
        est.diagnostics.warnings.push_back(msg.str());
    }
    return est;
}

namespace {

DensityEstimate exact_one(std::size_t n_paths) {
    DensityEstimate est;
    est.value = 1.0;
    est.std_error = 0.0;
    est.n_samples = n_paths;
    est.diagnostics.effective_sample_size = static_cast<double>(n_paths);
    return est;
}

}  // namespace

DensityEstimate DensityEngine::h(const ModeVector& x, const ModeVector& y, std::size_t n_paths,
                                 const RngStream& rng) const {
    return hq(x, y, 1.0, n_paths, rng);
}

DensityEstimate DensityEngine::hq(const ModeVector& x, const ModeVector& y, double q,
                                  std::size_t n_paths, const RngStream& rng) const {
    if (n_paths < 2) throw ConfigError("at least 2 bridge paths are required");
    if (!(q >= 0.0)) throw std::invalid_argument("q must be nonnegative");
    check_modes(*model_, x, "x");
    check_modes(*model_, y, "y");
    if (nonlinearity_->is_zero() || q == 0.0) return exact_one(n_paths);
    const auto lw = log_weights(x, y, n_paths, rng);
    DensityEstimate est = from_log_weights(lw, q);
    const auto flagged = kernel_.integrator().ill_conditioned_modes(as_span(y));
    if (!flagged.empty()) {
        est.diagnostics.warnings.push_back("endpoint ill-conditioned in " +
                                           std::to_string(flagged.size()) + " mode(s)");
    }
    return est;
}

DensityEstimate DensityEngine::density(const ModeVector& x, const ModeVector& y,
                                       std::size_t n_paths, const RngStream& rng) const {
    DensityEstimate est = h(x, y, n_paths, rng);
    const double gk = g_factor(*model_, horizon_, x, y) * k_factor(*model_, horizon_, y);
    est.value *= gk;
    est.std_error *= gk;
    return est;
}

namespace {

struct Cell {
    double value = 0.0;
    double min_log_weight = 0.0;
    double max_log_weight = 0.0;
    double ess = 0.0;
};

}  // namespace

DensityEstimate DensityEngine::normalization(const ModeVector& x, std::size_t n_y,
                                             std::size_t n_paths, const RngStream& rng) const {
    if (n_y < 2) throw ConfigError("at least 2 endpoint draws are required");
    check_modes(*model_, x, "x");
    const RngStream y_rng = rng.split(kOuterY);
    std::vector<Cell> cells(n_y);
    DensityEngine serial = *this;
    serial.options_.threads = 1;
    parallel_for(n_y, options_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const ModeVector y = sample_invariant(*model_, y_rng, j);
            const DensityEstimate d = serial.density(x, y, n_paths, rng.split(kInner + j));
            cells[j] = {d.value, d.diagnostics.min_log_weight, d.diagnostics.max_log_weight,
                        d.diagnostics.effective_sample_size};
        }
    });
    MomentAccumulator acc;
    DensityEstimate est;
    est.diagnostics.min_log_weight = cells.front().min_log_weight;
    est.diagnostics.max_log_weight = cells.front().max_log_weight;
    double ess = 0.0;
    for (const Cell& c : cells) {
        acc.add(c.value);
        est.diagnostics.min_log_weight = std::min(est.diagnostics.min_log_weight, c.min_log_weight);
        est.diagnostics.max_log_weight = std::max(est.diagnostics.max_log_weight, c.max_log_weight);
        ess += c.ess;
    }
    est.value = acc.mean();
    est.std_error = acc.mean_std_error();
    est.n_samples = n_y * n_paths;
    est.diagnostics.effective_sample_size = ess;
    return est;
}

DensityEstimate DensityEngine::pq_norm(double p, double q, std::size_t n_x, std::size_t n_y,
                                       std::size_t n_paths, const RngStream& rng) const {
    if (!(p > 1.0) || !(q > 1.0)) throw ConfigError("pq-norm needs p > 1 and q > 1");
    if (n_x < 8 || n_y < 8) {
        throw ConfigError("pq-norm sample budget too small: n_x and n_y must be at least 8");
    }
    if (!nonlinearity_->is_zero() && n_paths < 2) {
        throw ConfigError("at least 2 bridge paths are required");
    }
    const double p_conj = p / (p - 1.0);
    const RngStream x_rng = rng.split(kOuterX);
    const RngStream y_rng = rng.split(kOuterY);
    DensityEngine serial = *this;
    serial.options_.threads = 1;
    std::vector<double> outer(n_x);
    std::vector<Cell> extremes(n_x);
    parallel_for(n_x, options_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const ModeVector x = sample_invariant(*model_, x_rng, i);
            double inner = 0.0;
            Cell cell;
            cell.min_log_weight = std::numeric_limits<double>::infinity();
            cell.max_log_weight = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n_y; ++j) {
                const std::uint64_t index = i * n_y + j;
                const ModeVector y = sample_invariant(*model_, y_rng, index);
                const DensityEstimate d =
                    serial.density(x, y, std::max<std::size_t>(n_paths, 2), rng.split(kInner + index));
                inner += std::pow(d.value, p_conj);
                cell.min_log_weight = std::min(cell.min_log_weight, d.diagnostics.min_log_weight);
                cell.max_log_weight = std::max(cell.max_log_weight, d.diagnostics.max_log_weight);
                cell.ess += d.diagnostics.effective_sample_size;
            }
            inner /= static_cast<double>(n_y);
            outer[i] = std::pow(inner, q / p_conj);
            extremes[i] = cell;
        }
    });
    MomentAccumulator acc;
    DensityEstimate est;
    est.diagnostics.min_log_weight = extremes.front().min_log_weight;
    est.diagnostics.max_log_weight = extremes.front().max_log_weight;
    for (std::size_t i = 0; i < n_x; ++i) {
        acc.add(outer[i]);
        est.diagnostics.min_log_weight = std::min(est.diagnostics.min_log_weight, extremes[i].min_log_weight);
        est.diagnostics.max_log_weight = std::max(est.diagnostics.max_log_weight, extremes[i].max_log_weight);
        est.diagnostics.effective_sample_size += extremes[i].ess;
    }
    const double mean = acc.mean();
    est.value = std::pow(mean, 1.0 / q);
    // Delta method for M^{1/q}.
    est.std_error = est.value / (q * mean) * acc.mean_std_error();
    est.n_samples = n_x * n_y * (nonlinearity_->is_zero() ? 1 : n_paths);

    const double contraction = stationary_contraction_norm(*model_, horizon_);
    const double q_max = 1.0 + (p - 1.0) / (contraction * contraction);
    if (!(q < q_max)) {
        std::ostringstream msg;
        msg << "q = " << q << " is outside the admissible range q < " << q_max
            << "; the norm need not be finite";
        est.diagnostics.warnings.push_back(msg.str());
    }
    if (!nonlinearity_->is_zero() || p_conj != 1.0 || q != p_conj) {
        est.diagnostics.warnings.push_back(
            "bias: nonlinear powers of inner Monte Carlo averages are biased at finite n_y and "
            "n_paths; the standard error covers sampling noise only");
    }
    return est;
}

DensityEstimate estimate_h(const SpectralModel& model, const Nonlinearity& nonlinearity,
                           const ModeVector& x, const ModeVector& y, double T, std::size_t n_paths,
                           const RngStream& rng, const DensityOptions& options) {
    if (nonlinearity.is_zero()) {
        if (n_paths < 2) throw ConfigError("at least 2 bridge paths are required");
        return exact_one(n_paths);
    }
    return DensityEngine(model, nonlinearity, T, options).h(x, y, n_paths, rng);
}

DensityEstimate estimate_hq(const SpectralModel& model, const Nonlinearity& nonlinearity,
                            const ModeVector& x, const ModeVector& y, double T, double q,
                            std::size_t n_paths, const RngStream& rng,
                            const DensityOptions& options) {
    return DensityEngine(model, nonlinearity, T, options).hq(x, y, q, n_paths, rng);
}

DensityEstimate estimate_density(const SpectralModel& model, const Nonlinearity& nonlinearity,
                                 const ModeVector& x, const ModeVector& y, double T,
                                 std::size_t n_paths, const RngStream& rng,
                                 const DensityOptions& options) {
    return DensityEngine(model, nonlinearity, T, options).density(x, y, n_paths, rng);
}

DensityEstimate estimate_pq_norm(const SpectralModel& model, const Nonlinearity& nonlinearity,
                                 double T, double p, double q, std::size_t n_x, std::size_t n_y,
                                 std::size_t n_paths, const RngStream& rng,
                                 const DensityOptions& options) {
    return DensityEngine(model, nonlinearity, T, options).pq_norm(p, q, n_x, n_y, n_paths, rng);
}

}  // namespace oubridge
