#include "oubridge/path_sampler.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "numerics.hpp"
#include "oubridge/errors.hpp"
#include "oubridge/parallel.hpp"

namespace oubridge {

namespace {

void check_modes(const SpectralModel& model, const ModeVector& v, const char* name) {
    if (static_cast<std::size_t>(v.size()) != model.n_modes()) {
        throw std::invalid_argument(std::string(name) + " has the wrong number of modes");
    }
}

std::span<const double> as_span(const ModeVector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

PathEnsemble sample_ou_path(const SpectralModel& model, const ModeVector& x, const TimeGrid& grid,
                            const RngStream& rng, PathRange range, unsigned threads) {
    check_modes(model, x, "x");
    const std::size_t modes = model.n_modes();
    const std::size_t steps = grid.steps();
    std::vector<double> decay(steps * modes), sd(steps * modes), sqrt_dt(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double dt = grid.step(k);
        sqrt_dt[k] = std::sqrt(dt);
        for (std::size_t n = 0; n < modes; ++n) {
            decay[k * modes + n] = std::exp(-model.alpha(n) * dt);
            sd[k * modes + n] = std::sqrt(detail::ou_variance(model.alpha(n), model.lambda(n), dt));
        }
    }
    PathEnsemble out(PathKind::ou, grid, modes, range, steps);
    parallel_for(range.count, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> xi(modes);
        for (std::size_t p = begin; p < end; ++p) {
            const NormalStream stream = rng.path(range.first + p);
            auto states = out.path_states(p);
            auto noise = out.path_noise(p);
            for (std::size_t n = 0; n < modes; ++n) states[n] = x[static_cast<Eigen::Index>(n)];
            for (std::size_t k = 0; k < steps; ++k) {
                stream.fill(k, xi);
                const double* z = states.data() + k * modes;
                double* z_next = states.data() + (k + 1) * modes;
                for (std::size_t n = 0; n < modes; ++n) {
                    const std::size_t c = k * modes + n;
                    z_next[n] = decay[c] * z[n] + sd[c] * xi[n];
                    noise[c] = sqrt_dt[k] * xi[n];
                }
            }
        }
    });
    return out;
}

ModeVector sample_invariant(const SpectralModel& model, const RngStream& rng, std::uint64_t draw) {
    if (!model.has_invariant_measure()) {
        throw std::domain_error("no invariant measure: some alpha_n = 0");
    }
    std::vector<double> xi(model.n_modes());
    rng.path(draw, StreamDomain::invariant).fill(0, xi);
    ModeVector out(static_cast<Eigen::Index>(model.n_modes()));
    for (std::size_t n = 0; n < model.n_modes(); ++n) {
        out[static_cast<Eigen::Index>(n)] = std::sqrt(stationary_variance(model, n)) * xi[n];
    }
    return out;
}

PathEnsemble sample_bridge_exact(const SpectralModel& model, const ModeVector& x,
                                 const ModeVector& y, const TimeGrid& grid, const RngStream& rng,
                                 PathRange range, unsigned threads) {
    check_modes(model, x, "x");
    check_modes(model, y, "y");
    if (grid.epsilon_cutoff() != 0.0) {
        throw std::invalid_argument("exact bridge sampling needs a grid ending at T");
    }
    const double T = grid.horizon();
    const std::size_t modes = model.n_modes();
    const std::size_t steps = grid.steps();
    // z' | z, y ~ N(decay z + gain (y - end z), var) with
    //   gain = Q_dt e^{-alpha (T - t')} / Q_{T - t},  end = e^{-alpha (T - t)},
    //   var  = Q_dt Q_{T - t'} / Q_{T - t}.
    std::vector<double> decay(steps * modes), gain(steps * modes), end_decay(steps * modes),
        sd(steps * modes);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = grid.node(k);
        const double t_next = grid.node(k + 1);
        const double dt = t_next - t;
        for (std::size_t n = 0; n < modes; ++n) {
            const double a = model.alpha(n);
            const double l = model.lambda(n);
            const double q_dt = detail::ou_variance(a, l, dt);
            const double q_rest = detail::ou_variance(a, l, T - t);
            const double q_rest_next = detail::ou_variance(a, l, T - t_next);
            const std::size_t c = k * modes + n;
            decay[c] = std::exp(-a * dt);
            gain[c] = q_dt * std::exp(-a * (T - t_next)) / q_rest;
            end_decay[c] = std::exp(-a * (T - t));
            sd[c] = std::sqrt(q_dt * q_rest_next / q_rest);
        }
    }
    PathEnsemble out(PathKind::bridge_exact, grid, modes, range, 0);
    out.enable_targets();
    parallel_for(range.count, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> xi(modes);
        for (std::size_t p = begin; p < end; ++p) {
            const NormalStream stream = rng.path(range.first + p);
            auto states = out.path_states(p);
            auto target = out.target(p);
            for (std::size_t n = 0; n < modes; ++n) {
                states[n] = x[static_cast<Eigen::Index>(n)];
                target[n] = y[static_cast<Eigen::Index>(n)];
            }
            for (std::size_t k = 0; k + 1 < steps; ++k) {
                stream.fill(k, xi);
                const double* z = states.data() + k * modes;
                double* z_next = states.data() + (k + 1) * modes;
                for (std::size_t n = 0; n < modes; ++n) {
                    const std::size_t c = k * modes + n;
                    z_next[n] = decay[c] * z[n] + gain[c] * (target[n] - end_decay[c] * z[n]) +
                                sd[c] * xi[n];
                }
            }
            double* last = states.data() + steps * modes;
            for (std::size_t n = 0; n < modes; ++n) last[n] = target[n];
        }
    });
    return out;
}

BridgeSdeIntegrator::BridgeSdeIntegrator(const SpectralModel& model, const TimeGrid& grid,
                                         BridgeSdeOptions options)
    : model_(&model),
      grid_(grid),
      state_grid_(grid.closed()),
      options_(options),
      n_modes_(model.n_modes()) {
    if (!(grid.epsilon_cutoff() > 0.0)) {
        throw std::invalid_argument(
            "bridge SDE integration needs a positive cutoff: the grid must end before T");
    }
    const double T = grid.horizon();
    const std::size_t steps = grid.steps();
    step_decay_.resize(steps * n_modes_);
    noise_sd_.resize(steps * n_modes_);
    rate_.resize(steps * n_modes_);
    end_decay_.resize(steps * n_modes_);
    sqrt_dt_.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double s = grid.node(k);
        const double dt = grid.step(k);
        const double tau = T - s;
        sqrt_dt_[k] = std::sqrt(dt);
        for (std::size_t n = 0; n < n_modes_; ++n) {
            const double a = model.alpha(n);
            const double l = model.lambda(n);
            const std::size_t c = k * n_modes_ + n;
            step_decay_[c] = std::exp(-a * dt);
            noise_sd_[c] = std::sqrt(detail::ou_variance(a, l, dt));
            end_decay_[c] = std::exp(-a * tau);
            rate_[c] = l * end_decay_[c] / detail::ou_variance(a, l, tau);
            const double contraction = rate_[c] * end_decay_[c] * dt;
            if (contraction > options_.max_feedback_step) {
                std::ostringstream msg;
                msg << "bridge SDE step " << k << " (s = " << s << ", dt = " << dt
                    << ") is too coarse near T: feedback * dt = " << contraction << " for mode "
                    << n << " exceeds " << options_.max_feedback_step;
                throw NumericalError(msg.str());
            }
        }
    }
}

void BridgeSdeIntegrator::integrate(std::span<const double> x, std::span<const double> y,
                                    const NormalStream& stream, std::span<double> states,
                                    std::span<double> zeta) const {
    const std::size_t steps = grid_.steps();
    std::copy(x.begin(), x.end(), states.begin());
    double xi_buffer[64];
    std::vector<double> xi_heap;
    std::span<double> xi;
    if (n_modes_ <= 64) {
        xi = std::span<double>(xi_buffer, n_modes_);
    } else {
        xi_heap.resize(n_modes_);
        xi = xi_heap;
    }
    for (std::size_t k = 0; k < steps; ++k) {
        stream.fill(k, xi);
        const double dt = grid_.step(k);
        const double* z = states.data() + k * n_modes_;
        double* z_next = states.data() + (k + 1) * n_modes_;
        double* dzeta = zeta.data() + k * n_modes_;
        const std::size_t base = k * n_modes_;
        for (std::size_t n = 0; n < n_modes_; ++n) {
            const std::size_t c = base + n;
            const double drift = rate_[c] * (y[n] - end_decay_[c] * z[n]) * dt;
            z_next[n] = step_decay_[c] * (z[n] + drift) + noise_sd_[c] * xi[n];
            dzeta[n] = sqrt_dt_[k] * xi[n];
        }
    }
    std::copy(y.begin(), y.end(), states.begin() + (steps + 1) * n_modes_);
}

std::vector<std::size_t> BridgeSdeIntegrator::ill_conditioned_modes(std::span<const double> y) const {
    std::vector<std::size_t> flagged;
    const double T = grid_.horizon();
    for (std::size_t n = 0; n < n_modes_; ++n) {
        const double log_size = model_->alpha(n) * T + std::log(std::abs(y[n]));
        if (y[n] != 0.0 && log_size > std::log(options_.conditioning_threshold)) {
            flagged.push_back(n);
        }
    }
    return flagged;
}

namespace {

void record_conditioning(PathEnsemble& out, const BridgeSdeIntegrator& integrator,
                         std::span<const double> y) {
    const auto flagged = integrator.ill_conditioned_modes(y);
    if (flagged.empty()) return;
    std::ostringstream msg;
    msg << "endpoint ill-conditioned in modes";
    for (std::size_t n : flagged) msg << ' ' << n;
    out.warnings().push_back(msg.str());
}

}  // namespace

PathEnsemble integrate_bridge_sde(const SpectralModel& model, const ModeVector& x,
                                  const ModeVector& y, const TimeGrid& grid, const RngStream& rng,
                                  PathRange range, unsigned threads, BridgeSdeOptions options) {
    check_modes(model, x, "x");
    check_modes(model, y, "y");
    const BridgeSdeIntegrator integrator(model, grid, options);
    PathEnsemble out(PathKind::bridge_sde, integrator.state_grid(), model.n_modes(), range,
                     integrator.steps());
    out.enable_targets();
    record_conditioning(out, integrator, as_span(y));
    parallel_for(range.count, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            auto target = out.target(p);
            std::copy(y.data(), y.data() + y.size(), target.begin());
            integrator.integrate(as_span(x), target, rng.path(range.first + p), out.path_states(p),
                                 out.path_noise(p));
        }
    });
    return out;
}

PathEnsemble integrate_bridge_sde_random_endpoint(const SpectralModel& model, const ModeVector& x,
                                                  const TimeGrid& grid, const RngStream& rng,
                                                  PathRange range, unsigned threads,
                                                  BridgeSdeOptions options) {
    check_modes(model, x, "x");
    const BridgeSdeIntegrator integrator(model, grid, options);
    const double T = grid.horizon();
    const std::size_t modes = model.n_modes();
    PathEnsemble out(PathKind::bridge_sde, integrator.state_grid(), modes, range,
                     integrator.steps());
    out.enable_targets();
    parallel_for(range.count, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> xi(modes);
        for (std::size_t p = begin; p < end; ++p) {
            rng.path(range.first + p, StreamDomain::endpoint).fill(0, xi);
            auto target = out.target(p);
            for (std::size_t n = 0; n < modes; ++n) {
                target[n] = semigroup_factor(model, T, n) * x[static_cast<Eigen::Index>(n)] +
                            std::sqrt(covariance_qt(model, T, n)) * xi[n];
            }
            integrator.integrate(as_span(x), target, rng.path(range.first + p), out.path_states(p),
                                 out.path_noise(p));
        }
    });
    return out;
}

namespace {

std::vector<double> reconstruct(const SpectralModel& model, const PathEnsemble& bridge,
                                const ModeVector* common_y) {
    if (bridge.kind() != PathKind::bridge_sde || !bridge.has_noise()) {
        throw std::invalid_argument(
            "Wiener reconstruction needs bridge SDE paths with stored zeta increments");
    }
    if (bridge.n_modes() != model.n_modes()) {
        throw std::invalid_argument("ensemble and model differ in mode count");
    }
    const TimeGrid& grid = bridge.grid();
    const double T = grid.horizon();
    const std::size_t modes = model.n_modes();
    const std::size_t steps = bridge.noise_steps();
    if (steps + 2 != grid.size()) {
        throw std::invalid_argument("stored increments do not match the path grid");
    }
    // rate / sqrt(lambda) = F_s Q_{T-s}^{-1/2} = sqrt(lambda) e^{-alpha tau} / Q_tau
    std::vector<double> coeff(steps * modes), end_decay(steps * modes);
    for (std::size_t k = 0; k < steps; ++k) {
        const double tau = T - grid.node(k);
        for (std::size_t n = 0; n < modes; ++n) {
            const double a = model.alpha(n);
            const double l = model.lambda(n);
            end_decay[k * modes + n] = std::exp(-a * tau);
            coeff[k * modes + n] =
                std::sqrt(l) * end_decay[k * modes + n] / detail::ou_variance(a, l, tau);
        }
    }
    std::vector<double> out(bridge.n_paths() * steps * modes);
    for (std::size_t p = 0; p < bridge.n_paths(); ++p) {
        for (std::size_t k = 0; k < steps; ++k) {
            const double dt = grid.step(k);
            for (std::size_t n = 0; n < modes; ++n) {
                const double y = common_y ? (*common_y)[static_cast<Eigen::Index>(n)]
                                          : bridge.target(p)[n];
                const std::size_t c = k * modes + n;
                out[(p * steps + k) * modes + n] =
                    bridge.noise(p, k, n) +
                    coeff[c] * (y - end_decay[c] * bridge.state(p, k, n)) * dt;
            }
        }
    }
    return out;
}

}  // namespace

std::vector<double> reconstruct_wiener_increments(const SpectralModel& model,
                                                  const PathEnsemble& bridge) {
    if (!bridge.has_targets()) throw std::invalid_argument("bridge ensemble carries no endpoints");
    return reconstruct(model, bridge, nullptr);
}

std::vector<double> reconstruct_wiener_increments(const SpectralModel& model,
                                                  const PathEnsemble& bridge, const ModeVector& y) {
    check_modes(model, y, "y");
    return reconstruct(model, bridge, &y);
}

PathEnsemble center_bridge(const SpectralModel& model, const PathEnsemble& bridge,
                           const ModeVector& x, const ModeVector& y) {
    check_modes(model, x, "x");
    check_modes(model, y, "y");
    if (bridge.n_modes() != model.n_modes()) {
        throw std::invalid_argument("ensemble and model differ in mode count");
    }
    const TimeGrid& grid = bridge.grid();
    const double T = grid.horizon();
    const std::size_t modes = model.n_modes();
    std::vector<double> mean(grid.size() * modes);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.node(k);
        for (std::size_t n = 0; n < modes; ++n) {
            const auto i = static_cast<Eigen::Index>(n);
            mean[k * modes + n] = semigroup_factor(model, t, n) * x[i] +
                                  bridge_gain(model, t, T, n) * (y[i] - semigroup_factor(model, T, n) * x[i]);
        }
    }
    PathEnsemble out(bridge.kind(), grid, modes, bridge.range(), 0);
    for (std::size_t p = 0; p < bridge.n_paths(); ++p) {
        const auto src = bridge.path_states(p);
        auto dst = out.path_states(p);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = src[c] - mean[c];
        // The pinned end is exact: y - (S_T x + (y - S_T x)) may round.
        if (grid.epsilon_cutoff() == 0.0) {
            for (std::size_t n = 0; n < modes; ++n) dst[(grid.size() - 1) * modes + n] = 0.0;
        }
    }
    return out;
}

}  // namespace oubridge
