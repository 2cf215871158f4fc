#include "oubridge/semilinear.hpp"

#include <cmath>
#include <stdexcept>

#include "numerics.hpp"
#include "oubridge/parallel.hpp"

namespace oubridge {

namespace {

struct StepTables {
    std::vector<double> decay;
    std::vector<double> drift_scale;  // e^{-alpha dt} sqrt(lambda) dt
    std::vector<double> sd;
    std::vector<double> sqrt_dt;
};

StepTables make_tables(const SpectralModel& model, const TimeGrid& grid) {
    const std::size_t modes = model.n_modes();
    const std::size_t steps = grid.steps();
    StepTables t;
    t.decay.resize(steps * modes);
    t.drift_scale.resize(steps * modes);
    t.sd.resize(steps * modes);
    t.sqrt_dt.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double dt = grid.step(k);
        t.sqrt_dt[k] = std::sqrt(dt);
        for (std::size_t n = 0; n < modes; ++n) {
            const std::size_t c = k * modes + n;
            t.decay[c] = std::exp(-model.alpha(n) * dt);
            t.drift_scale[c] = t.decay[c] * std::sqrt(model.lambda(n)) * dt;
            t.sd[c] = std::sqrt(detail::ou_variance(model.alpha(n), model.lambda(n), dt));
        }
    }
    return t;
}

void check_inputs(const SpectralModel& model, const Nonlinearity& nonlinearity,
                  const ModeVector& x) {
    if (static_cast<std::size_t>(x.size()) != model.n_modes() ||
        nonlinearity.n_modes() != model.n_modes()) {
        throw std::invalid_argument("x, nonlinearity and model differ in mode count");
    }
}

/// Advances one path from z; on_state(k, z_k) after each step, on_noise(k * modes + n, dW).
template <class OnState, class OnNoise>
void advance(const StepTables& t, const Nonlinearity& nonlinearity, std::size_t modes,
             std::size_t steps, const NormalStream& stream, std::vector<double>& z,
             std::vector<double>& z_next, std::vector<double>& xi, std::vector<double>& g,
             Nonlinearity::Workspace& ws, OnState&& on_state, OnNoise&& on_noise) {
    const bool linear = nonlinearity.is_zero();
    for (std::size_t k = 0; k < steps; ++k) {
        stream.fill(k, xi);
        if (!linear) nonlinearity.evaluate(z, g, ws);
        for (std::size_t n = 0; n < modes; ++n) {
            const std::size_t c = k * modes + n;
            double mean = t.decay[c] * z[n];
            if (!linear) mean += t.drift_scale[c] * g[n];
            z_next[n] = mean + t.sd[c] * xi[n];
            on_noise(c, t.sqrt_dt[k] * xi[n]);
        }
        z.swap(z_next);
        on_state(k + 1, z);
    }
}

}  // namespace

PathEnsemble simulate_semilinear(const SpectralModel& model, const Nonlinearity& nonlinearity,
                                 const ModeVector& x, const TimeGrid& grid, const RngStream& rng,
                                 PathRange range, unsigned threads) {
    check_inputs(model, nonlinearity, x);
    const std::size_t modes = model.n_modes();
    const std::size_t steps = grid.steps();
    const StepTables tables = make_tables(model, grid);
    PathEnsemble out(PathKind::semilinear, grid, modes, range, steps);
    parallel_for(range.count, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> z(modes), z_next(modes), xi(modes), g(modes);
        Nonlinearity::Workspace ws;
        for (std::size_t p = begin; p < end; ++p) {
            auto states = out.path_states(p);
            auto noise = out.path_noise(p);
            for (std::size_t n = 0; n < modes; ++n) {
                z[n] = x[static_cast<Eigen::Index>(n)];
                states[n] = z[n];
            }
            advance(
                tables, nonlinearity, modes, steps, rng.path(range.first + p), z, z_next, xi, g, ws,
                [&](std::size_t k, const std::vector<double>& s) {
                    std::copy(s.begin(), s.end(), states.begin() + k * modes);
                },
                [&](std::size_t c, double dw) { noise[c] = dw; });
        }
    });
    return out;
}

std::vector<double> simulate_semilinear_endpoints(const SpectralModel& model,
                                                  const Nonlinearity& nonlinearity,
                                                  const ModeVector& x, const TimeGrid& grid,
                                                  const RngStream& rng, PathRange range,
                                                  unsigned threads) {
    check_inputs(model, nonlinearity, x);
    const std::size_t modes = model.n_modes();
    const std::size_t steps = grid.steps();
    const StepTables tables = make_tables(model, grid);
    std::vector<double> out(range.count * modes);
    parallel_for(range.count, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> z(modes), z_next(modes), xi(modes), g(modes);
        Nonlinearity::Workspace ws;
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t n = 0; n < modes; ++n) z[n] = x[static_cast<Eigen::Index>(n)];
            advance(
                tables, nonlinearity, modes, steps, rng.path(range.first + p), z, z_next, xi, g, ws,
                [](std::size_t, const std::vector<double>&) {}, [](std::size_t, double) {});
            std::copy(z.begin(), z.end(), out.begin() + p * modes);
        }
    });
    return out;
}

}  // namespace oubridge
