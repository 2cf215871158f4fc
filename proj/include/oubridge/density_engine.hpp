#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oubridge/nonlinearity.hpp"
#include "oubridge/path_ensemble.hpp"
#include "oubridge/path_sampler.hpp"
#include "oubridge/rng.hpp"
#include "oubridge/spectral_model.hpp"
#include "oubridge/time_grid.hpp"

namespace oubridge {

struct DensityDiagnostics {
    double min_log_weight = 0.0;
    double max_log_weight = 0.0;
    double effective_sample_size = 0.0;
    std::vector<std::string> warnings;
};

struct DensityEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    DensityDiagnostics diagnostics;
};

/// How the stochastic integral in the Girsanov exponent is assembled.
///
/// bridge_noise: sum <G, dzeta> - 1/2 sum |G|^2 dt
///               - sum <G, B1 zhat + B2 x - B3 y> dt, zhat the centered bridge.
/// reconstructed: sum <G, dW> - 1/2 sum |G|^2 dt, dW rebuilt from dzeta.
/// The two are the same sum regrouped; both evaluate G at the left node.
enum class GirsanovRoute { bridge_noise, reconstructed };

struct DensityOptions {
    double dt_max = 1e-2;
    double refinement = 0.05;
    double epsilon = 1e-7;
    unsigned threads = 1;
    GirsanovRoute route = GirsanovRoute::bridge_noise;
    BridgeSdeOptions sde{};
    /// Below this effective sample size a warning is attached.
    double min_effective_sample_size = 10.0;
};

TimeGrid density_grid(double T, const DensityOptions& options);

/// Girsanov exponent of bridge paths on a fixed grid. Coefficient tables
/// are built once; every evaluation method is const and thread-safe given
/// a per-thread Workspace.
class GirsanovKernel {
public:
    struct Workspace {
        std::vector<double> states;
        std::vector<double> zeta;
        std::vector<double> g;
        Nonlinearity::Workspace nonlinear;
    };

    /// `grid` is the SDE grid (ends at T - epsilon).
    GirsanovKernel(const SpectralModel& model, const Nonlinearity& nonlinearity,
                   const TimeGrid& grid, BridgeSdeOptions options = {});

    const BridgeSdeIntegrator& integrator() const noexcept { return integrator_; }
    Workspace make_workspace() const;

    /// Exponent for stored states (state grid = SDE grid plus T) and dzeta.
    double exponent(std::span<const double> states, std::span<const double> zeta,
                    std::span<const double> x, std::span<const double> y, GirsanovRoute route,
                    Workspace& ws) const;

    /// Integrates one bridge path with `stream` and returns its exponent.
    double sample(std::span<const double> x, std::span<const double> y, const NormalStream& stream,
                  GirsanovRoute route, Workspace& ws) const;

private:
    const SpectralModel* model_;
    const Nonlinearity* nonlinearity_;
    BridgeSdeIntegrator integrator_;
    std::size_t n_modes_;
    std::vector<double> dt_;
    // [step][mode]
    std::vector<double> b1_, b2_, b3_, semigroup_, gain_, w_coeff_;
    std::vector<double> horizon_decay_;  // e^{-alpha T} per mode
};

/// girsanov_exponent for path p of a bridge SDE ensemble pinned at (x, y).
double girsanov_exponent(const SpectralModel& model, const Nonlinearity& nonlinearity,
                         const PathEnsemble& bridge, std::size_t p, const ModeVector& x,
                         const ModeVector& y, GirsanovRoute route = GirsanovRoute::bridge_noise);

/// Monte Carlo estimates for one (model, G, T). Path i of every estimate uses
/// random stream i of `rng`, so estimates at different (x, y) share random
/// numbers path by path.
class DensityEngine {
public:
    DensityEngine(const SpectralModel& model, const Nonlinearity& nonlinearity, double T,
                  DensityOptions options = {});

    const SpectralModel& model() const noexcept { return *model_; }
    const Nonlinearity& nonlinearity() const noexcept { return *nonlinearity_; }
    double horizon() const noexcept { return horizon_; }
    const DensityOptions& options() const noexcept { return options_; }
    const TimeGrid& grid() const noexcept { return grid_; }

    /// Girsanov exponents of n_paths bridge paths from x to y (all zero when G = 0).
    std::vector<double> log_weights(const ModeVector& x, const ModeVector& y,
                                    std::size_t n_paths, const RngStream& rng) const;

    DensityEstimate h(const ModeVector& x, const ModeVector& y, std::size_t n_paths,
                      const RngStream& rng) const;
    /// Mean of exp(q * exponent).
    DensityEstimate hq(const ModeVector& x, const ModeVector& y, double q, std::size_t n_paths,
                       const RngStream& rng) const;
    /// d(T, x, y) = h g k, the density of P(T, x, .) with respect to nu.
    DensityEstimate density(const ModeVector& x, const ModeVector& y, std::size_t n_paths,
                            const RngStream& rng) const;
    /// E_{y ~ nu} d(T, x, y) from n_y endpoint draws with n_paths bridges each.
    DensityEstimate normalization(const ModeVector& x, std::size_t n_y, std::size_t n_paths,
                                  const RngStream& rng) const;
    /// (int (int d^{p'} dnu(y))^{q/p'} dnu(x))^{1/q}, p' = p / (p - 1), by nested
    /// Monte Carlo over x, y ~ nu.
    DensityEstimate pq_norm(double p, double q, std::size_t n_x, std::size_t n_y,
                            std::size_t n_paths, const RngStream& rng) const;

private:
    DensityEstimate from_log_weights(std::span<const double> log_weights, double q) const;

    const SpectralModel* model_;
    const Nonlinearity* nonlinearity_;
    double horizon_;
    DensityOptions options_;
    TimeGrid grid_;
    GirsanovKernel kernel_;
};

DensityEstimate estimate_h(const SpectralModel& model, const Nonlinearity& nonlinearity,
                           const ModeVector& x, const ModeVector& y, double T, std::size_t n_paths,
                           const RngStream& rng, const DensityOptions& options = {});
DensityEstimate estimate_hq(const SpectralModel& model, const Nonlinearity& nonlinearity,
                            const ModeVector& x, const ModeVector& y, double T, double q,
                            std::size_t n_paths, const RngStream& rng,
                            const DensityOptions& options = {});
DensityEstimate estimate_density(const SpectralModel& model, const Nonlinearity& nonlinearity,
                                 const ModeVector& x, const ModeVector& y, double T,
                                 std::size_t n_paths, const RngStream& rng,
                                 const DensityOptions& options = {});
DensityEstimate estimate_pq_norm(const SpectralModel& model, const Nonlinearity& nonlinearity,
                                 double T, double p, double q, std::size_t n_x, std::size_t n_y,
                                 std::size_t n_paths, const RngStream& rng,
                                 const DensityOptions& options = {});

}  // namespace oubridge
