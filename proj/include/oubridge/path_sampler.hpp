#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oubridge/path_ensemble.hpp"
#include "oubridge/rng.hpp"
#include "oubridge/spectral_model.hpp"
#include "oubridge/time_grid.hpp"

namespace oubridge {

/// Exact OU transitions z' = e^{-alpha dt} z + sqrt(Q_dt) xi per mode.
/// Stored increments are sqrt(dt) xi.
PathEnsemble sample_ou_path(const SpectralModel& model, const ModeVector& x, const TimeGrid& grid,
                            const RngStream& rng, PathRange range, unsigned threads = 1);

/// Draw number `draw` from nu = N(0, Q_inf).
ModeVector sample_invariant(const SpectralModel& model, const RngStream& rng, std::uint64_t draw);

/// Bridge from x to y by sequential three-point Gaussian conditioning. The
/// grid must end at T; the final node equals y exactly.
PathEnsemble sample_bridge_exact(const SpectralModel& model, const ModeVector& x,
                                 const ModeVector& y, const TimeGrid& grid, const RngStream& rng,
                                 PathRange range, unsigned threads = 1);

struct BridgeSdeOptions {
    /// Upper bound on (feedback rate) * dt for each step. The explicit
    /// treatment of the singular feedback term loses accuracy once a step
    /// removes more than this fraction of the remaining gap to y.
    double max_feedback_step = 0.5;
    /// Mode n is flagged when e^{alpha_n T} |y_n| exceeds this value.
    double conditioning_threshold = 1e8;
};

/// Exponential-Euler integrator for the pinned SDE
///   dz = [-alpha z + b(s) (y - e^{-alpha (T-s)} z)] ds + sqrt(lambda) dzeta,
///   b(s) = lambda e^{-alpha (T-s)} / Q_{T-s},
/// on a grid ending at T - epsilon, closed by one exact conditional step to y.
///
/// Coefficients are tabulated once per (model, grid); integrate() is then a
/// pure per-path kernel.
class BridgeSdeIntegrator {
public:
    BridgeSdeIntegrator(const SpectralModel& model, const TimeGrid& grid,
                        BridgeSdeOptions options = {});

    const SpectralModel& model() const noexcept { return *model_; }
    /// Input grid (ends at T - epsilon).
    const TimeGrid& grid() const noexcept { return grid_; }
    /// Grid of the stored states: the input nodes plus T.
    const TimeGrid& state_grid() const noexcept { return state_grid_; }
    std::size_t n_modes() const noexcept { return n_modes_; }
    std::size_t steps() const noexcept { return grid_.steps(); }

    /// Fills states [node][mode] (state_grid().size() nodes) and zeta
    /// increments [step][mode] (steps() steps) for one path.
    void integrate(std::span<const double> x, std::span<const double> y, const NormalStream& stream,
                   std::span<double> states, std::span<double> zeta) const;

    /// Feedback rate b_k for step k and mode n (coefficient of (y - c_k z)).
    double feedback_rate(std::size_t k, std::size_t n) const { return rate_[k * n_modes_ + n]; }
    /// c_k = e^{-alpha (T - s_k)}.
    double endpoint_decay(std::size_t k, std::size_t n) const { return end_decay_[k * n_modes_ + n]; }

    /// Modes whose endpoint coefficient exceeds the conditioning threshold.
    std::vector<std::size_t> ill_conditioned_modes(std::span<const double> y) const;

private:
    const SpectralModel* model_;
    TimeGrid grid_;
    TimeGrid state_grid_;
    BridgeSdeOptions options_;
    std::size_t n_modes_;
    std::vector<double> step_decay_;
    std::vector<double> noise_sd_;
    std::vector<double> sqrt_dt_;
    std::vector<double> rate_;
    std::vector<double> end_decay_;
};

PathEnsemble integrate_bridge_sde(const SpectralModel& model, const ModeVector& x,
                                  const ModeVector& y, const TimeGrid& grid, const RngStream& rng,
                                  PathRange range, unsigned threads = 1,
                                  BridgeSdeOptions options = {});

/// Bridge SDE paths whose endpoints are drawn per path from mu_T^x, so that
/// the reconstructed Wiener increments follow the unconditioned law.
PathEnsemble integrate_bridge_sde_random_endpoint(const SpectralModel& model, const ModeVector& x,
                                                  const TimeGrid& grid, const RngStream& rng,
                                                  PathRange range, unsigned threads = 1,
                                                  BridgeSdeOptions options = {});

/// Delta W_k = Delta zeta_k + (b_k / sqrt(lambda)) (y - e^{-alpha (T - s_k)} z_k) dt_k
/// for every stored SDE step, laid out [path][step][mode]. Uses the endpoint
/// stored with each path.
std::vector<double> reconstruct_wiener_increments(const SpectralModel& model,
                                                  const PathEnsemble& bridge);
/// Same, with an explicit common endpoint y.
std::vector<double> reconstruct_wiener_increments(const SpectralModel& model,
                                                  const PathEnsemble& bridge, const ModeVector& y);

/// Subtracts the bridge mean S_t x + gain(t) (y - S_T x) from every state,
/// leaving the centered bridge. The result carries no increments.
PathEnsemble center_bridge(const SpectralModel& model, const PathEnsemble& bridge,
                           const ModeVector& x, const ModeVector& y);

}  // namespace oubridge
