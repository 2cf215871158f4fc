#pragma once

#include <vector>

#include "oubridge/nonlinearity.hpp"
#include "oubridge/path_ensemble.hpp"
#include "oubridge/rng.hpp"
#include "oubridge/spectral_model.hpp"
#include "oubridge/time_grid.hpp"

namespace oubridge {

/// Exponential Euler on the mild formula:
///   X' = e^{-alpha dt} X + e^{-alpha dt} sqrt(lambda) G(X) dt + sqrt(Q_dt) xi.
/// Uses the same random addresses as sample_ou_path, so with G = 0 the two
/// agree bit for bit.
PathEnsemble simulate_semilinear(const SpectralModel& model, const Nonlinearity& nonlinearity,
                                 const ModeVector& x, const TimeGrid& grid, const RngStream& rng,
                                 PathRange range, unsigned threads = 1);

/// Same scheme keeping only X_T; returns [path][mode].
std::vector<double> simulate_semilinear_endpoints(const SpectralModel& model,
                                                  const Nonlinearity& nonlinearity,
                                                  const ModeVector& x, const TimeGrid& grid,
                                                  const RngStream& rng, PathRange range,
                                                  unsigned threads = 1);

}  // namespace oubridge
