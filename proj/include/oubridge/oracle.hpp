#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace oubridge {

/// Density values on uniform nodes; mass is the trapezoid integral.
struct MeshDensity {
    std::vector<double> nodes;
    std::vector<double> values;
    double mass = 0.0;

    /// Linear interpolation, zero outside the mesh.
    double operator()(double xi) const noexcept;
    /// Integral of the interpolant over [a, b].
    double integrate(double a, double b) const;
    /// Equal-tailed interval [lo, hi] holding the central `fraction` of the mass.
    std::pair<double, double> central_interval(double fraction) const;
};

struct FokkerPlanckOptions {
    /// Number of finite-volume cells.
    std::size_t cells = 2000;
    std::size_t steps = 2000;
    /// Half-width in stationary standard deviations (or sqrt(lambda T) when
    /// alpha = 0), added to |x0|.
    double width_sd = 8.0;
};

/// Solves dp/dt = -d/dxi[(-alpha xi + sqrt(lambda) g(xi)) p] + (lambda/2) d^2p/dxi^2
/// with zero-flux walls. Finite volumes with centered fluxes; Crank-Nicolson
/// after two backward-Euler start-up steps. The initial condition is the
/// short-time Gaussian of the SDE at t0 = (4h)^2 / lambda.
///
/// Throws NumericalError if the cell Peclet number exceeds 2 (the centered
/// flux then loses positivity) or if mass leaks to the walls.
MeshDensity fokker_planck_1d(double alpha, double lambda, const std::function<double(double)>& g,
                             double x0, double T, FokkerPlanckOptions options = {});

/// Normalized histogram of scalar samples with binomial error bars.
struct HistogramDensity {
    std::vector<double> edges;
    std::vector<double> density;
    std::vector<double> std_error;
    std::vector<std::size_t> counts;
    std::size_t n = 0;

    std::size_t bins() const noexcept { return counts.size(); }
    double center(std::size_t i) const noexcept { return 0.5 * (edges[i] + edges[i + 1]); }
};

/// Samples outside [lo, hi] are counted in n but in no bin.
HistogramDensity mc_histogram_density(std::span<const double> samples, std::size_t bins,
                                      double lo, double hi);
/// Draws n samples from `sampler(i)` and histograms them; n >= 10^4.
HistogramDensity mc_histogram_density(const std::function<double(std::size_t)>& sampler,
                                      std::size_t n, std::size_t bins, double lo, double hi);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 0.0;
};

/// Pearson chi-square of histogram counts against bin probabilities of
/// `reference`. Bins with expected count below `min_expected` are pooled
/// into their neighbour.
ChiSquareResult chi_square_test(const HistogramDensity& histogram, const MeshDensity& reference,
                                double min_expected = 5.0);

struct ScalarMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Law of Z_t given Z_0 = x, Z_T = y for the scalar OU process, by
/// conditioning the bivariate normal (Z_t, Z_T).
ScalarMoments scalar_bridge_moments(double alpha, double lambda, double x, double y, double T,
                                    double t);

void write_mesh_csv(const MeshDensity& mesh, const std::filesystem::path& path);

}  // namespace oubridge
