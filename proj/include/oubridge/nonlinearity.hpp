#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oubridge/spectral_model.hpp"

namespace oubridge {

enum class NonlinearityKind { zero, tanh, sine, custom_table };
enum class NonlinearitySpace { spectral_componentwise, physical_pointwise };

const char* to_string(NonlinearityKind kind) noexcept;
const char* to_string(NonlinearitySpace space) noexcept;
NonlinearityKind parse_nonlinearity_kind(const std::string& text);
NonlinearitySpace parse_nonlinearity_space(const std::string& text);

/// Piecewise-linear scalar map through (u_i, g_i), constant beyond the ends.
class ScalarTable {
public:
    ScalarTable(std::vector<double> u, std::vector<double> g);
    /// Two columns "u,g" per line; blank lines, '#' comments and one
    /// non-numeric header line are skipped.
    static ScalarTable load_csv(const std::filesystem::path& path);

    double operator()(double u) const noexcept;
    double sup_abs() const noexcept { return sup_abs_; }
    std::span<const double> u() const noexcept { return u_; }
    std::span<const double> g() const noexcept { return g_; }

private:
    std::vector<double> u_;
    std::vector<double> g_;
    double sup_abs_ = 0.0;
};

struct NonlinearityConfig {
    NonlinearityKind kind = NonlinearityKind::zero;
    /// c; the scalar map is c * tanh, c * sin, or c * table.
    double amplitude = 0.0;
    NonlinearitySpace space = NonlinearitySpace::spectral_componentwise;
    /// Spectral-componentwise only: G_n = 0 for n >= active_modes. 0 means all.
    std::size_t active_modes = 0;
    std::shared_ptr<const ScalarTable> table;
};

/// The bounded map G: H -> H in mode coordinates. The drift of the semilinear
/// equation is F = Q^{1/2} G, i.e. F_n = sqrt(lambda_n) G_n.
class Nonlinearity {
public:
    /// Scratch for the physical-space round trip; one per worker.
    struct Workspace {
        Eigen::VectorXd physical;
    };

    Nonlinearity(NonlinearityConfig config, const SpectralModel& model);

    const NonlinearityConfig& config() const noexcept { return config_; }
    bool is_zero() const noexcept { return zero_; }
    std::size_t n_modes() const noexcept { return n_modes_; }

    double scalar(double u) const noexcept;

    /// out = G(z). `out` must not alias `z`.
    void evaluate(std::span<const double> z, std::span<double> out, Workspace& ws) const;
    ModeVector operator()(const ModeVector& z) const;

    /// Upper bound on |G(z)| over all z: c for physical-pointwise (the
    /// quadrature analysis is an orthogonal projection in the discrete inner
    /// product), c * sqrt(active modes) for spectral-componentwise.
    double sup_norm_bound() const noexcept { return bound_; }

    /// Physical grid size used by physical-pointwise evaluation (0 otherwise).
    std::size_t physical_points() const noexcept {
        return static_cast<std::size_t>(transform_.synthesis.rows());
    }

private:
    NonlinearityConfig config_;
    std::size_t n_modes_;
    std::size_t active_;
    bool zero_;
    double bound_;
    SineTransform transform_;
};

}  // namespace oubridge
