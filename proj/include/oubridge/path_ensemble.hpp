#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oubridge/spectral_model.hpp"
#include "oubridge/statistics.hpp"
#include "oubridge/time_grid.hpp"

namespace oubridge {

enum class PathKind { ou, bridge_exact, bridge_sde, semilinear };

const char* to_string(PathKind kind) noexcept;

/// Global path indices [first, first + count). Path p always draws from the
/// same random stream, so an ensemble can be produced in batches.
struct PathRange {
    std::uint64_t first = 0;
    std::size_t count = 0;
};

/// Paths stored as [path][node][mode], plus the driving increments
/// [path][step][mode] that produced them (Delta W for OU/semilinear paths,
/// Delta zeta for bridge SDE paths; none for the exact bridge sampler).
class PathEnsemble {
public:
    PathEnsemble(PathKind kind, TimeGrid grid, std::size_t n_modes, PathRange range,
                 std::size_t noise_steps);

    PathKind kind() const noexcept { return kind_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t n_paths() const noexcept { return range_.count; }
    std::size_t n_nodes() const noexcept { return grid_.size(); }
    std::size_t n_modes() const noexcept { return n_modes_; }
    std::uint64_t first_path() const noexcept { return range_.first; }
    PathRange range() const noexcept { return range_; }

    double state(std::size_t p, std::size_t k, std::size_t n) const {
        return states_[(p * n_nodes() + k) * n_modes_ + n];
    }
    std::span<const double> state(std::size_t p, std::size_t k) const {
        return {states_.data() + (p * n_nodes() + k) * n_modes_, n_modes_};
    }
    std::span<double> state(std::size_t p, std::size_t k) {
        return {states_.data() + (p * n_nodes() + k) * n_modes_, n_modes_};
    }
    std::span<double> path_states(std::size_t p) {
        return {states_.data() + p * n_nodes() * n_modes_, n_nodes() * n_modes_};
    }
    std::span<const double> path_states(std::size_t p) const {
        return {states_.data() + p * n_nodes() * n_modes_, n_nodes() * n_modes_};
    }
    ModeVector state_vector(std::size_t p, std::size_t k) const;

    bool has_noise() const noexcept { return noise_steps_ > 0; }
    std::size_t noise_steps() const noexcept { return noise_steps_; }
    double noise(std::size_t p, std::size_t k, std::size_t n) const {
        return noise_[(p * noise_steps_ + k) * n_modes_ + n];
    }
    std::span<double> path_noise(std::size_t p) {
        return {noise_.data() + p * noise_steps_ * n_modes_, noise_steps_ * n_modes_};
    }
    std::span<const double> path_noise(std::size_t p) const {
        return {noise_.data() + p * noise_steps_ * n_modes_, noise_steps_ * n_modes_};
    }

    /// Pinned endpoint of each bridge path; empty for unpinned kinds.
    std::span<const double> target(std::size_t p) const {
        return {targets_.data() + p * n_modes_, n_modes_};
    }
    std::span<double> target(std::size_t p) { return {targets_.data() + p * n_modes_, n_modes_}; }
    bool has_targets() const noexcept { return !targets_.empty(); }
    void enable_targets() { targets_.assign(range_.count * n_modes_, 0.0); }

    std::vector<std::string>& warnings() noexcept { return warnings_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    PathKind kind_;
    TimeGrid grid_;
    std::size_t n_modes_;
    PathRange range_;
    std::size_t noise_steps_;
    std::vector<double> states_;
    std::vector<double> noise_;
    std::vector<double> targets_;
    std::vector<std::string> warnings_;
};

/// Per-node, per-mode sample moments of an ensemble, as [node][mode] arrays.
struct EnsembleSummary {
    std::size_t n_paths = 0;
    std::vector<double> times;
    std::size_t n_modes = 0;
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<double> mean_std_error;
    std::vector<double> variance_std_error;
};

EnsembleSummary summarize(const PathEnsemble& ensemble);

/// Per-node, per-mode moments accumulated over ensembles produced in batches
/// on a common grid; batches are folded in the order they are added.
class EnsembleAccumulator {
public:
    EnsembleAccumulator(const TimeGrid& grid, std::size_t n_modes);

    void add(const PathEnsemble& batch);
    EnsembleSummary summary() const;

private:
    std::vector<double> times_;
    std::size_t n_modes_;
    std::vector<MomentAccumulator> cells_;
};

}  // namespace oubridge
