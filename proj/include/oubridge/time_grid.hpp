#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oubridge {

/// Strictly increasing nodes 0 = t_0 < ... < t_M <= T.
///
/// epsilon_cutoff() = T - t_M. A grid with zero cutoff ends at the horizon
/// (required by the exact bridge sampler); the bridge SDE integrator needs a
/// positive cutoff because its coefficients blow up at T.
class TimeGrid {
public:
    /// `steps` equal steps from 0 to T inclusive.
    static TimeGrid uniform(double T, std::size_t steps);

    /// Steps of size min(dt_max, refinement * (T - t)) up to T - epsilon, so the
    /// mesh is geometrically graded toward T. refinement in (0, 1]; epsilon must
    /// be positive unless refinement == 1.
    static TimeGrid refined(double T, double dt_max, double refinement, double epsilon);

    static TimeGrid from_nodes(double T, std::vector<double> nodes);

    double horizon() const noexcept { return horizon_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    double node(std::size_t k) const { return nodes_.at(k); }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    double step(std::size_t k) const { return nodes_.at(k + 1) - nodes_.at(k); }
    double epsilon_cutoff() const noexcept { return horizon_ - nodes_.back(); }
    double max_step() const;
    double min_step() const;

    /// Copy with T appended as the final node when the cutoff is positive.
    TimeGrid closed() const;

    /// Index of the node closest to t.
    std::size_t nearest_node(double t) const;

private:
    TimeGrid(double T, std::vector<double> nodes);

    double horizon_;
    std::vector<double> nodes_;
};

}  // namespace oubridge
