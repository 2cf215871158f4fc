#include "oubridge/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oubridge {

TimeGrid::TimeGrid(double T, std::vector<double> nodes) : horizon_(T), nodes_(std::move(nodes)) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
        throw std::invalid_argument("time grid horizon must be positive");
    }
    if (nodes_.size() < 2) throw std::invalid_argument("time grid needs at least two nodes");
    if (nodes_.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    for (std::size_t k = 1; k < nodes_.size(); ++k) {
        if (!(nodes_[k] > nodes_[k - 1])) {
            throw std::invalid_argument("time grid nodes must be strictly increasing");
        }
    }
    if (nodes_.back() > horizon_) throw std::invalid_argument("time grid exceeds its horizon");
}

TimeGrid TimeGrid::uniform(double T, std::size_t steps) {
    if (steps == 0) throw std::invalid_argument("uniform grid needs at least one step");
    std::vector<double> nodes(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        nodes[k] = T * static_cast<double>(k) / static_cast<double>(steps);
    }
    nodes.back() = T;
    return TimeGrid(T, std::move(nodes));
}

TimeGrid TimeGrid::refined(double T, double dt_max, double refinement, double epsilon) {
    if (!(T > 0.0)) throw std::invalid_argument("time grid horizon must be positive");
    if (!(dt_max > 0.0)) throw std::invalid_argument("dt_max must be positive");
    if (!(refinement > 0.0 && refinement <= 1.0)) {
        throw std::invalid_argument("refinement factor must lie in (0, 1]");
    }
    if (!(epsilon >= 0.0 && epsilon < T)) {
        throw std::invalid_argument("epsilon cutoff must lie in [0, T)");
    }
    if (epsilon == 0.0 && refinement < 1.0) {
        throw std::invalid_argument("geometric refinement needs a positive epsilon cutoff");
    }
    const double end = T - epsilon;
    std::vector<double> nodes{0.0};
    double t = 0.0;
    while (t < end) {
        const double dt = std::min(dt_max, refinement * (T - t));
        double next = t + dt;
        if (end - next < 1e-3 * dt) next = end;
        nodes.push_back(next);
        t = next;
    }
    return TimeGrid(T, std::move(nodes));
}

TimeGrid TimeGrid::from_nodes(double T, std::vector<double> nodes) {
    return TimeGrid(T, std::move(nodes));
}

double TimeGrid::max_step() const {
    double m = 0.0;
    for (std::size_t k = 0; k < steps(); ++k) m = std::max(m, step(k));
    return m;
}

double TimeGrid::min_step() const {
    double m = horizon_;
    for (std::size_t k = 0; k < steps(); ++k) m = std::min(m, step(k));
    return m;
}

TimeGrid TimeGrid::closed() const {
    if (epsilon_cutoff() == 0.0) return *this;
    std::vector<double> nodes = nodes_;
    nodes.push_back(horizon_);
    return TimeGrid(horizon_, std::move(nodes));
}

std::size_t TimeGrid::nearest_node(double t) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    if (it == nodes_.begin()) return 0;
    if (it == nodes_.end()) return nodes_.size() - 1;
    const auto k = static_cast<std::size_t>(it - nodes_.begin());
    return (t - nodes_[k - 1] <= nodes_[k] - t) ? k - 1 : k;
}

}  // namespace oubridge
