#include "oubridge/path_ensemble.hpp"

#include <stdexcept>

namespace oubridge {

const char* to_string(PathKind kind) noexcept {
    switch (kind) {
        case PathKind::ou: return "ou";
        case PathKind::bridge_exact: return "bridge-exact";
        case PathKind::bridge_sde: return "bridge-sde";
        case PathKind::semilinear: return "semilinear";
    }
    return "unknown";
}

PathEnsemble::PathEnsemble(PathKind kind, TimeGrid grid, std::size_t n_modes, PathRange range,
                           std::size_t noise_steps)
    : kind_(kind),
      grid_(std::move(grid)),
      n_modes_(n_modes),
      range_(range),
      noise_steps_(noise_steps),
      states_(range.count * grid_.size() * n_modes, 0.0),
      noise_(range.count * noise_steps * n_modes, 0.0) {}

ModeVector PathEnsemble::state_vector(std::size_t p, std::size_t k) const {
    const auto s = state(p, k);
    ModeVector v(static_cast<Eigen::Index>(s.size()));
    for (std::size_t n = 0; n < s.size(); ++n) v[static_cast<Eigen::Index>(n)] = s[n];
    return v;
}

EnsembleAccumulator::EnsembleAccumulator(const TimeGrid& grid, std::size_t n_modes)
    : times_(grid.nodes().begin(), grid.nodes().end()),
      n_modes_(n_modes),
      cells_(grid.size() * n_modes) {}

void EnsembleAccumulator::add(const PathEnsemble& batch) {
    if (batch.n_nodes() != times_.size() || batch.n_modes() != n_modes_) {
        throw std::invalid_argument("batch does not match the accumulator grid");
    }
    for (std::size_t p = 0; p < batch.n_paths(); ++p) {
        const auto states = batch.path_states(p);
        for (std::size_t c = 0; c < cells_.size(); ++c) cells_[c].add(states[c]);
    }
}

EnsembleSummary EnsembleAccumulator::summary() const {
    EnsembleSummary out;
    out.n_paths = cells_.empty() ? 0 : cells_.front().count();
    out.n_modes = n_modes_;
    out.times = times_;
    out.mean.resize(cells_.size());
    out.variance.resize(cells_.size());
    out.mean_std_error.resize(cells_.size());
    out.variance_std_error.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        out.mean[c] = cells_[c].mean();
        out.variance[c] = cells_[c].variance();
        out.mean_std_error[c] = cells_[c].mean_std_error();
        out.variance_std_error[c] = cells_[c].variance_std_error();
    }
    return out;
}

EnsembleSummary summarize(const PathEnsemble& ensemble) {
    EnsembleAccumulator acc(ensemble.grid(), ensemble.n_modes());
    acc.add(ensemble);
    return acc.summary();
}

}  // namespace oubridge
