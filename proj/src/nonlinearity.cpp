#include "oubridge/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "oubridge/errors.hpp"

namespace oubridge {

const char* to_string(NonlinearityKind kind) noexcept {
    switch (kind) {
        case NonlinearityKind::zero: return "zero";
        case NonlinearityKind::tanh: return "tanh";
        case NonlinearityKind::sine: return "sine";
        case NonlinearityKind::custom_table: return "custom-table";
    }
    return "unknown";
}

const char* to_string(NonlinearitySpace space) noexcept {
    switch (space) {
        case NonlinearitySpace::spectral_componentwise: return "spectral-componentwise";
        case NonlinearitySpace::physical_pointwise: return "physical-pointwise";
    }
    return "unknown";
}

NonlinearityKind parse_nonlinearity_kind(const std::string& text) {
    if (text == "zero") return NonlinearityKind::zero;
    if (text == "tanh") return NonlinearityKind::tanh;
    if (text == "sine" || text == "sin") return NonlinearityKind::sine;
    if (text == "custom-table" || text == "custom_table") return NonlinearityKind::custom_table;
    throw ConfigError("unknown nonlinearity kind '" + text + "'");
}

NonlinearitySpace parse_nonlinearity_space(const std::string& text) {
    if (text == "spectral-componentwise" || text == "spectral") {
        return NonlinearitySpace::spectral_componentwise;
    }
    if (text == "physical-pointwise" || text == "physical") {
        return NonlinearitySpace::physical_pointwise;
    }
    throw ConfigError("unknown nonlinearity space '" + text + "'");
}

ScalarTable::ScalarTable(std::vector<double> u, std::vector<double> g)
    : u_(std::move(u)), g_(std::move(g)) {
    if (u_.size() != g_.size()) throw ConfigError("table columns differ in length");
    if (u_.empty()) throw ConfigError("empty nonlinearity table");
    for (std::size_t i = 0; i < u_.size(); ++i) {
        if (!std::isfinite(u_[i]) || !std::isfinite(g_[i])) {
            throw ConfigError("nonlinearity table is unbounded: non-finite entry at row " +
                              std::to_string(i));
        }
        if (i > 0 && !(u_[i] > u_[i - 1])) {
            throw ConfigError("nonlinearity table abscissae must be strictly increasing");
        }
        sup_abs_ = std::max(sup_abs_, std::abs(g_[i]));
    }
}

ScalarTable ScalarTable::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open nonlinearity table '" + path.string() + "'");
    std::vector<double> u, g;
    std::string line;
    bool header_allowed = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double a = 0.0, b = 0.0;
        if (!(fields >> a >> b)) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected two numeric columns");
        }
        header_allowed = false;
        u.push_back(a);
        g.push_back(b);
    }
    return ScalarTable(std::move(u), std::move(g));
}

double ScalarTable::operator()(double u) const noexcept {
    if (u <= u_.front()) return g_.front();
    if (u >= u_.back()) return g_.back();
    const auto it = std::upper_bound(u_.begin(), u_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - u_.begin());
    const double w = (u - u_[i - 1]) / (u_[i] - u_[i - 1]);
    return (1.0 - w) * g_[i - 1] + w * g_[i];
}

Nonlinearity::Nonlinearity(NonlinearityConfig config, const SpectralModel& model)
    : config_(std::move(config)), n_modes_(model.n_modes()), active_(n_modes_), zero_(false), bound_(0.0) {
    if (!std::isfinite(config_.amplitude)) throw ConfigError("nonlinearity amplitude must be finite");
    if (config_.kind == NonlinearityKind::custom_table && !config_.table) {
        throw ConfigError("custom-table nonlinearity needs a table");
    }
    zero_ = config_.kind == NonlinearityKind::zero || config_.amplitude == 0.0;
    double scalar_bound = std::abs(config_.amplitude);
    if (config_.kind == NonlinearityKind::custom_table) scalar_bound *= config_.table->sup_abs();
    if (zero_) {
        bound_ = 0.0;
        return;
    }
    if (config_.space == NonlinearitySpace::spectral_componentwise) {
        if (config_.active_modes > 0) active_ = std::min(config_.active_modes, n_modes_);
        bound_ = scalar_bound * std::sqrt(static_cast<double>(active_));
    } else {
        if (model.basis() != Basis::dirichlet_sine) {
            throw ConfigError("physical-pointwise nonlinearity needs the dirichlet-sine basis");
        }
        // 4x oversampling; the interior grid j / (4 (N + 1)) keeps the sine
        // vectors of every retained mode discretely orthogonal.
        transform_ = make_sine_transform(model, interior_grid(4 * (n_modes_ + 1) - 1));
        bound_ = scalar_bound;
    }
}

double Nonlinearity::scalar(double u) const noexcept {
    switch (config_.kind) {
        case NonlinearityKind::zero: return 0.0;
        case NonlinearityKind::tanh: return config_.amplitude * std::tanh(u);
        case NonlinearityKind::sine: return config_.amplitude * std::sin(u);
        case NonlinearityKind::custom_table: return config_.amplitude * (*config_.table)(u);
    }
    return 0.0;
}

void Nonlinearity::evaluate(std::span<const double> z, std::span<double> out, Workspace& ws) const {
    if (zero_) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (config_.space == NonlinearitySpace::spectral_componentwise) {
        for (std::size_t n = 0; n < active_; ++n) out[n] = scalar(z[n]);
        for (std::size_t n = active_; n < n_modes_; ++n) out[n] = 0.0;
        return;
    }
    const Eigen::Map<const Eigen::VectorXd> coeffs(z.data(), static_cast<Eigen::Index>(n_modes_));
    ws.physical.noalias() = transform_.synthesis * coeffs;
    for (Eigen::Index j = 0; j < ws.physical.size(); ++j) ws.physical[j] = scalar(ws.physical[j]);
    Eigen::Map<Eigen::VectorXd> result(out.data(), static_cast<Eigen::Index>(n_modes_));
    result.noalias() = transform_.analysis * ws.physical;
}

ModeVector Nonlinearity::operator()(const ModeVector& z) const {
    if (static_cast<std::size_t>(z.size()) != n_modes_) {
        throw std::invalid_argument("state has the wrong number of modes");
    }
    ModeVector out(z.size());
    Workspace ws;
    evaluate({z.data(), n_modes_}, {out.data(), n_modes_}, ws);
    return out;
}

}  // namespace oubridge
