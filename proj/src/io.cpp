#include "oubridge/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace oubridge {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_paths_csv(const PathEnsemble& ensemble, const std::filesystem::path& path,
                     std::size_t max_paths) {
    auto out = open_for_write(path);
    out << "path,time,mode,value\n";
    const std::size_t paths = std::min(max_paths, ensemble.n_paths());
    for (std::size_t p = 0; p < paths; ++p) {
        for (std::size_t k = 0; k < ensemble.n_nodes(); ++k) {
            for (std::size_t n = 0; n < ensemble.n_modes(); ++n) {
                out << ensemble.first_path() + p << ',' << ensemble.grid().node(k) << ',' << n
                    << ',' << ensemble.state(p, k, n) << '\n';
            }
        }
    }
}

void write_log_weights_csv(std::span<const double> log_weights, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "path,log_weight\n";
    for (std::size_t i = 0; i < log_weights.size(); ++i) out << i << ',' << log_weights[i] << '\n';
}

nlohmann::json to_json(const EnsembleSummary& summary) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t k = 0; k < summary.times.size(); ++k) {
        const auto slice = [&](const std::vector<double>& v) {
            return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(k * summary.n_modes),
                                       v.begin() + static_cast<std::ptrdiff_t>((k + 1) * summary.n_modes));
        };
        nodes.push_back({{"time", summary.times[k]},
                         {"mean", slice(summary.mean)},
                         {"mean_std_error", slice(summary.mean_std_error)},
                         {"variance", slice(summary.variance)},
                         {"variance_std_error", slice(summary.variance_std_error)}});
    }
    return {{"n_paths", summary.n_paths}, {"n_modes", summary.n_modes}, {"nodes", nodes}};
}

nlohmann::json to_json(const DensityEstimate& estimate) {
    return {{"value", estimate.value},
            {"std_error", estimate.std_error},
            {"n_samples", estimate.n_samples},
            {"diagnostics",
             {{"min_log_weight", estimate.diagnostics.min_log_weight},
              {"max_log_weight", estimate.diagnostics.max_log_weight},
              {"effective_sample_size", estimate.diagnostics.effective_sample_size},
              {"warnings", estimate.diagnostics.warnings}}}};
}

void write_json(const nlohmann::json& value, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << value.dump(2) << '\n';
}

}  // namespace oubridge
