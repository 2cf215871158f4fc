#pragma once

#include <filesystem>
#include <span>

#include <nlohmann/json.hpp>

#include "oubridge/density_engine.hpp"
#include "oubridge/path_ensemble.hpp"

namespace oubridge {

/// Columns path,time,mode,value for the first `max_paths` paths; `path` is
/// the global path index.
void write_paths_csv(const PathEnsemble& ensemble, const std::filesystem::path& path,
                     std::size_t max_paths);

void write_log_weights_csv(std::span<const double> log_weights, const std::filesystem::path& path);

nlohmann::json to_json(const EnsembleSummary& summary);
nlohmann::json to_json(const DensityEstimate& estimate);

/// Pretty-printed, trailing newline; creates parent directories.
void write_json(const nlohmann::json& value, const std::filesystem::path& path);

}  // namespace oubridge
