#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "oubridge/density_engine.hpp"
#include "oubridge/nonlinearity.hpp"
#include "oubridge/spectral_model.hpp"

namespace oubridge {

/// Config file schema (JSON or TOML, same tree):
///
///   model       { n_modes, spectrum: "heat" | {alpha: [...]}, lambda: x | [...],
///                 basis: "dirichlet-sine" | "abstract" }
///   grid        { T, steps, dt_max, refinement, epsilon }
///   nonlinearity{ kind, amplitude, space, active_modes, table }
///   endpoints   { x, y }  vectors or presets zero | ones | smooth | rough | mean
///   budget      { n_paths, n_x, n_y, n_outer, bins, p, q }
///   oracle      { cells, steps, points, mass_fraction }
///   seed, threads, strict_determinism
///   output      { dir, dump_paths, max_dump_paths, log_weights }
///
/// Every section and key is optional; defaults give the 8-mode heat model.
struct ExperimentConfig {
    SpectralModel model = SpectralModel::heat(8);
    double horizon = 0.3;
    std::size_t steps = 300;
    DensityOptions density;
    NonlinearityConfig nonlinearity;
    ModeVector x;
    ModeVector y;
    std::size_t n_paths = 10000;
    std::size_t n_x = 16;
    std::size_t n_y = 16;
    std::size_t n_outer = 1000;
    std::size_t bins = 60;
    double p = 2.0;
    double q = 2.0;
    std::size_t oracle_cells = 2000;
    std::size_t oracle_steps = 2000;
    std::size_t oracle_points = 21;
    double oracle_mass_fraction = 0.8;
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    bool strict_determinism = false;
    std::filesystem::path out_dir = "out";
    bool dump_paths = false;
    std::size_t max_dump_paths = 100;
    bool log_weights = false;

    /// The fully resolved tree (defaults filled in, presets expanded).
    nlohmann::json resolved;
};

/// Parses a .json or .toml file into a JSON tree. Throws ConfigError.
nlohmann::json read_config_tree(const std::filesystem::path& path);

/// Validates and resolves a config tree; relative table paths are taken
/// against `base_dir`. Throws ConfigError naming the offending key.
ExperimentConfig resolve_config(const nlohmann::json& tree,
                                const std::filesystem::path& base_dir = ".");

ExperimentConfig load_config(const std::filesystem::path& path);

/// Named endpoint vectors; "mean" is only valid for y and gives S_T x.
ModeVector endpoint_preset(const std::string& name, std::size_t n_modes);

/// Lowercase hex SHA-256 of the compact dump of `tree`.
std::string content_hash(const nlohmann::json& tree);

}  // namespace oubridge
