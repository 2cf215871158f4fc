// Command-line front end: one config file per experiment, flags override it,
// every result embeds the resolved config and its SHA-256.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oubridge/config.hpp"
#include "oubridge/density_engine.hpp"
#include "oubridge/errors.hpp"
#include "oubridge/gaussian_laws.hpp"
#include "oubridge/io.hpp"
#include "oubridge/oracle.hpp"
#include "oubridge/path_sampler.hpp"
#include "oubridge/semilinear.hpp"
#include "oubridge/validation.hpp"

namespace {

using namespace oubridge;
using nlohmann::json;

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kAcceptance = 4 };

constexpr std::size_t kBatch = 2048;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool strict = false;
    std::optional<std::string> out_dir;
    std::string method = "exact";
    std::optional<double> q;
};

ExperimentConfig load(const Flags& flags) {
    json tree = flags.config.empty() ? json::object() : read_config_tree(flags.config);
    if (flags.seed) tree["seed"] = *flags.seed;
    if (flags.threads) tree["threads"] = *flags.threads;
    if (flags.strict) tree["strict_determinism"] = true;
    if (flags.out_dir) tree["output"]["dir"] = *flags.out_dir;
    const std::filesystem::path base =
        flags.config.empty() ? std::filesystem::path(".")
                             : std::filesystem::path(flags.config).parent_path();
    return resolve_config(tree, base.empty() ? "." : base);
}

json envelope(const std::string& command, const ExperimentConfig& cfg, json result) {
    return {{"command", command},
            {"config", cfg.resolved},
            {"config_hash", content_hash(cfg.resolved)},
            {"result", std::move(result)}};
}

void emit(const std::string& command, const ExperimentConfig& cfg, json result) {
    const json doc = envelope(command, cfg, std::move(result));
    write_json(doc, cfg.out_dir / (command + ".json"));
    std::cout << doc["result"].dump(2) << '\n';
}

template <class Sample>
EnsembleSummary batched_summary(const ExperimentConfig& cfg, const TimeGrid& grid,
                                std::size_t n_modes, const std::string& dump_name, Sample&& sample) {
    EnsembleAccumulator acc(grid, n_modes);
    bool dumped = false;
    for (std::size_t first = 0; first < cfg.n_paths; first += kBatch) {
        const PathEnsemble batch = sample(PathRange{first, std::min(kBatch, cfg.n_paths - first)});
        acc.add(batch);
        if (cfg.dump_paths && !dumped) {
            write_paths_csv(batch, cfg.out_dir / dump_name, cfg.max_dump_paths);
            dumped = true;
        }
    }
    return acc.summary();
}

int simulate_ou(const ExperimentConfig& cfg) {
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    const RngStream rng(cfg.seed);
    const auto summary = batched_summary(cfg, grid, cfg.model.n_modes(), "ou_paths.csv", [&](PathRange r) {
        return sample_ou_path(cfg.model, cfg.x, grid, rng, r, cfg.threads);
    });
    emit("simulate-ou", cfg, to_json(summary));
    return kOk;
}

int simulate_bridge(const ExperimentConfig& cfg, const std::string& method) {
    const RngStream rng(cfg.seed);
    json result;
    std::vector<std::string> warnings;
    if (method == "exact") {
        const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
        result = to_json(batched_summary(cfg, grid, cfg.model.n_modes(), "bridge_paths.csv", [&](PathRange r) {
            return sample_bridge_exact(cfg.model, cfg.x, cfg.y, grid, rng, r, cfg.threads);
        }));
    } else if (method == "sde") {
        const TimeGrid grid = density_grid(cfg.horizon, cfg.density);
        const BridgeSdeIntegrator integrator(cfg.model, grid, cfg.density.sde);
        result = to_json(batched_summary(
            cfg, integrator.state_grid(), cfg.model.n_modes(), "bridge_paths.csv", [&](PathRange r) {
                PathEnsemble batch = integrate_bridge_sde(cfg.model, cfg.x, cfg.y, grid, rng, r,
                                                          cfg.threads, cfg.density.sde);
                if (warnings.empty()) warnings = batch.warnings();
                return batch;
            }));
    } else {
        throw ConfigError("--method must be exact or sde");
    }
    result["method"] = method;
    result["warnings"] = warnings;
    emit("simulate-bridge", cfg, std::move(result));
    return kOk;
}

int simulate_semilinear_cmd(const ExperimentConfig& cfg) {
    const TimeGrid grid = TimeGrid::uniform(cfg.horizon, cfg.steps);
    const Nonlinearity g(cfg.nonlinearity, cfg.model);
    const RngStream rng(cfg.seed);
    json result = to_json(batched_summary(cfg, grid, cfg.model.n_modes(), "semilinear_paths.csv", [&](PathRange r) {
        return simulate_semilinear(cfg.model, g, cfg.x, grid, rng, r, cfg.threads);
    }));
    result["sup_norm_bound"] = g.sup_norm_bound();
    emit("simulate-semilinear", cfg, std::move(result));
    return kOk;
}

int density_cmd(const ExperimentConfig& cfg) {
    const Nonlinearity g(cfg.nonlinearity, cfg.model);
    const DensityEngine engine(cfg.model, g, cfg.horizon, cfg.density);
    const RngStream rng(cfg.seed);
    const DensityEstimate h = engine.h(cfg.x, cfg.y, cfg.n_paths, rng);
    const DensityEstimate d = engine.density(cfg.x, cfg.y, cfg.n_paths, rng);
    emit("density", cfg,
         {{"h", to_json(h)},
          {"g", g_factor(cfg.model, cfg.horizon, cfg.x, cfg.y)},
          {"k", k_factor(cfg.model, cfg.horizon, cfg.y)},
          {"d", to_json(d)}});
    return kOk;
}

int h_weight_cmd(const ExperimentConfig& cfg, std::optional<double> q) {
    const Nonlinearity g(cfg.nonlinearity, cfg.model);
    const DensityEngine engine(cfg.model, g, cfg.horizon, cfg.density);
    const RngStream rng(cfg.seed);
    const double power = q.value_or(1.0);
    json result = to_json(engine.hq(cfg.x, cfg.y, power, cfg.n_paths, rng));
    result["q"] = power;
    if (cfg.log_weights) {
        const auto lw = engine.log_weights(cfg.x, cfg.y, cfg.n_paths, rng);
        write_log_weights_csv(lw, cfg.out_dir / "log_weights.csv");
    }
    emit("h-weight", cfg, std::move(result));
    return kOk;
}

int pq_norm_cmd(const ExperimentConfig& cfg) {
    const Nonlinearity g(cfg.nonlinearity, cfg.model);
    const DensityEngine engine(cfg.model, g, cfg.horizon, cfg.density);
    json result = to_json(engine.pq_norm(cfg.p, cfg.q, cfg.n_x, cfg.n_y, cfg.n_paths, RngStream(cfg.seed)));
    result["p"] = cfg.p;
    result["q"] = cfg.q;
    if (g.is_zero() && cfg.p == 2.0 && cfg.q == 2.0) {
        result["hs_norm_closed_form"] = hs_norm_linear(cfg.model, cfg.horizon);
    }
    emit("pq-norm", cfg, std::move(result));
    return kOk;
}

int densities_cmd(const ExperimentConfig& cfg) {
    const double T = cfg.horizon;
    json result = {{"log_g", log_g_factor(cfg.model, T, cfg.x, cfg.y)},
                   {"g", g_factor(cfg.model, T, cfg.x, cfg.y)}};
    if (cfg.model.has_invariant_measure()) {
        result["log_k"] = log_k_factor(cfg.model, T, cfg.y);
        result["k"] = k_factor(cfg.model, T, cfg.y);
        result["hs_norm_linear"] = hs_norm_linear(cfg.model, T);
        result["log_invariant_density_y"] = log_invariant_density(cfg.model, cfg.y);
    }
    const GaussianMarginal ou = ou_marginal(cfg.model, cfg.x, T);
    const GaussianMarginal bridge = bridge_marginal(cfg.model, cfg.x, cfg.y, 0.5 * T, T);
    const auto vec = [](const ModeVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    result["ou_marginal_T"] = {{"mean", vec(ou.mean)}, {"variance", vec(ou.variance)}};
    result["bridge_marginal_half_T"] = {{"mean", vec(bridge.mean)}, {"variance", vec(bridge.variance)}};
    result["psi_at_bridge_mean"] = psi_density_pinned(cfg.model, 0.5 * T, T, cfg.x, cfg.y, bridge.mean);
    emit("densities", cfg, std::move(result));
    return kOk;
}

int validate_cmd(const ExperimentConfig& cfg) {
    const auto checks = run_invariant_suite(cfg);
    json table = json::array();
    bool all = true;
    std::cout << std::left;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS  " : "FAIL  ") << std::setw(52) << c.name << ' ' << c.detail << '\n';
        table.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        all = all && c.passed;
    }
    write_json(envelope("validate", cfg, {{"checks", table}, {"all_passed", all}}),
               cfg.out_dir / "validate.json");
    return all ? kOk : kAcceptance;
}

int oracle_compare_cmd(const ExperimentConfig& cfg) {
    if (cfg.model.n_modes() != 1) throw ConfigError("oracle-compare needs a 1-mode model");
    const Nonlinearity g(cfg.nonlinearity, cfg.model);
    if (!g.is_zero() && cfg.nonlinearity.space != NonlinearitySpace::spectral_componentwise) {
        throw ConfigError("oracle-compare needs a spectral-componentwise nonlinearity");
    }
    if (!cfg.model.has_invariant_measure()) throw ConfigError("oracle-compare needs alpha > 0");
    const double alpha = cfg.model.alpha(0);
    const double lambda = cfg.model.lambda(0);
    const double x0 = cfg.x[0];
    const auto scalar = [&](double u) { return g.scalar(u); };
    const MeshDensity fp = fokker_planck_1d(alpha, lambda, scalar, x0, cfg.horizon,
                                            {cfg.oracle_cells, cfg.oracle_steps, 8.0});
    write_mesh_csv(fp, cfg.out_dir / "fokker_planck.csv");

    // Second, independent oracle: histogram of semilinear endpoints.
    const std::size_t n_hist = std::max<std::size_t>(cfg.n_paths, 10000);
    const TimeGrid fine = TimeGrid::uniform(cfg.horizon, std::max<std::size_t>(cfg.steps, 200));
    const auto endpoints = simulate_semilinear_endpoints(cfg.model, g, cfg.x, fine,
                                                         RngStream(cfg.seed).split(1), {0, n_hist},
                                                         cfg.threads);
    const auto [lo, hi] = fp.central_interval(0.999);
    const HistogramDensity hist = mc_histogram_density(endpoints, cfg.bins, lo, hi);
    const ChiSquareResult chi = chi_square_test(hist, fp);

    const auto [a, b] = fp.central_interval(cfg.oracle_mass_fraction);
    const DensityEngine engine(cfg.model, g, cfg.horizon, cfg.density);
    json rows = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.oracle_points; ++i) {
        const double y0 = a + (b - a) * static_cast<double>(i) / static_cast<double>(cfg.oracle_points - 1);
        ModeVector y(1);
        y[0] = y0;
        const DensityEstimate d = engine.density(cfg.x, y, cfg.n_paths, RngStream(cfg.seed));
        const double nu = std::exp(log_invariant_density(cfg.model, y));
        const double lebesgue = d.value * nu;
        const double reference = fp(y0);
        const double rel = std::abs(lebesgue - reference) / reference;
        worst = std::max(worst, rel);
        rows.push_back({{"y", y0},
                        {"bridge_density", lebesgue},
                        {"bridge_std_error", d.std_error * nu},
                        {"fokker_planck", reference},
                        {"relative_error", rel},
                        {"n_samples", d.n_samples}});
    }
    const bool passed = worst <= 0.10 && chi.p_value >= 0.05;
    emit("oracle-compare", cfg,
         {{"points", rows},
          {"max_relative_error", worst},
          {"fokker_planck_mass", fp.mass},
          {"histogram_chi_square", {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}}},
          {"histogram_samples", n_hist},
          {"passed", passed}});
    return passed ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ornstein-Uhlenbeck bridge sampling and transition densities"};
    app.require_subcommand(1);
    Flags flags;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", flags.config, "experiment config (.json or .toml)");
        sub->add_option("--seed", flags.seed, "master RNG seed");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--strict-determinism", flags.strict,
                      "sequential reductions for bit-identical output");
        sub->add_option("--out-dir", flags.out_dir, "directory for JSON/CSV artifacts");
    };
    std::vector<std::pair<CLI::App*, std::string>> subs;
    const auto add = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub);
        subs.emplace_back(sub, name);
        return sub;
    };
    add("simulate-ou", "sample OU paths exactly");
    add("simulate-bridge", "sample bridges")
        ->add_option("--method", flags.method, "exact | sde")
        ->check(CLI::IsMember({"exact", "sde"}));
    add("simulate-semilinear", "simulate the semilinear equation");
    add("density", "estimate d(T, x, y) = h g k");
    add("h-weight", "estimate h (or E exp(q * exponent))")->add_option("--q", flags.q, "power q >= 0");
    add("pq-norm", "nested Monte Carlo ||P_T||_{p,q}");
    add("densities", "closed-form Gaussian factors");
    add("validate", "invariant suite with pass/fail table");
    add("oracle-compare", "1-mode comparison against Fokker-Planck");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        const ExperimentConfig cfg = load(flags);
        for (const auto& [sub, name] : subs) {
            if (!sub->parsed()) continue;
            if (name == "simulate-ou") return simulate_ou(cfg);
            if (name == "simulate-bridge") return simulate_bridge(cfg, flags.method);
            if (name == "simulate-semilinear") return simulate_semilinear_cmd(cfg);
            if (name == "density") return density_cmd(cfg);
            if (name == "h-weight") return h_weight_cmd(cfg, flags.q);
            if (name == "pq-norm") return pq_norm_cmd(cfg);
            if (name == "densities") return densities_cmd(cfg);
            if (name == "validate") return validate_cmd(cfg);
            if (name == "oracle-compare") return oracle_compare_cmd(cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kConfig;
}
