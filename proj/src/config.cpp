#include "oubridge/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "oubridge/errors.hpp"

namespace oubridge {

using nlohmann::json;

namespace {

/// Reads typed keys from one object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& tree, std::string name) : name_(std::move(name)) {
        if (tree.is_null()) {
            node_ = json::object();
        } else if (!tree.is_object()) {
            throw ConfigError("'" + name_ + "' must be a table");
        } else {
            node_ = tree;
        }
    }

    bool has(const std::string& key) {
        known_.insert(key);
        return node_.contains(key);
    }
    const json& raw(const std::string& key) {
        known_.insert(key);
        return node_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number()) fail(key, "must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }
    std::size_t count(const std::string& key, std::size_t fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "must be a non-negative integer");
        return v.get<std::size_t>();
    }
    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_boolean()) fail(key, "must be true or false");
        return v.get<bool>();
    }
    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(name_ + "." + key + " " + what);
    }

    void finish() const {
        for (const auto& item : node_.items()) {
            if (!known_.count(item.key())) {
                throw ConfigError("unknown key '" + name_ + "." + item.key() + "'");
            }
        }
    }

private:
    json node_;
    std::string name_;
    std::set<std::string> known_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<double> to_std(const ModeVector& v) { return {v.data(), v.data() + v.size()}; }

ModeVector from_std(const std::vector<double>& v) {
    return Eigen::Map<const ModeVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json read_config_tree(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    const std::string ext = path.extension().string();
    try {
        if (ext == ".toml") {
            const toml::table table = toml::parse(in, path.string());
            std::ostringstream as_json;
            as_json << toml::json_formatter{table};
            return json::parse(as_json.str());
        }
        return json::parse(in);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << path.string() << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(msg.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

ModeVector endpoint_preset(const std::string& name, std::size_t n_modes) {
    ModeVector v(static_cast<Eigen::Index>(n_modes));
    for (std::size_t i = 0; i < n_modes; ++i) {
        const double n = static_cast<double>(i + 1);
        double value = 0.0;
        if (name == "zero") {
            value = 0.0;
        } else if (name == "ones") {
            value = 1.0;
        } else if (name == "smooth") {
            value = 1.0 / (n * n);
        } else if (name == "rough") {
            value = 1.0 / std::sqrt(n);
        } else {
            throw ConfigError("unknown endpoint preset '" + name + "'");
        }
        v[static_cast<Eigen::Index>(i)] = value;
    }
    return v;
}

ExperimentConfig resolve_config(const json& tree, const std::filesystem::path& base_dir) {
    if (!tree.is_object()) throw ConfigError("config root must be a table");
    Section root(tree, "config");
    ExperimentConfig cfg;
    json resolved;

    // model
    {
        Section s(root.has("model") ? root.raw("model") : json(), "model");
        const std::size_t n_modes = s.count("n_modes", 8);
        if (n_modes == 0) s.fail("n_modes", "must be positive");
        std::vector<double> lambda(n_modes, 1.0);
        if (s.has("lambda")) {
            const json& l = s.raw("lambda");
            if (l.is_number()) {
                lambda.assign(n_modes, l.get<double>());
            } else {
                lambda = number_list(l, "model.lambda");
                if (lambda.size() != n_modes) s.fail("lambda", "needs one entry per mode");
            }
        }
        std::string basis_name = s.text("basis", "");
        std::vector<double> alpha;
        std::string spectrum_name = "heat";
        if (s.has("spectrum")) {
            const json& sp = s.raw("spectrum");
            if (sp.is_string()) {
                spectrum_name = sp.get<std::string>();
                if (spectrum_name != "heat") s.fail("spectrum", "must be \"heat\" or {alpha = [...]}");
            } else {
                Section sa(sp, "model.spectrum");
                if (!sa.has("alpha")) sa.fail("alpha", "is required");
                alpha = number_list(sa.raw("alpha"), "model.spectrum.alpha");
                sa.finish();
                if (alpha.size() != n_modes) s.fail("spectrum", "alpha needs one entry per mode");
                spectrum_name.clear();
            }
        }
        if (spectrum_name == "heat") {
            for (std::size_t n = 1; n <= n_modes; ++n) {
                alpha.push_back(std::pow(static_cast<double>(n) * std::numbers::pi, 2));
            }
            if (basis_name.empty()) basis_name = "dirichlet-sine";
        }
        if (basis_name.empty()) basis_name = "abstract";
        Basis basis = Basis::abstract;
        if (basis_name == "dirichlet-sine") {
            basis = Basis::dirichlet_sine;
        } else if (basis_name == "abstract") {
            basis = Basis::abstract;
        } else {
            s.fail("basis", "must be \"dirichlet-sine\" or \"abstract\"");
        }
        s.finish();
        try {
            cfg.model = SpectralModel(alpha, lambda, basis);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
        resolved["model"] = {{"n_modes", n_modes}, {"lambda", lambda}, {"basis", basis_name}};
        if (spectrum_name == "heat") {
            resolved["model"]["spectrum"] = "heat";
        } else {
            resolved["model"]["spectrum"] = {{"alpha", alpha}};
        }
    }

    // grid
    {
        Section s(root.has("grid") ? root.raw("grid") : json(), "grid");
        cfg.horizon = s.number("T", 0.3);
        if (!(cfg.horizon > 0.0)) s.fail("T", "must be positive");
        cfg.steps = s.count("steps", 300);
        if (cfg.steps == 0) s.fail("steps", "must be positive");
        cfg.density.dt_max = s.number("dt_max", 1e-2);
        cfg.density.refinement = s.number("refinement", 0.05);
        cfg.density.epsilon = s.number("epsilon", 1e-7);
        if (!(cfg.density.dt_max > 0.0)) s.fail("dt_max", "must be positive");
        if (!(cfg.density.refinement > 0.0 && cfg.density.refinement <= 1.0)) {
            s.fail("refinement", "must lie in (0, 1]");
        }
        if (!(cfg.density.epsilon > 0.0 && cfg.density.epsilon < cfg.horizon)) {
            s.fail("epsilon", "must lie in (0, T)");
        }
        s.finish();
        resolved["grid"] = {{"T", cfg.horizon},
                            {"steps", cfg.steps},
                            {"dt_max", cfg.density.dt_max},
                            {"refinement", cfg.density.refinement},
                            {"epsilon", cfg.density.epsilon}};
    }

    // nonlinearity
    {
        Section s(root.has("nonlinearity") ? root.raw("nonlinearity") : json(), "nonlinearity");
        cfg.nonlinearity.kind = parse_nonlinearity_kind(s.text("kind", "zero"));
        cfg.nonlinearity.amplitude =
            s.number("amplitude", cfg.nonlinearity.kind == NonlinearityKind::custom_table ? 1.0 : 0.5);
        cfg.nonlinearity.space = parse_nonlinearity_space(s.text(
            "space", cfg.model.basis() == Basis::dirichlet_sine ? "physical-pointwise"
                                                                : "spectral-componentwise"));
        cfg.nonlinearity.active_modes = s.count("active_modes", 0);
        std::string table_path;
        if (cfg.nonlinearity.kind == NonlinearityKind::custom_table) {
            if (!s.has("table")) s.fail("table", "is required for kind custom-table");
            std::filesystem::path p = s.text("table", "");
            if (p.is_relative()) p = base_dir / p;
            cfg.nonlinearity.table = std::make_shared<const ScalarTable>(ScalarTable::load_csv(p));
            table_path = p.string();
        } else if (s.has("table")) {
            s.fail("table", "is only valid for kind custom-table");
        }
        s.finish();
        // Surfaces basis/space mismatches now rather than mid-run.
        (void)Nonlinearity(cfg.nonlinearity, cfg.model);
        resolved["nonlinearity"] = {{"kind", to_string(cfg.nonlinearity.kind)},
                                    {"amplitude", cfg.nonlinearity.amplitude},
                                    {"space", to_string(cfg.nonlinearity.space)},
                                    {"active_modes", cfg.nonlinearity.active_modes}};
        if (!table_path.empty()) resolved["nonlinearity"]["table"] = table_path;
    }

    // endpoints
    {
        Section s(root.has("endpoints") ? root.raw("endpoints") : json(), "endpoints");
        const std::size_t n = cfg.model.n_modes();
        const auto vector_or_preset = [&](const std::string& key, const std::string& fallback,
                                          bool allow_mean) -> ModeVector {
            if (s.has(key) && s.raw(key).is_array()) {
                auto v = number_list(s.raw(key), "endpoints." + key);
                if (v.size() != n) s.fail(key, "needs one entry per mode");
                return from_std(v);
            }
            const std::string name = s.text(key, fallback);
            if (name == "mean") {
                if (!allow_mean) s.fail(key, "preset \"mean\" is only valid for y");
                ModeVector y(cfg.x.size());
                for (Eigen::Index i = 0; i < y.size(); ++i) {
                    y[i] = semigroup_factor(cfg.model, cfg.horizon, static_cast<std::size_t>(i)) * cfg.x[i];
                }
                return y;
            }
            return endpoint_preset(name, n);
        };
        cfg.x = vector_or_preset("x", "smooth", false);
        cfg.y = vector_or_preset("y", "mean", true);
        s.finish();
        resolved["endpoints"] = {{"x", to_std(cfg.x)}, {"y", to_std(cfg.y)}};
    }

    // budget
    {
        Section s(root.has("budget") ? root.raw("budget") : json(), "budget");
        cfg.n_paths = s.count("n_paths", 10000);
        cfg.n_x = s.count("n_x", 16);
        cfg.n_y = s.count("n_y", 16);
        cfg.n_outer = s.count("n_outer", 1000);
        cfg.bins = s.count("bins", 60);
        cfg.p = s.number("p", 2.0);
        cfg.q = s.number("q", 2.0);
        if (cfg.n_paths < 2) s.fail("n_paths", "must be at least 2");
        if (cfg.bins == 0) s.fail("bins", "must be positive");
        s.finish();
        resolved["budget"] = {{"n_paths", cfg.n_paths}, {"n_x", cfg.n_x},   {"n_y", cfg.n_y},
                              {"n_outer", cfg.n_outer}, {"bins", cfg.bins}, {"p", cfg.p},
                              {"q", cfg.q}};
    }

    // oracle
    {
        Section s(root.has("oracle") ? root.raw("oracle") : json(), "oracle");
        cfg.oracle_cells = s.count("cells", 2000);
        cfg.oracle_steps = s.count("steps", 2000);
        cfg.oracle_points = s.count("points", 21);
        cfg.oracle_mass_fraction = s.number("mass_fraction", 0.8);
        if (cfg.oracle_points < 2) s.fail("points", "must be at least 2");
        if (!(cfg.oracle_mass_fraction > 0.0 && cfg.oracle_mass_fraction < 1.0)) {
            s.fail("mass_fraction", "must lie in (0, 1)");
        }
        s.finish();
        resolved["oracle"] = {{"cells", cfg.oracle_cells},
                              {"steps", cfg.oracle_steps},
                              {"points", cfg.oracle_points},
                              {"mass_fraction", cfg.oracle_mass_fraction}};
    }

    // output
    {
        Section s(root.has("output") ? root.raw("output") : json(), "output");
        cfg.out_dir = s.text("dir", "out");
        cfg.dump_paths = s.flag("dump_paths", false);
        cfg.max_dump_paths = s.count("max_dump_paths", 100);
        cfg.log_weights = s.flag("log_weights", false);
        s.finish();
        resolved["output"] = {{"dir", cfg.out_dir.string()},
                              {"dump_paths", cfg.dump_paths},
                              {"max_dump_paths", cfg.max_dump_paths},
                              {"log_weights", cfg.log_weights}};
    }

    if (root.has("seed")) {
        const json& v = root.raw("seed");
        if (!v.is_number_integer()) root.fail("seed", "must be an integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    cfg.threads = static_cast<unsigned>(root.count("threads", 1));
    if (cfg.threads == 0) root.fail("threads", "must be positive");
    cfg.strict_determinism = root.flag("strict_determinism", false);
    root.finish();
    cfg.density.threads = cfg.threads;
    resolved["seed"] = cfg.seed;
    resolved["threads"] = cfg.threads;
    resolved["strict_determinism"] = cfg.strict_determinism;
    cfg.resolved = std::move(resolved);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return resolve_config(read_config_tree(path), path.parent_path().empty() ? "." : path.parent_path());
}

std::string content_hash(const json& tree) {
    const std::string text = tree.dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace oubridge
