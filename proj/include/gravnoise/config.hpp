#pragma once

// TOML run configuration: model, experiment, quadrature, output, scan and
// evolve sections. Every failure is a ConfigError naming the key path.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "gravnoise/errors.hpp"
#include "gravnoise/kernel.hpp"
#include "gravnoise/models.hpp"
#include "gravnoise/quadrature.hpp"
#include "gravnoise/scanner.hpp"
#include "gravnoise/thresholds.hpp"

namespace gravnoise {

struct ModelConfig {
    std::string name;  // cq | graviton | entropic_nonlocal | entropic_local | custom
    CQParams cq;
    EntropicNonlocalParams nonlocal;
    bool nonlocal_T_given = false;
    EntropicLocalParams local;
    bool enforce_constraints = true;
    std::vector<double> custom_k, custom_f1, custom_f2;
    double custom_beta = 0.0;
};

struct EvolveConfig {
    double t_final = 0.0;  // 0 picks a default from the rates
    double dt = 0.0;
    int n_max = 30;
    int quad_nodes = 32;
    int n_pert = 6;
};

struct OutputConfig {
    std::optional<std::string> path;
    std::optional<std::string> format;
};

struct RunConfig {
    std::optional<ModelConfig> model;
    std::optional<ExperimentConfig> experiment;
    QuadratureSpec quadrature;
    OutputConfig output;
    std::optional<ScanSpec> scan;
    EvolveConfig evolve;
    std::uint64_t seed = 0;
    std::string source_text;  // raw config, hashed into the provenance block
};

namespace detail {

class TableReader {
public:
    TableReader(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return t_.contains(key); }

    double number(const std::string& key) const {
        auto v = optional_number(key);
        if (!v) throw ConfigError(field(key), "missing required number");
        return *v;
    }

    std::optional<double> optional_number(const std::string& key) const {
        const auto* node = t_.get(key);
        if (!node) return std::nullopt;
        if (auto f = node->value<double>()) return *f;  // integers convert too
        throw ConfigError(field(key), "expected a number");
    }

    double number_or(const std::string& key, double fallback) const {
        return optional_number(key).value_or(fallback);
    }

    int integer_or(const std::string& key, int fallback) const {
        const auto* node = t_.get(key);
        if (!node) return fallback;
        if (auto i = node->value_exact<std::int64_t>()) return static_cast<int>(*i);
        throw ConfigError(field(key), "expected an integer");
    }

    bool boolean_or(const std::string& key, bool fallback) const {
        const auto* node = t_.get(key);
        if (!node) return fallback;
        if (auto b = node->value_exact<bool>()) return *b;
        throw ConfigError(field(key), "expected a boolean");
    }

    std::optional<std::string> optional_string(const std::string& key) const {
        const auto* node = t_.get(key);
        if (!node) return std::nullopt;
        if (auto s = node->value_exact<std::string>()) return *s;
        throw ConfigError(field(key), "expected a string");
    }

    std::string string(const std::string& key) const {
        auto s = optional_string(key);
        if (!s) throw ConfigError(field(key), "missing required string");
        return *s;
    }

    std::vector<double> numbers(const std::string& key) const {
        const auto* arr = t_.get_as<toml::array>(key);
        if (!arr) throw ConfigError(field(key), "missing required array of numbers");
        std::vector<double> out;
        for (const auto& el : *arr) {
            auto v = el.value<double>();
            if (!v) throw ConfigError(field(key), "array must contain only numbers");
            out.push_back(*v);
        }
        return out;
    }

    const toml::table* sub(const std::string& key) const {
        const auto* node = t_.get(key);
        if (!node) return nullptr;
        if (const auto* t = node->as_table()) return t;
        throw ConfigError(field(key), "expected a table");
    }

    void reject_unknown(std::initializer_list<const char*> allowed) const {
        for (const auto& [k, _] : t_) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || k.str() == a;
            if (!ok) throw ConfigError(field(std::string(k.str())), "unknown key");
        }
    }

private:
    const toml::table& t_;
    std::string path_;
};

inline ModelConfig parse_model(const TableReader& r) {
    ModelConfig m;
    m.name = r.string("name");
    m.enforce_constraints = r.boolean_or("enforce_constraints", true);
    if (m.name == "cq") {
        r.reject_unknown({"name", "enforce_constraints", "D0", "D2", "ell", "m_phi"});
        m.cq = {r.number("D0"), r.number("D2"), r.number("ell"), r.number_or("m_phi", 0.0)};
    } else if (m.name == "graviton") {
        r.reject_unknown({"name", "enforce_constraints"});
    } else if (m.name == "entropic_nonlocal") {
        r.reject_unknown({"name", "enforce_constraints", "lambda", "ell2", "zeta", "T"});
        m.nonlocal.lambda_len = r.number("lambda");
        m.nonlocal.ell2 = r.number("ell2");
        m.nonlocal.zeta = r.number("zeta");
        if (auto T = r.optional_number("T")) {
            m.nonlocal.T = *T;
            m.nonlocal_T_given = true;
        }
    } else if (m.name == "entropic_local") {
        r.reject_unknown({"name", "enforce_constraints", "a", "T", "sigma_star", "gamma_th", "L"});
        const double a = r.number("a"), T = r.number("T");
        const double sigma = r.number("sigma_star"), gamma = r.number("gamma_th");
        try {
            m.local = EntropicLocalParams::constrained(a, T, sigma, gamma);
        } catch (const DomainError& e) {
            throw ConfigError(r.field("sigma_star"), e.what());
        }
        if (auto L = r.optional_number("L")) m.local.L = *L;
    } else if (m.name == "custom") {
        r.reject_unknown({"name", "enforce_constraints", "k", "f1", "f2", "beta"});
        m.custom_k = r.numbers("k");
        m.custom_f1 = r.numbers("f1");
        m.custom_f2 = r.numbers("f2");
        m.custom_beta = r.number("beta");
    } else {
        throw ConfigError(r.field("name"),
                          "unknown model '" + m.name +
                              "' (expected cq, graviton, entropic_nonlocal, entropic_local or custom)");
    }
    return m;
}

inline ExperimentConfig parse_experiment(const TableReader& r) {
    r.reject_unknown({"architecture", "m1", "m2", "d", "omega1", "omega2", "delta_x"});
    ExperimentConfig e;
    const auto arch = r.string("architecture");
    try {
        e.architecture = architecture_from_string(arch);
    } catch (const DomainError& err) {
        throw ConfigError(r.field("architecture"), err.what());
    }
    e.m1 = r.number("m1");
    e.m2 = r.number("m2");
    e.d = r.number("d");
    if (e.architecture != Architecture::qubits) e.omega1 = r.number("omega1");
    else e.omega1 = r.number_or("omega1", 0.0);
    if (e.architecture == Architecture::oscillators) e.omega2 = r.number("omega2");
    else e.omega2 = r.number_or("omega2", 0.0);
    if (e.architecture != Architecture::oscillators) e.delta_x = r.number("delta_x");
    else e.delta_x = r.number_or("delta_x", 0.0);
    for (const char* key : {"m1", "m2", "d"})
        if (!(r.number(key) > 0.0)) throw ConfigError(r.field(key), "must be positive");
    return e;
}

inline ScanSpec parse_scan(const TableReader& r) {
    r.reject_unknown({"d0_min", "d0_max", "d2_min", "d2_max", "n_d0", "n_d2", "ell", "mass",
                      "rho_solid", "measured_asd", "threshold_asd"});
    ScanSpec s;
    s.d0 = {r.number_or("d0_min", s.d0.min), r.number_or("d0_max", s.d0.max), r.integer_or("n_d0", s.d0.n)};
    s.d2 = {r.number_or("d2_min", s.d2.min), r.number_or("d2_max", s.d2.max), r.integer_or("n_d2", s.d2.n)};
    s.detector.ell = r.number_or("ell", s.detector.ell);
    s.detector.mass = r.optional_number("mass");
    s.detector.rho_solid = r.number_or("rho_solid", s.detector.rho_solid);
    s.detector.measured_asd = r.number_or("measured_asd", s.detector.measured_asd);
    s.detector.threshold_asd = r.number_or("threshold_asd", s.detector.threshold_asd);
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw ConfigError("scan", e.what());
    }
    return s;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& source_name = "config") {
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError("", msg.str());
    }
    detail::TableReader top(root, "");
    top.reject_unknown({"model", "experiment", "quadrature", "output", "scan", "evolve", "seed"});

    RunConfig cfg;
    cfg.source_text = text;
    if (const auto* t = top.sub("model")) cfg.model = detail::parse_model({*t, "model"});
    if (const auto* t = top.sub("experiment")) cfg.experiment = detail::parse_experiment({*t, "experiment"});
    if (const auto* t = top.sub("quadrature")) {
        detail::TableReader r(*t, "quadrature");
        r.reject_unknown({"rel_tol", "abs_tol", "max_subdivisions", "k_max"});
        cfg.quadrature.rel_tol = r.number_or("rel_tol", cfg.quadrature.rel_tol);
        cfg.quadrature.abs_tol = r.number_or("abs_tol", cfg.quadrature.abs_tol);
        cfg.quadrature.max_subdivisions = r.integer_or("max_subdivisions", cfg.quadrature.max_subdivisions);
        cfg.quadrature.k_max = r.number_or("k_max", cfg.quadrature.k_max);
        try {
            cfg.quadrature.validate();
        } catch (const DomainError& e) {
            throw ConfigError("quadrature", e.what());
        }
    }
    if (const auto* t = top.sub("output")) {
        detail::TableReader r(*t, "output");
        r.reject_unknown({"path", "format"});
        cfg.output.path = r.optional_string("path");
        cfg.output.format = r.optional_string("format");
        if (cfg.output.format && *cfg.output.format != "json" && *cfg.output.format != "csv")
            throw ConfigError("output.format", "expected json or csv");
    }
    if (const auto* t = top.sub("scan")) cfg.scan = detail::parse_scan({*t, "scan"});
    if (const auto* t = top.sub("evolve")) {
        detail::TableReader r(*t, "evolve");
        r.reject_unknown({"t_final", "dt", "n_max", "quad_nodes", "n_pert"});
        cfg.evolve.t_final = r.number_or("t_final", 0.0);
        cfg.evolve.dt = r.number_or("dt", 0.0);
        cfg.evolve.n_max = r.integer_or("n_max", cfg.evolve.n_max);
        cfg.evolve.quad_nodes = r.integer_or("quad_nodes", cfg.evolve.quad_nodes);
        cfg.evolve.n_pert = r.integer_or("n_pert", cfg.evolve.n_pert);
        if (cfg.evolve.t_final < 0.0) throw ConfigError("evolve.t_final", "must be non-negative");
        if (cfg.evolve.dt < 0.0) throw ConfigError("evolve.dt", "must be non-negative");
        if (cfg.evolve.n_max < 2) throw ConfigError("evolve.n_max", "must be at least 2");
        if (cfg.evolve.quad_nodes < 8) throw ConfigError("evolve.quad_nodes", "must be at least 8");
    }
    if (const auto* node = root.get("seed")) {
        auto s = node->value_exact<std::int64_t>();
        if (!s || *s < 0) throw ConfigError("seed", "expected a non-negative integer");
        cfg.seed = static_cast<std::uint64_t>(*s);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

/// Build the model's kernel for the configured experiment. Kernels whose
/// correlated term depends on the separation need the experiment.
inline DissipationKernel build_kernel(const ModelConfig& m, const ExperimentConfig& e) {
    const auto policy = m.enforce_constraints ? ConstraintPolicy::enforce : ConstraintPolicy::ignore;
    try {
        if (m.name == "cq") return cq_kernel(m.cq, e.m1, e.m2);
        if (m.name == "graviton") return graviton_kernel();
        if (m.name == "entropic_nonlocal") {
            auto p = m.nonlocal;
            if (!m.nonlocal_T_given) p.T = EntropicNonlocalParams::constrained_T(p.ell2, e.m1, e.m2);
            return entropic_nonlocal_kernel(p, e.m1, e.m2, e.d, policy);
        }
        if (m.name == "entropic_local") return entropic_local_kernel(m.local, e.m1, e.m2, e.d, policy);
        if (m.name == "custom") return custom_kernel(m.custom_k, m.custom_f1, m.custom_f2, m.custom_beta);
    } catch (const DomainError& err) {
        throw ConfigError("model", err.what());
    }
    throw ConfigError("model.name", "unknown model '" + m.name + "'");
}

}  // namespace gravnoise
