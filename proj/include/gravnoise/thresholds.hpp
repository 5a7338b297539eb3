#pragma once

// Per-experiment noise reports: rates from a kernel, the entangling
// thresholds of the three architectures, and the resulting verdicts.
//
// All quantities are "excess" rates evaluated from the dissipator at t = 0,
// never as a difference of two simulations. Only gravitational noise is
// modelled, so a measured rate is an upper bound on the gravitational one.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gravnoise/errors.hpp"
#include "gravnoise/gaussian_engine.hpp"
#include "gravnoise/hybrid_engine.hpp"
#include "gravnoise/kernel.hpp"
#include "gravnoise/models.hpp"
#include "gravnoise/qubit_engine.hpp"
#include "gravnoise/units.hpp"
#include "gravnoise/version.hpp"

namespace gravnoise {

enum class Architecture { oscillators, qubits, hybrid };

inline std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::oscillators: return "oscillators";
        case Architecture::qubits: return "qubits";
        case Architecture::hybrid: return "hybrid";
    }
    return "unknown";
}

inline Architecture architecture_from_string(const std::string& s) {
    if (s == "oscillators") return Architecture::oscillators;
    if (s == "qubits") return Architecture::qubits;
    if (s == "hybrid") return Architecture::hybrid;
    throw DomainError("unknown architecture '" + s + "' (expected oscillators, qubits or hybrid)");
}

/// For the hybrid architecture mass 1 is the oscillator (M, omega1) and mass
/// 2 the two-position particle (m).
struct ExperimentConfig {
    Architecture architecture = Architecture::oscillators;
    double m1 = 0.0;
    double m2 = 0.0;
    double d = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double delta_x = 0.0;

    void validate() const {
        detail::require_positive(m1, "m1");
        detail::require_positive(m2, "m2");
        detail::require_positive(d, "d");
        if (architecture != Architecture::qubits) detail::require_positive(omega1, "omega1");
        if (architecture == Architecture::oscillators) detail::require_positive(omega2, "omega2");
        if (architecture != Architecture::oscillators) detail::require_positive(delta_x, "delta_x");
    }
};

// ---------------------------------------------------------------------------
// Thresholds

/// 4 G m1 m2 hbar / d^3 in N^2/Hz.
inline double threshold_oscillators(double m1, double m2, double d) {
    return oscillator_threshold_sff(m1, m2, d);
}

/// Benchmark quoted in the literature for the two-qubit threshold:
/// 6 Hz at m = 10 fg, dx = 100 um, d = 1 mm.
struct QubitBenchmark {
    static constexpr double quoted_rate = 6.0;  // Hz
    static constexpr double m = 1e-17;
    static constexpr double delta_x = 1e-4;
    static constexpr double d = 1e-3;
};

struct QubitThreshold {
    double value = 0.0;              // G m1 m2 dx^2 / (hbar d^3) at the requested inputs
    double benchmark_quoted = QubitBenchmark::quoted_rate;
    double benchmark_si = 0.0;       // same formula at the benchmark inputs
    double benchmark_ratio = 0.0;    // quoted / SI
    bool benchmark_discrepancy = false;  // ratio outside [1/2, 2]
};

inline double qubit_threshold_rate(double m1, double m2, double d, double dx) {
    detail::require_non_negative(dx, "delta_x");
    return alpha_g(m1, m2, d) * dx * dx / hbar;
}

inline QubitThreshold threshold_qubits(double m1, double m2, double d, double dx) {
    QubitThreshold t;
    t.value = qubit_threshold_rate(m1, m2, d, dx);
    t.benchmark_si = qubit_threshold_rate(QubitBenchmark::m, QubitBenchmark::m, QubitBenchmark::d,
                                          QubitBenchmark::delta_x);
    t.benchmark_ratio = t.benchmark_quoted / t.benchmark_si;
    t.benchmark_discrepancy = t.benchmark_ratio > 2.0 || t.benchmark_ratio < 0.5;
    return t;
}

/// 2 G M m dx / (d^3 sqrt(2 M omega hbar)) in 1/s.
inline double threshold_hybrid(double M, double m, double d, double dx, double omega) {
    return 2.0 * hybrid_coupling(M, m, d, dx, omega);
}

// ---------------------------------------------------------------------------
// Reports

struct OscillatorSetup {
    OscillatorRates rates;
    OscillatorGeometry geometry;
};

/// Rates of two trapped masses at the shifted frequencies:
/// Gamma_a = (d<p_a^2>/dt) / (m_a omega_a hbar), Gamma12 = beta / sqrt(m1 omega1 m2 omega2).
inline OscillatorSetup make_oscillator_rates(const DissipationKernel& K, const ExperimentConfig& cfg,
                                             const QuadratureSpec& spec = {}) {
    OscillatorSetup out;
    const auto& geo = out.geometry = oscillator_geometry(cfg.m1, cfg.omega1, cfg.m2, cfg.omega2, cfg.d);
    auto& rates = out.rates;
    rates.gamma1 = momentum_diffusion(K, 1, spec) / (cfg.m1 * geo.omega1 * hbar);
    rates.gamma2 = momentum_diffusion(K, 2, spec) / (cfg.m2 * geo.omega2 * hbar);
    rates.gamma12 = K.beta(cfg.d) / std::sqrt(cfg.m1 * geo.omega1 * cfg.m2 * geo.omega2);
    rates.g = geo.g;
    rates.p0_ratio = std::sqrt(cfg.m1 * geo.omega1 / (cfg.m2 * geo.omega2));
    return out;
}

struct Verdicts {
    bool exact = false;
    bool conservative = false;
};

struct NoiseReport {
    std::string model;
    ExperimentConfig config;
    std::map<std::string, double> parameters;

    double sff1 = 0.0;       // d<p1^2>/dt, N^2/Hz
    double sff2 = 0.0;
    double sff_total = 0.0;  // sum over both masses
    double beta = 0.0;       // N/m at separation d

    /// Architecture rates in 1/s. Oscillators: heating Gamma_a and Gamma12;
    /// qubits: dephasing Gamma_a and beta dx^2/(4 hbar); hybrid: oscillator
    /// noise rate d<p1^2>/dt/(2 M omega hbar), atom dephasing, mixed term b.
    std::map<std::string, double> rates;
    std::map<std::string, double> thresholds;
    std::map<std::string, double> diagnostics;
    Verdicts verdicts;
    std::vector<std::string> flags;
    std::string confidence = "nominal";
    QuadratureSpec quadrature;
};

struct ReportOptions {
    QuadratureSpec quadrature = {};
    /// Basis size of the D_nm matrix for the hybrid perturbative eigenvalue;
    /// zero skips that computation.
    int hybrid_n_pert = 6;
};

inline NoiseReport noise_report(const DissipationKernel& K, const ExperimentConfig& cfg,
                                const ReportOptions& opt = {}) {
    cfg.validate();
    NoiseReport r;
    r.model = K.model;
    r.config = cfg;
    r.parameters = K.parameters;
    r.quadrature = opt.quadrature;
    r.flags = K.flags;
    const auto& spec = opt.quadrature;

    r.sff1 = momentum_diffusion(K, 1, spec);
    r.sff2 = momentum_diffusion(K, 2, spec);
    r.sff_total = r.sff1 + r.sff2;
    r.beta = K.beta(cfg.d);
    r.thresholds["alpha_G"] = alpha_g(cfg.m1, cfg.m2, cfg.d);

    if (cfg.architecture != Architecture::oscillators && cfg.delta_x >= cfg.d) {
        r.flags.push_back("small_displacement_regime_violated_delta_x>=d");
        r.confidence = "reduced";
    }

    switch (cfg.architecture) {
        case Architecture::oscillators: {
            const auto [rates, geo] = make_oscillator_rates(K, cfg, spec);
            if (!rates.positivity_holds(1e-9)) {
                r.flags.push_back("positivity_bound_violated_Gamma12^2>Gamma1*Gamma2");
                r.confidence = "reduced";
            }
            const auto v = detail::oscillator_verdict(rates);
            r.verdicts = {v.exact, v.conservative};
            r.rates = {{"gamma1", rates.gamma1}, {"gamma2", rates.gamma2}, {"gamma12", rates.gamma12},
                       {"g", rates.g}};
            r.thresholds["sff_total"] = threshold_oscillators(cfg.m1, cfg.m2, cfg.d);
            r.thresholds["acceleration_asd_mass1"] =
                force_noise_to_acceleration_asd(r.thresholds["sff_total"], cfg.m1);
            r.diagnostics["onset_rate"] = onset_rate(rates);
            r.diagnostics["omega1_shifted"] = geo.omega1;
            r.diagnostics["omega2_shifted"] = geo.omega2;
            r.diagnostics["momentum_form_verdict"] = v.momentum_form ? 1.0 : 0.0;
            break;
        }
        case Architecture::qubits: {
            const auto rates = make_qubit_rates(K, cfg.m1, cfg.m2, cfg.d, cfg.delta_x, spec);
            if (!rates.positivity_holds(1e-9)) {
                r.flags.push_back("positivity_bound_violated_16Gamma1Gamma2<beta^2dx^4/hbar^2");
                r.confidence = "reduced";
            }
            const auto v = detail::qubit_verdict(rates);
            r.verdicts = {v.exact, v.conservative};
            r.rates = {{"gamma1", rates.gamma1}, {"gamma2", rates.gamma2},
                       {"beta_term", rates.beta_term}, {"coupling", rates.coupling}};
            const auto t = threshold_qubits(cfg.m1, cfg.m2, cfg.d, cfg.delta_x);
            r.thresholds["gamma_total"] = t.value;
            r.thresholds["benchmark_quoted_hz"] = t.benchmark_quoted;
            r.thresholds["benchmark_si_hz"] = t.benchmark_si;
            r.thresholds["benchmark_ratio"] = t.benchmark_ratio;
            if (t.benchmark_discrepancy) r.flags.push_back("qubit_benchmark_discrepancy_quoted_vs_si");
            r.diagnostics["negativity_rate"] = negativity_rate(rates);
            r.flags.push_back("qubit_kinetic_terms_dropped_heavy_mass_regime");
            break;
        }
        case Architecture::hybrid: {
            const auto p = make_hybrid_params(K, cfg.m1, cfg.omega1, cfg.m2, cfg.d, cfg.delta_x, spec);
            const auto v = hybrid_entangling(p, spec);
            r.verdicts = {v.sufficient, v.sufficient};
            r.rates = {{"oscillator_noise", v.oscillator_noise_rate}, {"gamma2", p.gamma2},
                       {"beta_term", p.beta_term}, {"g", p.g}};
            r.thresholds["rate"] = v.threshold_si;
            if (opt.hybrid_n_pert >= 2) {
                const auto D = dnm_matrix(K, cfg.m1, cfg.omega1, opt.hybrid_n_pert, spec);
                try {
                    const auto sol = lambda1_solve(p.gamma2, p.g, p.beta_term, D);
                    r.diagnostics["lambda1_negative"] = sol.negative.value;
                    r.diagnostics["lambda1_positive"] = sol.positive.value;
                    r.diagnostics["lambda1_matrix_min_eig"] = sol.matrix_min_eig;
                    r.verdicts.exact = sol.matrix_min_eig < 0.0;
                    if (!sol.positive.converged) r.flags.push_back("lambda1_positive_branch_not_converged");
                } catch (const NumericError&) {
                    r.flags.push_back("lambda1_negative_branch_not_converged");
                }
            }
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"architecture", to_string(c.architecture)}, {"m1", c.m1}, {"m2", c.m2}, {"d", c.d},
            {"omega1", c.omega1}, {"omega2", c.omega2}, {"delta_x", c.delta_x}};
}

inline nlohmann::json provenance_json(const QuadratureSpec& q) {
    return {{"quadrature", {{"rel_tol", q.rel_tol}, {"abs_tol", q.abs_tol},
                            {"max_subdivisions", q.max_subdivisions}, {"k_max", q.k_max}}},
            {"code_version", version}};
}

/// Schema: {model, config, rates{}, thresholds{}, verdicts{}, flags[], provenance{}}.
inline nlohmann::json to_json(const NoiseReport& r) {
    nlohmann::json j;
    j["model"] = {{"name", r.model}, {"parameters", r.parameters}};
    j["config"] = to_json(r.config);
    j["noise"] = {{"sff_mass1", r.sff1}, {"sff_mass2", r.sff2}, {"sff_total", r.sff_total}, {"beta", r.beta}};
    j["rates"] = r.rates;
    j["thresholds"] = r.thresholds;
    j["diagnostics"] = r.diagnostics;
    j["verdicts"] = {{"exact", r.verdicts.exact}, {"conservative", r.verdicts.conservative}};
    j["flags"] = r.flags;
    j["confidence"] = r.confidence;
    j["provenance"] = provenance_json(r.quadrature);
    return j;
}

}  // namespace gravnoise
