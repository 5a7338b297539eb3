#pragma once

// Command-line front end. `run` is the whole program minus main(), so tests
// can drive it with in-memory streams.
//
// Exit codes: 0 ok, 2 configuration or input error, 3 numerical failure
// (including a failed validation suite), 4 I/O error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gravnoise/config.hpp"
#include "gravnoise/errors.hpp"
#include "gravnoise/gaussian_engine.hpp"
#include "gravnoise/hybrid_engine.hpp"
#include "gravnoise/models.hpp"
#include "gravnoise/qubit_engine.hpp"
#include "gravnoise/scanner.hpp"
#include "gravnoise/thresholds.hpp"
#include "gravnoise/validation.hpp"
#include "gravnoise/version.hpp"

namespace gravnoise::cli {

enum ExitCode : int { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Invocation {
    std::string command;
    std::string config_path;
    std::optional<std::string> out_path;
    std::string format;  // resolved: json | csv
    bool trace = false;
    std::uint64_t seed = 0;
    RunConfig config;
};

inline nlohmann::json provenance(const Invocation& inv) {
    auto j = provenance_json(inv.config.quadrature);
    j["command"] = inv.command;
    j["config_hash"] = "fnv1a64:" + hex64(fnv1a64(inv.config.source_text));
    j["seed"] = inv.seed;
    return j;
}

inline std::vector<std::string> provenance_lines(const Invocation& inv) {
    const auto& q = inv.config.quadrature;
    return {"gravnoise " + std::string(version) + " " + inv.command,
            "config_hash=fnv1a64:" + hex64(fnv1a64(inv.config.source_text)),
            "seed=" + std::to_string(inv.seed),
            "quadrature rel_tol=" + format_sci(q.rel_tol) + " abs_tol=" + format_sci(q.abs_tol) +
                " max_subdivisions=" + std::to_string(q.max_subdivisions)};
}

/// Flattens a JSON object into key,value CSV rows ("a.b,1.0e+00").
inline void flatten_csv(const nlohmann::json& j, const std::string& prefix, std::ostream& os) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten_csv(v, prefix.empty() ? k : prefix + "." + k, os);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten_csv(j[i], prefix + "." + std::to_string(i), os);
    } else if (j.is_number_float()) {
        os << prefix << ',' << format_sci(j.get<double>()) << '\n';
    } else if (j.is_string()) {
        os << prefix << ',' << j.get<std::string>() << '\n';
    } else {
        os << prefix << ',' << j.dump() << '\n';
    }
}

inline std::string render(const Invocation& inv, nlohmann::json body) {
    std::ostringstream os;
    if (inv.format == "json") {
        body["provenance"] = provenance(inv);
        os << body.dump(2) << '\n';
    } else {
        for (const auto& l : provenance_lines(inv)) os << "# " << l << '\n';
        os << "key,value\n";
        flatten_csv(body, "", os);
    }
    return os.str();
}

struct TraceTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_sci(r[i]);
            os << '\n';
        }
    }
    nlohmann::json to_json() const { return {{"columns", columns}, {"rows", rows}}; }
};

inline const ModelConfig& require_model(const RunConfig& c) {
    if (!c.model) throw ConfigError("model", "section is required for this command");
    return *c.model;
}

inline const ExperimentConfig& require_experiment(const RunConfig& c) {
    if (!c.experiment) throw ConfigError("experiment", "section is required for this command");
    return *c.experiment;
}

// ---------------------------------------------------------------------------
// Commands

inline std::string cmd_threshold(const Invocation& inv) {
    const auto& e = require_experiment(inv.config);
    nlohmann::json j;
    j["config"] = to_json(e);
    switch (e.architecture) {
        case Architecture::oscillators: {
            const double s = threshold_oscillators(e.m1, e.m2, e.d);
            j["threshold"] = {{"sff_total_N2_per_Hz", s},
                              {"acceleration_asd_mass1", force_noise_to_acceleration_asd(s, e.m1)},
                              {"acceleration_asd_mass2", force_noise_to_acceleration_asd(s, e.m2)}};
            break;
        }
        case Architecture::qubits: {
            const auto t = threshold_qubits(e.m1, e.m2, e.d, e.delta_x);
            j["threshold"] = {{"decoherence_rate_total_hz", t.value},
                              {"benchmark_quoted_hz", t.benchmark_quoted},
                              {"benchmark_si_hz", t.benchmark_si},
                              {"benchmark_ratio", t.benchmark_ratio},
                              {"benchmark_discrepancy", t.benchmark_discrepancy}};
            break;
        }
        case Architecture::hybrid:
            j["threshold"] = {{"rate_hz", threshold_hybrid(e.m1, e.m2, e.d, e.delta_x, e.omega1)}};
            break;
    }
    return render(inv, j);
}

inline std::string cmd_noise(const Invocation& inv) {
    const auto& e = require_experiment(inv.config);
    const auto K = build_kernel(require_model(inv.config), e);
    ReportOptions opt;
    opt.quadrature = inv.config.quadrature;
    opt.hybrid_n_pert = inv.config.evolve.n_pert;
    auto j = to_json(noise_report(K, e, opt));
    j.erase("provenance");
    return render(inv, j);
}

inline constexpr double max_evolve_steps = 2e6;

inline void check_step_budget(double t_final, double dt) {
    if (t_final / dt > max_evolve_steps)
        throw ConfigError("evolve.t_final", "needs more than 2e6 steps; shorten t_final or raise dt");
}

inline std::string finish_evolve(const Invocation& inv, nlohmann::json summary, const TraceTable& trace) {
    if (inv.trace && inv.format == "csv") {
        std::ostringstream os;
        for (const auto& l : provenance_lines(inv)) os << "# " << l << '\n';
        trace.write_csv(os);
        return os.str();
    }
    if (inv.trace) summary["trace"] = trace.to_json();
    return render(inv, summary);
}

inline std::string evolve_oscillators(const Invocation& inv, const DissipationKernel& K,
                                      const ExperimentConfig& e) {
    const auto& ev = inv.config.evolve;
    const auto [rates, geo] = make_oscillator_rates(K, e, inv.config.quadrature);
    const Mat4 x = build_drift_from_rates(geo.omega1, geo.omega2, geo.g);
    const Mat4 y = build_diffusion(rates);
    const double dt = ev.dt > 0.0 ? ev.dt : 0.05 / x.norm();
    const double t_final = ev.t_final > 0.0 ? ev.t_final : 20.0 * pi / std::max(geo.omega1, geo.omega2);
    check_step_budget(t_final, dt);

    TraceTable tt;
    tt.columns = {"t"};
    for (int i = 0; i < 4; ++i)
        for (int k = i; k < 4; ++k) tt.columns.push_back("gamma" + std::to_string(i) + std::to_string(k));
    tt.columns.push_back("simon_min_eig");
    CovarianceTrace tr;
    if (inv.trace) {
        tr = [&tt](const CovarianceState& s) {
            std::vector<double> row{s.t};
            for (int i = 0; i < 4; ++i)
                for (int k = i; k < 4; ++k) row.push_back(s.gamma(i, k));
            row.push_back(simon_min_eig(s));
            tt.rows.push_back(std::move(row));
        };
    }
    const auto final_state = propagate(CovarianceState{}, x, y, t_final, dt, tr);
    const auto v = detail::oscillator_verdict(rates);
    nlohmann::json j;
    j["architecture"] = "oscillators";
    j["t_final"] = t_final;
    j["dt"] = dt;
    j["final_simon_min_eig"] = simon_min_eig(final_state);
    j["onset_rate"] = onset_rate(rates);
    j["rates"] = {{"gamma1", rates.gamma1}, {"gamma2", rates.gamma2}, {"gamma12", rates.gamma12}, {"g", rates.g}};
    j["verdicts"] = {{"exact", v.exact}, {"conservative", v.conservative}};
    return finish_evolve(inv, j, tt);
}

inline std::string evolve_qubits(const Invocation& inv, const DissipationKernel& K, const ExperimentConfig& e) {
    const auto& ev = inv.config.evolve;
    const auto r = make_qubit_rates(K, e.m1, e.m2, e.d, e.delta_x, inv.config.quadrature);
    const double scale =
        std::max({r.gamma1, r.gamma2, std::abs(r.beta_term), std::abs(r.coupling)});
    if (!(scale > 0.0) && !(ev.t_final > 0.0))
        throw ConfigError("evolve.t_final", "all rates vanish; give t_final explicitly");
    const double t_final = ev.t_final > 0.0 ? ev.t_final : 3.0 / scale;
    const double dt = ev.dt > 0.0 ? ev.dt : t_final / 200.0;
    check_step_budget(t_final, dt);

    const auto s0 = bose_initial_state();
    TraceTable tt;
    tt.columns = {"t"};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const std::string ij = std::to_string(a) + std::to_string(b);
            tt.columns.push_back("re_rho" + ij);
            tt.columns.push_back("im_rho" + ij);
        }
    tt.columns.push_back("negativity");
    if (inv.trace) {
        const long n = std::lround(t_final / dt);
        for (long i = 0; i <= n; ++i) {
            const double t = std::min(t_final, i * dt);
            const auto s = evolve_analytic(s0, r, t);
            std::vector<double> row{t};
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    row.push_back(s.rho(a, b).real());
                    row.push_back(s.rho(a, b).imag());
                }
            row.push_back(negativity(s));
            tt.rows.push_back(std::move(row));
        }
    }
    // One-sided difference at a step small against every rate.
    const double h = scale > 0.0 ? 1e-7 / scale : 1e-7 * t_final;
    const double fd_slope = negativity(evolve_analytic(s0, r, h)) / h;
    const auto v = detail::qubit_verdict(r);
    nlohmann::json j;
    j["architecture"] = "qubits";
    j["t_final"] = t_final;
    j["final_negativity"] = negativity(evolve_analytic(s0, r, t_final));
    j["negativity_rate"] = negativity_rate(r);
    j["negativity_rate_finite_difference"] = fd_slope;
    j["rates"] = {{"gamma1", r.gamma1}, {"gamma2", r.gamma2}, {"beta_term", r.beta_term},
                  {"coupling", r.coupling}};
    j["verdicts"] = {{"exact", v.exact}, {"conservative", v.conservative}};
    return finish_evolve(inv, j, tt);
}

inline std::string evolve_hybrid(const Invocation& inv, const DissipationKernel& K, const ExperimentConfig& e) {
    const auto& ev = inv.config.evolve;
    const auto& q = inv.config.quadrature;
    const auto p = make_hybrid_params(K, e.m1, e.omega1, e.m2, e.d, e.delta_x, q);
    const HybridGenerator L(p, ev.n_max, ev.quad_nodes);
    const double dt = ev.dt > 0.0 ? ev.dt : 0.04 / L.stiffness();
    const double t_final = ev.t_final > 0.0 ? ev.t_final : 2.0 * pi / e.omega1;
    check_step_budget(t_final, dt);

    TraceTable tt;
    tt.columns = {"t"};
    for (int n = 0; n <= ev.n_max; ++n) tt.columns.push_back("pop" + std::to_string(n));
    tt.columns.insert(tt.columns.end(), {"re_sigma_minus", "im_sigma_minus", "pt_min_eig"});
    HybridTrace tr;
    if (inv.trace) {
        tr = [&tt, b = ev.n_max + 1](const HybridState& s) {
            std::vector<double> row{s.t};
            for (int n = 0; n < b; ++n) row.push_back(std::real(s.rho(n, n) + s.rho(b + n, b + n)));
            const cplx c = hybrid_coherence(s);
            row.insert(row.end(), {c.real(), c.imag(), pt_min_eig(s)});
            tt.rows.push_back(std::move(row));
        };
    }
    const auto s = evolve_numeric(hybrid_initial_state(ev.n_max), L, t_final, dt, tr);
    const auto v = hybrid_entangling(p, q);
    nlohmann::json j;
    j["architecture"] = "hybrid";
    j["t_final"] = t_final;
    j["dt"] = dt;
    j["n_max"] = ev.n_max;
    j["final_pt_min_eig"] = pt_min_eig(s);
    j["max_edge_population"] = s.max_edge_population;
    j["max_trace_correction"] = s.max_trace_correction;
    j["rates"] = {{"g", p.g}, {"gamma2", p.gamma2}, {"beta_term", p.beta_term}, {"kappa", p.kappa},
                  {"kick_rate", L.channels().total_rate}};
    const auto D = dnm_matrix(K, e.m1, e.omega1, ev.n_pert, q);
    const auto sol = lambda1_solve(p.gamma2, p.g, p.beta_term, D);
    j["lambda1_negative"] = sol.negative.value;
    j["verdicts"] = {{"sufficient", v.sufficient}, {"perturbative", sol.matrix_min_eig < 0.0}};
    return finish_evolve(inv, j, tt);
}

inline std::string cmd_evolve(const Invocation& inv) {
    const auto& e = require_experiment(inv.config);
    const auto K = build_kernel(require_model(inv.config), e);
    switch (e.architecture) {
        case Architecture::oscillators: return evolve_oscillators(inv, K, e);
        case Architecture::qubits: return evolve_qubits(inv, K, e);
        case Architecture::hybrid: return evolve_hybrid(inv, K, e);
    }
    throw ConfigError("experiment.architecture", "unsupported");
}

inline std::string cmd_scan(const Invocation& inv) {
    const ScanSpec spec = inv.config.scan.value_or(ScanSpec{});
    const auto grid = scan_cq(spec, scan_threads());
    std::ostringstream os;
    if (inv.format == "csv") {
        emit_grid_csv(grid, os, provenance_lines(inv));
        return os.str();
    }
    nlohmann::json j;
    j["grid"] = grid_to_json(grid);
    j["detector"] = {{"ell", spec.detector.ell}, {"mass", spec.detector.test_mass()},
                     {"measured_asd", spec.detector.measured_asd},
                     {"threshold_asd", spec.detector.threshold_asd}};
    return render(inv, j);
}

/// Returns the rendered report and whether every check passed.
inline std::pair<std::string, bool> cmd_validate(const Invocation& inv) {
    ExperimentConfig osc;
    osc.architecture = Architecture::oscillators;
    double dx = 0.0;
    if (inv.config.experiment) {
        const auto& e = *inv.config.experiment;
        osc.m1 = e.m1;
        osc.m2 = e.m2;
        osc.d = e.d;
        osc.omega1 = e.omega1 > 0.0 ? e.omega1 : 1.0;
        osc.omega2 = e.architecture == Architecture::oscillators ? e.omega2 : osc.omega1;
        dx = e.delta_x;
    } else {
        osc.m1 = osc.m2 = 1e-6;
        osc.d = 1e-3;
        osc.omega1 = osc.omega2 = 1.0;
    }
    if (!(dx > 0.0)) dx = osc.d / 10.0;

    auto kernels = catalog_kernels(osc.m1, osc.m2, osc.d);
    nlohmann::json checks = nlohmann::json::array();
    bool all = true;
    nlohmann::json info = nlohmann::json::object();
    if (inv.config.model) {
        const auto& m = *inv.config.model;
        if (m.name == "cq") info["cq_tradeoff_D0D2>=1"] = m.cq.satisfies_tradeoff();
        kernels.push_back({"configured:" + m.name, build_kernel(m, inv.config.experiment.value_or(osc))});
    }
    for (const auto& nk : kernels) {
        for (const auto& c : check_positivity(nk, osc, dx, inv.config.quadrature)) {
            checks.push_back({{"suite", "positivity"}, {"kernel", c.kernel}, {"bound", c.bound},
                              {"lhs", c.lhs}, {"rhs", c.rhs}, {"passed", c.passed}});
            all = all && c.passed;
        }
    }
    const auto er = ehrenfest_drift(ehrenfest_reference_params(), 30, 20, inv.seed);
    const bool ehrenfest_ok = er.max_drift < 1e-8;
    checks.push_back({{"suite", "ehrenfest"}, {"kernel", "reference_gaussian"}, {"bound", "|tr[D(rho) p]| < 1e-8"},
                      {"lhs", er.max_drift}, {"rhs", 1e-8}, {"passed", ehrenfest_ok}});
    all = all && ehrenfest_ok;

    if (inv.format == "csv") {
        std::ostringstream os;
        for (const auto& l : provenance_lines(inv)) os << "# " << l << '\n';
        os << "suite,kernel,bound,lhs,rhs,passed\n";
        for (const auto& c : checks)
            os << c["suite"].get<std::string>() << ',' << c["kernel"].get<std::string>() << ",\""
               << c["bound"].get<std::string>() << "\"," << format_sci(c["lhs"].get<double>()) << ','
               << format_sci(c["rhs"].get<double>()) << ',' << (c["passed"].get<bool>() ? "true" : "false")
               << '\n';
        return {os.str(), all};
    }
    nlohmann::json j;
    j["checks"] = checks;
    j["informational"] = info;
    j["all_passed"] = all;
    return {render(inv, j), all};
}

inline std::string cmd_integrals(const Invocation& inv) {
    const auto I = compute_entropic_integrals(inv.config.quadrature);
    nlohmann::json j = {{"I_plus", I.I_plus},       {"I_minus", I.I_minus},
                        {"raw_plus", I.raw_plus},   {"raw_minus", I.raw_minus},
                        {"normalisation", entropic_moment_normalisation},
                        {"error_estimate", I.error}};
    return render(inv, j);
}

// ---------------------------------------------------------------------------

inline void write_output(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
    if (!path) {
        out << text;
        return;
    }
    std::ofstream f(*path, std::ios::binary);
    if (!f) throw IoError("cannot open output file '" + *path + "'");
    f << text;
    f.flush();
    if (!f) throw IoError("failed writing output file '" + *path + "'");
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gravitational noise rates, entanglement thresholds and model exclusion scans", "gravnoise"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    std::string config_path, format;
    std::optional<std::string> out_path;
    bool want_json = false, want_csv = false, trace = false;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("-c,--config", config_path, "TOML run configuration");
        if (needs_config) c->required();
        sub->add_option("-o,--out", out_path, "write output here instead of stdout");
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
        auto* j = sub->add_flag("--json", want_json, "same as --format json");
        auto* cs = sub->add_flag("--csv", want_csv, "same as --format csv");
        j->excludes(cs);
        sub->add_option("--seed", seed, "seed for randomised checks");
        sub->add_flag("--trace", trace, "emit per-step trace rows (evolve)");
    };
    const std::pair<const char*, const char*> commands[] = {
        {"threshold", "entangling threshold for the configured experiment"},
        {"noise", "noise rates, thresholds and verdicts for a model and experiment"},
        {"evolve", "time evolution of the configured experiment"},
        {"scan", "classical-quantum (D0, D2) exclusion grid"},
        {"validate", "positivity and Ehrenfest invariant suites"},
        {"integrals", "entropic spectral integrals I+ and I-"}};
    for (const auto& [name, help] : commands) {
        const std::string n = name;
        add_common(app.add_subcommand(name, help), !(n == "scan" || n == "validate" || n == "integrals"));
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        // Prints help/version to `out` and parse errors to `err`.
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? ok : config_error;
    }

    Invocation inv;
    inv.command = app.get_subcommands().front()->get_name();
    inv.trace = trace;
    try {
        if (!config_path.empty()) inv.config = load_config(config_path);
        inv.config_path = config_path;
        inv.seed = seed.value_or(inv.config.seed);
        inv.out_path = out_path ? out_path : inv.config.output.path;

        std::string flag_format = want_json ? "json" : (want_csv ? "csv" : "");
        if (!flag_format.empty() && !format.empty() && flag_format != format)
            throw ConfigError("--format", "conflicts with --" + flag_format);
        if (!format.empty()) inv.format = format;
        else if (!flag_format.empty()) inv.format = flag_format;
        else if (inv.config.output.format) inv.format = *inv.config.output.format;
        else inv.format = inv.command == "scan" ? "csv" : "json";

        std::string text;
        int code = ok;
        if (inv.command == "threshold") text = cmd_threshold(inv);
        else if (inv.command == "noise") text = cmd_noise(inv);
        else if (inv.command == "evolve") text = cmd_evolve(inv);
        else if (inv.command == "scan") text = cmd_scan(inv);
        else if (inv.command == "validate") {
            auto [t, passed] = cmd_validate(inv);
            text = std::move(t);
            if (!passed) {
                err << "error: validation suite failed\n";
                code = numeric_error;
            }
        } else text = cmd_integrals(inv);
        write_output(inv.out_path, text, out);
        return code;
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        err << "error: invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const NumericError& e) {
        err << "error: numeric: " << e.what() << '\n';
        return numeric_error;
    } catch (const IoError& e) {
        err << "error: io: " << e.what() << '\n';
        return io_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return numeric_error;
    }
}

}  // namespace gravnoise::cli
