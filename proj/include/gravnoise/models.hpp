#pragma once

// Model catalog: each model reduces to a DissipationKernel plus a few
// closed-form noise predictions used for cross-checks.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "gravnoise/errors.hpp"
#include "gravnoise/kernel.hpp"
#include "gravnoise/quadrature.hpp"
#include "gravnoise/units.hpp"

namespace gravnoise {

/// Force-noise threshold 4 G m1 m2 hbar / d^3 below which any model in the
/// framework must entangle two oscillators (N^2/Hz, summed over both masses).
inline double oscillator_threshold_sff(double m1, double m2, double d) {
    return 4.0 * hbar * alpha_g(m1, m2, d);
}

// ===========================================================================
// Classical-quantum gravity

/// D0 in m^2 and D2 in m^-2, so that D0*D2 is dimensionless.
struct CQParams {
    double D0 = 1.0;
    double D2 = 1.0;
    double ell = 1e-4;
    double m_phi = 0.0;

    void validate() const {
        detail::require_positive(D0, "D0");
        detail::require_positive(D2, "D2");
        detail::require_positive(ell, "ell");
        detail::require_non_negative(m_phi, "m_phi");
    }
    /// The decoherence-diffusion tradeoff D0 D2 >= 1.
    bool satisfies_tradeoff() const { return D0 * D2 >= 1.0; }
};

/// CQ correlated coefficient in N/m. Note the cos(d/ell) factor: it is the
/// remnant of the sharp regulator and oscillates in sign with d.
inline double cq_beta(const CQParams& p, double m1, double m2, double d) {
    detail::require_positive(d, "d");
    const double l = p.ell;
    return -2.0 * G_N * m1 * m2 * (p.D0 + p.D2 * l * l * l * l) * std::cos(d / l) /
           (pi * l * l * l * d * d);
}

inline DissipationKernel cq_kernel(const CQParams& p, double m1, double m2) {
    p.validate();
    detail::require_positive(m1, "m1");
    detail::require_positive(m2, "m2");
    DissipationKernel K;
    K.model = "cq";
    K.k_max = 1.0 / p.ell;
    auto make_f = [p](double m) {
        const double pre = G_N * m * m / (2.0 * pi * pi * hbar);
        return [pre, p](double k) {
            const double q = k * k + p.m_phi * p.m_phi;
            return pre * (p.D2 / (q * q) + p.D0);
        };
    };
    K.f1 = make_f(m1);
    K.f2 = make_f(m2);
    K.beta = [p, m1, m2](double d) { return cq_beta(p, m1, m2, d); };
    K.parameters = {{"D0", p.D0}, {"D2", p.D2}, {"ell", p.ell}, {"m_phi", p.m_phi},
                    {"m1", m1}, {"m2", m2}};
    K.flags.push_back("cq_beta_regulator_phase_cos(d/ell)_verbatim");
    if (!p.satisfies_tradeoff()) K.flags.push_back("cq_tradeoff_violated_D0D2<1");
    return K;
}

/// Total force noise of two equal masses m, in N^2/Hz:
/// 4 G m^2 hbar (D0 + 5 ell^4 D2) / (15 pi ell^5).
inline double cq_sff_closed(const CQParams& p, double m) {
    p.validate();
    detail::require_positive(m, "mass");
    const double l = p.ell;
    const double l4 = l * l * l * l;
    return 4.0 * G_N * m * m * hbar * (p.D0 + 5.0 * l4 * p.D2) / (15.0 * pi * l4 * l);
}

struct CQMinimum {
    double value = 0.0;                 // 8 sqrt5 G m^2 hbar / (15 pi ell^3)
    std::optional<double> threshold;    // 4 G m^2 hbar / d^3 when d was supplied
    std::optional<bool> above_threshold;
};

/// Smallest CQ force noise compatible with D0 D2 >= 1; attained at
/// D0 = sqrt5 ell^2. With a separation d >= ell it also reports whether the
/// floor lies above the oscillator entangling threshold.
inline CQMinimum cq_min_sff(double ell, double m, std::optional<double> d = std::nullopt) {
    detail::require_positive(ell, "ell");
    detail::require_positive(m, "mass");
    CQMinimum r;
    r.value = 8.0 * std::sqrt(5.0) * G_N * m * m * hbar / (15.0 * pi * ell * ell * ell);
    if (d) {
        if (*d < ell) throw DomainError("the threshold comparison needs d >= ell");
        r.threshold = oscillator_threshold_sff(m, m, *d);
        r.above_threshold = r.value > *r.threshold;
    }
    return r;
}

struct CQDephasing {
    double exact = 0.0;              // 1/s, from quadrature
    double error = 0.0;              // quadrature error estimate
    double order_of_magnitude = 0.0; // (G m^2 / 2 pi^2 hbar) [D0/ell^3 + 4 pi^2 D2 dx]
};

inline CQDephasing cq_single_mass_dephasing(const CQParams& p, double m, double dx,
                                            const QuadratureSpec& spec = {}) {
    detail::require_positive(dx, "delta_x");
    const auto K = cq_kernel(p, m, m);
    const auto r = dephasing_moment_result(K.f1, dx, K.spec_for(spec));
    CQDephasing out;
    out.exact = r.value;
    out.error = r.error;
    out.order_of_magnitude = G_N * m * m / (2.0 * pi * pi * hbar) *
                             (p.D0 / (p.ell * p.ell * p.ell) + 4.0 * pi * pi * p.D2 * dx);
    return out;
}

// ===========================================================================
// Entropic gravity: mediator spectral functions and their moments

/// g+(nu) = csch^3(nu/2) sech(nu/2) [-2 + (2+nu^2) cosh nu - 2 nu sinh nu] / (64 nu)
///
/// Below nu = 1 the bracket is summed as its Taylor series (it starts at
/// nu^4/4 and the direct form cancels catastrophically). Above that the
/// hyperbolic functions are rewritten in e = exp(-nu/2) so nothing overflows.
inline double entropic_g_plus(double nu) {
    if (nu < 0.0) throw DomainError("g+ is defined for nu >= 0");
    if (nu == 0.0) return 1.0 / 32.0;
    if (nu < 1.0) {
        // bracket = sum_{j>=2} c_j nu^(2j), c_j = 2/(2j)! + 1/(2j-2)! - 2/(2j-1)!
        double bracket = 0.0;
        double nu2j = nu * nu * nu * nu;
        double f2j = 24.0, f2jm1 = 6.0, f2jm2 = 2.0;  // (2j)!, (2j-1)!, (2j-2)! at j=2
        for (int j = 2; j < 20; ++j) {
            const double c = 2.0 / f2j + 1.0 / f2jm2 - 2.0 / f2jm1;
            bracket += c * nu2j;
            nu2j *= nu * nu;
            f2jm2 = f2j;
            f2jm1 = f2j * (2 * j + 1);
            f2j = f2jm1 * (2 * j + 2);
        }
        const double h = 0.5 * nu;
        const double csch = 1.0 / std::sinh(h);
        return csch * csch * csch / std::cosh(h) * bracket / (64.0 * nu);
    }
    const double e2 = std::exp(-nu);           // e^2
    const double e4 = e2 * e2, e6 = e4 * e2;
    const double one_m = -std::expm1(-nu);     // 1 - e^2
    const double pref = 16.0 / (one_m * one_m * one_m * (1.0 + e2));
    const double inner = -2.0 * e4 + 0.5 * (2.0 + nu * nu) * (e2 + e6) - nu * (e2 - e6);
    return pref * inner / (64.0 * nu);
}

/// g-(nu) = 2 csch^3(nu) sinh^4(nu/2) / nu, simplified to
/// e^2 (1 - e^2) / (nu (1 + e^2)^3) with e^2 = exp(-nu).
inline double entropic_g_minus(double nu) {
    if (nu < 0.0) throw DomainError("g- is defined for nu >= 0");
    if (nu == 0.0) return 1.0 / 8.0;
    const double e2 = std::exp(-nu);
    const double one_m = -std::expm1(-nu);
    const double den = 1.0 + e2;
    return e2 * (one_m / nu) / (den * den * den);
}

struct EntropicIntegrals {
    double I_plus = 0.0;   // normalised moment entering beta
    double I_minus = 0.0;
    double raw_plus = 0.0; // int_0^inf nu^2 g+(nu) dnu
    double raw_minus = 0.0;
    double error = 0.0;
};

/// Upper limit of the nu integrals; both integrands are below 1e-22 there.
inline constexpr double entropic_nu_cutoff = 60.0;

/// Converts the bare moments int nu^2 g(nu) into the coefficients of beta.
/// When the emergent-G condition pi^2 T^2 ell^2 / 12 = G m1 m2 is used to
/// eliminate T^2 ell^2 from the continuum mediator sum, each moment picks
/// up a factor 24/pi^2.
inline constexpr double entropic_moment_normalisation = 24.0 / (pi * pi);

inline EntropicIntegrals compute_entropic_integrals(const QuadratureSpec& spec = {}) {
    QuadratureSpec s = spec;
    s.rel_tol = std::min(spec.rel_tol, 1e-10);
    auto fp = [](double nu) { return nu * nu * entropic_g_plus(nu); };
    auto fm = [](double nu) { return nu * nu * entropic_g_minus(nu); };
    const auto rp = integrate(fp, 0.0, entropic_nu_cutoff, s);
    const auto rm = integrate(fm, 0.0, entropic_nu_cutoff, s);
    EntropicIntegrals out;
    out.raw_plus = rp.value;
    out.raw_minus = rm.value;
    out.I_plus = entropic_moment_normalisation * rp.value;
    out.I_minus = entropic_moment_normalisation * rm.value;
    out.error = entropic_moment_normalisation * (rp.error + rm.error);
    return out;
}

/// Cached moments; computed once per process (thread-safe static init).
inline const EntropicIntegrals& entropic_I_integrals() {
    static const EntropicIntegrals cached = compute_entropic_integrals();
    return cached;
}

// ===========================================================================
// Entropic gravity, non-local variant

struct EntropicNonlocalParams {
    double lambda_len = 0.0;  // m
    double ell2 = 1.0;        // m^2
    double zeta = 1.0;
    double T = 1.0;

    void validate() const {
        detail::require_non_negative(lambda_len, "lambda");
        detail::require_positive(ell2, "ell2");
        detail::require_positive(zeta, "zeta");
        detail::require_positive(T, "T");
    }

    /// Relative residual of pi^2 T^2 ell^2 / 12 = G m1 m2.
    double constraint_residual(double m1, double m2) const {
        const double lhs = pi * pi * T * T * ell2 / 12.0;
        const double rhs = G_N * m1 * m2;
        return std::abs(lhs - rhs) / rhs;
    }

    /// Temperature that satisfies the emergent-G condition for given masses.
    static double constrained_T(double ell2, double m1, double m2) {
        return std::sqrt(12.0 * G_N * m1 * m2 / (pi * pi * ell2));
    }
};

enum class ConstraintPolicy { enforce, ignore };
inline constexpr double constraint_tolerance = 1e-6;

/// beta = G m1 m2 / (d^3 (1 + lambda d / ell^2)) (zeta I+ + I-/zeta), in N/m.
/// The force noise it produces is hbar * beta.
inline double entropic_nonlocal_beta(const EntropicNonlocalParams& p, double m1, double m2,
                                     double d,
                                     ConstraintPolicy policy = ConstraintPolicy::enforce) {
    p.validate();
    const double a = alpha_g(m1, m2, d);
    if (policy == ConstraintPolicy::enforce && p.constraint_residual(m1, m2) > constraint_tolerance) {
        std::ostringstream msg;
        msg << "entropic non-local parameters violate pi^2 T^2 ell^2/12 = G m1 m2 (relative residual "
            << p.constraint_residual(m1, m2) << ")";
        throw DomainError(msg.str());
    }
    const auto& I = entropic_I_integrals();
    return a / (1.0 + p.lambda_len * d / p.ell2) * (p.zeta * I.I_plus + I.I_minus / p.zeta);
}

/// The non-local model only has quadratic noise: both single-body diffusion
/// coefficients equal the correlated one, evaluated at the separation d.
inline DissipationKernel entropic_nonlocal_kernel(const EntropicNonlocalParams& p, double m1,
                                                  double m2, double d,
                                                  ConstraintPolicy policy = ConstraintPolicy::enforce) {
    const double b = entropic_nonlocal_beta(p, m1, m2, d, policy);
    DissipationKernel K;
    K.model = "entropic_nonlocal";
    K.kicks_vanish = true;
    K.k_max = 1.0;
    K.c1 = b;
    K.c2 = b;
    K.beta = [p, m1, m2](double dd) {
        return entropic_nonlocal_beta(p, m1, m2, dd, ConstraintPolicy::ignore);
    };
    K.parameters = {{"lambda", p.lambda_len}, {"ell2", p.ell2}, {"zeta", p.zeta}, {"T", p.T},
                    {"m1", m1}, {"m2", m2}, {"d", d}};
    if (p.constraint_residual(m1, m2) > constraint_tolerance) {
        K.flags.push_back("entropic_nonlocal_emergent_G_constraint_violated");
    }
    return K;
}

// ===========================================================================
// Entropic gravity, local (lattice) variant

/// T and gamma_th are rates (1/s); L is fixed by the emergent-G condition
/// sigma (1 - sigma) pi^3 L^4 / (T a^3) = G.
struct EntropicLocalParams {
    double a = 1e-5;
    double L = 1.0;
    double T = 1.0;
    double sigma_star = 0.5;
    double gamma_th = 1.0;

    void validate() const {
        detail::require_positive(a, "a");
        detail::require_positive(L, "L");
        detail::require_positive(T, "T");
        detail::require_positive(gamma_th, "gamma_th");
        if (!(sigma_star > 0.0 && sigma_star < 1.0)) throw DomainError("sigma_star must lie in (0, 1)");
    }

    double lambda_plus_sq() const { return sigma_star * gamma_th / (4.0 * T * T); }
    double lambda_minus_sq() const {
        const double s1 = sigma_star - 1.0;
        return 2.0 * sigma_star * s1 * s1 / gamma_th;
    }
    double Lambda() const { return lambda_plus_sq() + lambda_minus_sq(); }
    double eta() const { return T * (1.0 - sigma_star) / gamma_th; }

    double constraint_residual() const {
        const double lhs = sigma_star * (1.0 - sigma_star) * pi * pi * pi * L * L * L * L /
                           (T * a * a * a);
        return std::abs(lhs - G_N) / G_N;
    }

    /// Parameters with L chosen to satisfy the emergent-G condition exactly.
    static EntropicLocalParams constrained(double a, double T, double sigma_star, double gamma_th) {
        EntropicLocalParams p{a, 1.0, T, sigma_star, gamma_th};
        p.validate();
        const double L4 = G_N * T * a * a * a / (sigma_star * (1.0 - sigma_star) * pi * pi * pi);
        p.L = std::sqrt(std::sqrt(L4));
        return p;
    }
};

/// Correlated coefficient of the lattice model, N/m:
///   beta(d) = (4 pi^2 Lambda m1 m2 L^4 / a^3)
///             [4a(2a^2+d^2) / (d^2 (4a^2+d^2)^2) - arctan(d/2a) / d^3]
/// which is int d^3k k_x^2 cos(k_x d) sqrt(f1 f2) times hbar and tends to
/// -2 pi^3 Lambda m1 m2 L^4 / (a^3 d^3) for d >> a.
inline double entropic_local_beta(const EntropicLocalParams& p, double m1, double m2, double d) {
    detail::require_positive(d, "d");
    const double a = p.a;
    const double L4 = p.L * p.L * p.L * p.L;
    const double pre = 4.0 * pi * pi * p.Lambda() * m1 * m2 * L4 / (a * a * a);
    const double q = 4.0 * a * a + d * d;
    const double bracket =
        4.0 * a * (2.0 * a * a + d * d) / (d * d * q * q) - std::atan(d / (2.0 * a)) / (d * d * d);
    return pre * bracket;
}

inline DissipationKernel entropic_local_kernel(const EntropicLocalParams& p, double m1, double m2,
                                               std::optional<double> d = std::nullopt,
                                               ConstraintPolicy policy = ConstraintPolicy::enforce) {
    p.validate();
    detail::require_positive(m1, "m1");
    detail::require_positive(m2, "m2");
    if (policy == ConstraintPolicy::enforce && p.constraint_residual() > constraint_tolerance) {
        std::ostringstream msg;
        msg << "entropic local parameters violate sigma(1-sigma) pi^3 L^4/(T a^3) = G (relative residual "
            << p.constraint_residual() << ")";
        throw DomainError(msg.str());
    }
    DissipationKernel K;
    K.model = "entropic_local";
    const double a = p.a;
    // exp(-2 a k) < 1e-16 beyond this point.
    K.k_max = std::log(1e16) / (2.0 * a);
    const double L4 = p.L * p.L * p.L * p.L;
    auto make_f = [&](double m) {
        const double pre = pi * p.Lambda() * m * m * L4 / (2.0 * a * a * a * hbar);
        return [pre, a](double k) { return pre * std::exp(-2.0 * a * k) / (k * k); };
    };
    K.f1 = make_f(m1);
    K.f2 = make_f(m2);
    K.beta = [p, m1, m2](double dd) { return entropic_local_beta(p, m1, m2, dd); };
    K.parameters = {{"a", p.a}, {"L", p.L}, {"T", p.T}, {"sigma_star", p.sigma_star},
                    {"gamma_th", p.gamma_th}, {"eta", p.eta()}, {"m1", m1}, {"m2", m2}};
    if (p.constraint_residual() > constraint_tolerance) {
        K.flags.push_back("entropic_local_emergent_G_constraint_violated");
    }
    if (d && *d < p.a) K.flags.push_back("entropic_local_separation_below_lattice_spacing");
    return K;
}

/// Total force noise of two equal masses on the emergent-G surface:
/// G m^2 hbar (1/eta + 8 eta) / (12 pi a^3).
inline double entropic_local_sff_closed(const EntropicLocalParams& p, double m) {
    p.validate();
    detail::require_positive(m, "mass");
    const double eta = p.eta();
    return G_N * m * m * hbar * (1.0 / eta + 8.0 * eta) / (12.0 * pi * p.a * p.a * p.a);
}

/// Minimum over eta of the closed form: sqrt2 G m^2 hbar / (3 pi a^3) at
/// eta = 1/(2 sqrt2).
inline double entropic_local_min_sff(double a, double m) {
    detail::require_positive(a, "a");
    detail::require_positive(m, "mass");
    return std::sqrt(2.0) * G_N * m * m * hbar / (3.0 * pi * a * a * a);
}

inline constexpr double entropic_local_optimal_eta = 0.35355339059327376;  // 1/(2 sqrt2)

// ===========================================================================
// Perturbative quantum gravity

/// Reversible evolution: no kicks, no correlated noise.
inline DissipationKernel graviton_kernel() {
    DissipationKernel K;
    K.model = "graviton";
    K.kicks_vanish = true;
    return K;
}

}  // namespace gravnoise
