#pragma once

// Invariant suites shared by the `validate` subcommand and the tests:
// positivity of the noise rates for every catalogued kernel and the
// Ehrenfest (zero momentum drift) property of the discretised hybrid
// dissipator.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gravnoise/hybrid_engine.hpp"
#include "gravnoise/models.hpp"
#include "gravnoise/qubit_engine.hpp"
#include "gravnoise/thresholds.hpp"

namespace gravnoise {

struct NamedKernel {
    std::string name;
    DissipationKernel kernel;
};

/// One representative of every model, set up for masses m1, m2 at separation
/// d. The CQ regulator length is d/4 (positivity of the CQ rates needs
/// d >= sqrt(15) ell) and the lattice spacing of the local entropic model is
/// d/10.
inline std::vector<NamedKernel> catalog_kernels(double m1, double m2, double d) {
    std::vector<NamedKernel> out;
    out.push_back({"graviton", graviton_kernel()});
    const double ell = d / 4.0;
    out.push_back({"cq", cq_kernel(CQParams{1.0 / ell, ell, ell, 0.0}, m1, m2)});
    EntropicNonlocalParams nl;
    nl.lambda_len = d;
    nl.ell2 = d * d;
    nl.zeta = 1.0;
    nl.T = EntropicNonlocalParams::constrained_T(nl.ell2, m1, m2);
    out.push_back({"entropic_nonlocal", entropic_nonlocal_kernel(nl, m1, m2, d)});
    const auto loc = EntropicLocalParams::constrained(d / 10.0, 1.0, 0.5, 1.0);
    out.push_back({"entropic_local", entropic_local_kernel(loc, m1, m2, d)});
    return out;
}

struct PositivityCheck {
    std::string kernel;
    std::string bound;
    double lhs = 0.0;  // the quantity that must not exceed rhs
    double rhs = 0.0;
    bool passed = false;
};

inline constexpr double positivity_rel_tol = 1e-9;

/// Gamma12^2 <= Gamma1 Gamma2 for the oscillator rates and
/// beta^2 dx^4 / hbar^2 <= 16 Gamma1 Gamma2 for the qubit rates.
inline std::vector<PositivityCheck> check_positivity(const NamedKernel& nk, const ExperimentConfig& osc,
                                                     double delta_x, const QuadratureSpec& spec = {}) {
    std::vector<PositivityCheck> out;
    const auto [r, geo] = make_oscillator_rates(nk.kernel, osc, spec);
    (void)geo;
    PositivityCheck a{nk.name, "Gamma12^2 <= Gamma1*Gamma2", r.gamma12 * r.gamma12, r.gamma1 * r.gamma2};
    a.passed = a.lhs <= a.rhs * (1.0 + positivity_rel_tol);
    out.push_back(a);

    const auto q = make_qubit_rates(nk.kernel, osc.m1, osc.m2, osc.d, delta_x, spec);
    // beta^2 dx^4 / hbar^2 = 16 beta_term^2
    PositivityCheck b{nk.name, "beta^2 dx^4/hbar^2 <= 16*Gamma1*Gamma2", 16.0 * q.beta_term * q.beta_term,
                      16.0 * q.gamma1 * q.gamma2};
    b.passed = b.lhs <= b.rhs * (1.0 + positivity_rel_tol);
    out.push_back(b);
    return out;
}

/// Random density matrix on the hybrid space whose oscillator part lives on
/// Fock levels 0..support.
inline MatXc random_hybrid_state(int n_max, int support, std::mt19937_64& rng) {
    const int b = n_max + 1;
    std::normal_distribution<double> normal;
    MatXc A = MatXc::Zero(2 * b, 2 * b);
    for (int blk = 0; blk < 2; ++blk)
        for (int r = 0; r <= support; ++r)
            for (int c = 0; c < 2 * b; ++c) A(blk * b + r, c) = cplx(normal(rng), normal(rng));
    MatXc rho = A * A.adjoint();
    return rho / rho.trace().real();
}

/// Dimensionless reference setup for the Ehrenfest check: s = 1, omega = 1,
/// Gaussian kick spectrum and all four dissipative pieces switched on.
inline HybridParams ehrenfest_reference_params() {
    HybridParams p;
    p.omega = 1.0;
    p.M = hbar / 2.0;
    DissipationKernel K;
    K.model = "reference_gaussian";
    K.k_max = 3.0;
    K.f1 = [](double k) { return 0.02 * std::exp(-2.0 * k * k); };
    K.f2 = K.f1;
    K.c1 = K.c2 = 1e-3 * p.M * p.omega;
    p.kernel = K;
    p.g = 0.05;
    p.gamma2 = 0.01;
    p.beta_term = 0.003;
    p.kappa = K.c1 / (4.0 * p.M * p.omega);
    return p;
}

struct EhrenfestResult {
    double max_drift = 0.0;  // max over states of |tr[D(rho) p]|
    int states = 0;
};

/// p = i(a^dag - a) on the oscillator, identity on the two-state factor.
/// States live on Fock levels 0..n_max/4: kicks spread a state over several
/// levels, and population pushed past n_max carries momentum away. That
/// leakage falls off quickly (about 4e-7 at support n_max/2 but 4e-11 at
/// n_max/4 for n_max = 30) and is a truncation effect, not a drift of the
/// discretised kick spectrum itself.
inline EhrenfestResult ehrenfest_drift(const HybridParams& p, int n_max, int n_states, std::uint64_t seed,
                                       int n_quad_nodes = 24) {
    const HybridGenerator L(p, n_max, n_quad_nodes);
    const int b = n_max + 1;
    MatXc P = MatXc::Zero(2 * b, 2 * b);
    const MatXc p1 = momentum_quadrature(b);
    P.block(0, 0, b, b) = p1;
    P.block(b, b, b, b) = p1;
    std::mt19937_64 rng(seed);
    EhrenfestResult res;
    for (int i = 0; i < n_states; ++i) {
        const MatXc rho = random_hybrid_state(n_max, n_max / 4, rng);
        const cplx drift = (L.dissipator(rho) * P).trace();
        res.max_drift = std::max(res.max_drift, std::abs(drift));
        ++res.states;
    }
    return res;
}

}  // namespace gravnoise
