#pragma once

// Two masses, each in a superposition of two positions separated by dx.
//
// Basis index of |i j> with i, j in {+1, -1}: idx = 2*b(i) + b(j), where
// b(+1) = 0 and b(-1) = 1. +1 is the right branch |R>, -1 the left |L>.
// The position of mass a is x_a = x_a^(0) + (dx/2) sigma_a^z.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include "gravnoise/errors.hpp"
#include "gravnoise/kernel.hpp"
#include "gravnoise/units.hpp"

namespace gravnoise {

using Mat4c = Eigen::Matrix4cd;
using cplx = std::complex<double>;

struct QubitPairState {
    Mat4c rho = Mat4c::Zero();
    double t = 0.0;
};

/// All in 1/s except delta_x (m).
struct QubitRates {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double beta_term = 0.0;  // beta dx^2 / (4 hbar)
    double coupling = 0.0;   // alpha_G dx^2 / (2 hbar)
    double delta_x = 0.0;

    /// 16 Gamma1 Gamma2 >= beta^2 dx^4 / hbar^2, i.e. Gamma1 Gamma2 >= beta_term^2.
    bool positivity_holds(double rel_tol = 1e-12) const {
        return beta_term * beta_term <= gamma1 * gamma2 * (1.0 + rel_tol);
    }

    void validate() const {
        if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) throw DomainError("qubit dephasing rates must be non-negative");
        if (!std::isfinite(beta_term) || !std::isfinite(coupling)) throw DomainError("qubit rates must be finite");
        if (!positivity_holds()) {
            std::ostringstream msg;
            msg << "rates violate 16 Gamma1 Gamma2 >= beta^2 dx^4/hbar^2 (Gamma1 Gamma2 = " << gamma1 * gamma2
                << ", (beta dx^2/4hbar)^2 = " << beta_term * beta_term << ")";
            throw DomainError(msg.str());
        }
    }
};

inline int qubit_index(int i, int j) { return 2 * (i == 1 ? 0 : 1) + (j == 1 ? 0 : 1); }
inline constexpr std::array<int, 2> qubit_signs = {1, -1};

/// Dephasing rates of both masses from a kernel (1/s).
inline std::pair<double, double> dephasing_rates(const DissipationKernel& K, double dx,
                                                 const QuadratureSpec& spec = {}) {
    detail::require_positive(dx, "delta_x");
    return {dephasing_rate(K, 1, dx, spec), dephasing_rate(K, 2, dx, spec)};
}

inline QubitRates make_qubit_rates(const DissipationKernel& K, double m1, double m2, double d,
                                   double dx, const QuadratureSpec& spec = {}) {
    const auto [g1, g2] = dephasing_rates(K, dx, spec);
    QubitRates r;
    r.gamma1 = g1;
    r.gamma2 = g2;
    r.beta_term = K.beta(d) * dx * dx / (4.0 * hbar);
    r.coupling = alpha_g(m1, m2, d) * dx * dx / (2.0 * hbar);
    r.delta_x = dx;
    return r;
}

/// f_ijhk such that d rho_ijhk / dt = f_ijhk rho_ijhk.
inline cplx rate_exponent(int i, int j, int h, int k, const QubitRates& r) {
    const double ij = i * j, hk = h * k;
    return cplx(0.0, -r.coupling * (ij - hk)) + r.gamma1 * (i * h - 1) + r.gamma2 * (j * k - 1) +
           r.beta_term * (i * k + j * h - ij - hk);
}

/// rho_ijhk(t) = exp(f_ijhk t) rho_ijhk(0).
inline QubitPairState evolve_analytic(const QubitPairState& s0, const QubitRates& r, double t) {
    if (!(t >= 0.0)) throw DomainError("t must be non-negative");
    QubitPairState s = s0;
    for (int i : qubit_signs)
        for (int j : qubit_signs)
            for (int h : qubit_signs)
                for (int k : qubit_signs) {
                    const int row = qubit_index(i, j), col = qubit_index(h, k);
                    s.rho(row, col) = std::exp(rate_exponent(i, j, h, k, r) * t) * s0.rho(row, col);
                }
    s.t = s0.t + t;
    return s;
}

/// Transpose on the second mass.
inline Mat4c partial_transpose_second(const Mat4c& rho) {
    Mat4c out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int e = 0; e < 2; ++e) out(2 * a + b, 2 * c + e) = rho(2 * a + e, 2 * c + b);
    return out;
}

inline double negativity(const QubitPairState& s) {
    const Mat4c pt = partial_transpose_second(s.rho);
    Eigen::SelfAdjointEigenSolver<Mat4c> es(pt, Eigen::EigenvaluesOnly);
    double n = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double l = es.eigenvalues()(i);
        n += 0.5 * (std::abs(l) - l);
    }
    return n;
}

/// (|L> + |R>) (|L> + |R>) / 2.
inline QubitPairState bose_initial_state() {
    QubitPairState s;
    s.rho.setConstant(cplx(0.25, 0.0));
    return s;
}

/// dN/dt at t = 0 from bose_initial_state:
/// max(0, (sqrt((Gamma1-Gamma2)^2 + 4 beta_term^2 + 4 coupling^2) - Gamma1 - Gamma2) / 2).
inline double negativity_rate(const QubitRates& r) {
    const double dg = r.gamma1 - r.gamma2;
    const double root = std::sqrt(dg * dg + 4.0 * r.beta_term * r.beta_term + 4.0 * r.coupling * r.coupling);
    return std::max(0.0, 0.5 * (root - r.gamma1 - r.gamma2));
}

struct QubitVerdict {
    bool exact = false;         // Gamma1+Gamma2 < sqrt((G1-G2)^2 + beta^2dx^4/4hbar^2 + alpha^2dx^4/hbar^2)
    bool conservative = false;  // Gamma1+Gamma2 < alpha_G dx^2 / hbar
};

namespace detail {

inline QubitVerdict qubit_verdict(const QubitRates& r) {
    QubitVerdict v;
    // Squared form of the exact condition, G1 G2 - beta_term^2 < coupling^2,
    // with the left side factored so that a tiny coupling is not lost next to
    // a large beta_term.
    const double root = std::sqrt(r.gamma1 * r.gamma2);
    const double b = std::abs(r.beta_term);
    v.exact = (root - b) * (root + b) < r.coupling * r.coupling;
    v.conservative = r.gamma1 + r.gamma2 < 2.0 * r.coupling;
    return v;
}

}  // namespace detail

/// Throws DomainError for rate sets that violate 16 Gamma1 Gamma2 >= beta^2 dx^4/hbar^2.
inline QubitVerdict qubits_entangling(const QubitRates& r) {
    r.validate();
    return detail::qubit_verdict(r);
}

}  // namespace gravnoise
