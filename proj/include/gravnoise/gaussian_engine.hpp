#pragma once

// Two coupled oscillators: covariance-matrix dynamics and the Simon
// (PPT) entanglement test.
//
// Quadratures are normalised by the zero-point scales, M = (x1/x10, p1/p10,
// x2/x20, p2/p20), and gamma_ij = <{M_i, M_j}> - 2<M_i><M_j>, so two ground
// states have gamma = I.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <sstream>

#include "gravnoise/errors.hpp"
#include "gravnoise/units.hpp"

namespace gravnoise {

using Mat4 = Eigen::Matrix4d;

struct CovarianceState {
    Mat4 gamma = Mat4::Identity();
    double t = 0.0;
};

/// Rates in 1/s. p0_ratio = p10/p20 only matters for the momentum-space
/// form of the sufficient condition (see oscillators_entangling).
struct OscillatorRates {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma12 = 0.0;
    double g = 0.0;
    double p0_ratio = 1.0;

    bool positivity_holds(double rel_tol = 1e-12) const {
        return gamma12 * gamma12 <= gamma1 * gamma2 * (1.0 + rel_tol);
    }

    void validate() const {
        if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) throw DomainError("oscillator heating rates must be non-negative");
        if (!std::isfinite(gamma12) || !std::isfinite(g)) throw DomainError("oscillator rates must be finite");
        if (!positivity_holds()) {
            std::ostringstream msg;
            msg << "correlated rate violates Gamma12^2 <= Gamma1 Gamma2 (" << gamma12 * gamma12
                << " > " << gamma1 * gamma2 << ")";
            throw DomainError(msg.str());
        }
        if (!(p0_ratio > 0.0)) throw DomainError("p0_ratio must be positive");
    }
};

struct SymplecticFixtures {
    /// Partial transposition of mode 2 (p2 -> -p2).
    static Mat4 K() { return Eigen::Vector4d(1, 1, 1, -1).asDiagonal(); }
    static Mat4 Delta2() {
        Mat4 D = Mat4::Zero();
        D(0, 1) = 1;
        D(1, 0) = -1;
        D(2, 3) = 1;
        D(3, 2) = -1;
        return D;
    }
};

/// Drift from shifted frequencies and coupling rate directly: x = -X Delta2,
/// X = [[w1,0,2g,0],[0,w1,0,0],[2g,0,w2,0],[0,0,0,w2]].
inline Mat4 build_drift_from_rates(double omega1, double omega2, double g) {
    Mat4 X = Mat4::Zero();
    X(0, 0) = X(1, 1) = omega1;
    X(2, 2) = X(3, 3) = omega2;
    X(0, 2) = X(2, 0) = 2.0 * g;
    return -X * SymplecticFixtures::Delta2();
}

/// Shifted trap frequency sqrt(w'^2 - 2 alpha_G / m); the Newtonian
/// potential softens each trap.
inline double shifted_frequency(double omega_trap, double alpha, double m) {
    const double w2 = omega_trap * omega_trap - 2.0 * alpha / m;
    if (!(w2 > 0.0)) {
        std::ostringstream msg;
        msg << "gravitational softening exceeds the trap: omega'^2 - 2 alpha_G/m = " << w2;
        throw DomainError(msg.str());
    }
    return std::sqrt(w2);
}

struct OscillatorGeometry {
    double omega1 = 0.0;  // shifted
    double omega2 = 0.0;
    double g = 0.0;
};

inline OscillatorGeometry oscillator_geometry(double m1, double omega1_trap, double m2,
                                              double omega2_trap, double d) {
    const double a = alpha_g(m1, m2, d);
    OscillatorGeometry o;
    o.omega1 = shifted_frequency(omega1_trap, a, m1);
    o.omega2 = shifted_frequency(omega2_trap, a, m2);
    o.g = g_rate_oscillators(m1, o.omega1, m2, o.omega2, d);
    return o;
}

inline Mat4 build_drift(double m1, double omega1_trap, double m2, double omega2_trap, double d) {
    const auto o = oscillator_geometry(m1, omega1_trap, m2, omega2_trap, d);
    return build_drift_from_rates(o.omega1, o.omega2, o.g);
}

inline Mat4 build_diffusion(const OscillatorRates& r) {
    r.validate();
    Mat4 y = Mat4::Zero();
    y(1, 1) = 2.0 * r.gamma1;
    y(3, 3) = 2.0 * r.gamma2;
    y(1, 3) = y(3, 1) = 2.0 * r.gamma12;
    return y;
}

inline Mat4 covariance_derivative(const Mat4& gamma, const Mat4& x, const Mat4& y) {
    return x.transpose() * gamma + gamma * x + y;
}

/// gamma(t) to first order in t.
inline CovarianceState propagate_first_order(const CovarianceState& s, const Mat4& x,
                                             const Mat4& y, double t) {
    return {s.gamma + t * covariance_derivative(s.gamma, x, y), s.t + t};
}

using CovarianceTrace = std::function<void(const CovarianceState&)>;

/// Classic RK4 on gamma' = x^T gamma + gamma x + y. The last step is shortened
/// to land on t_final. Requires dt * ||x|| < 0.1 (spectral-norm bound via the
/// Frobenius norm, which is larger).
inline CovarianceState propagate(const CovarianceState& s0, const Mat4& x, const Mat4& y,
                                 double t_final, double dt, const CovarianceTrace& trace = {}) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (!(t_final >= 0.0)) throw DomainError("t_final must be non-negative");
    if (dt * x.norm() >= 0.1) {
        std::ostringstream msg;
        msg << "step too large: dt*||x|| = " << dt * x.norm() << " (need < 0.1)";
        throw DomainError(msg.str());
    }
    CovarianceState s = s0;
    const long steps = detail::step_count(t_final, dt);
    if (trace) trace(s);
    for (long i = 1; i <= steps; ++i) {
        const double h = i < steps ? dt : t_final - (steps - 1) * dt;
        const Mat4 k1 = covariance_derivative(s.gamma, x, y);
        const Mat4 k2 = covariance_derivative(s.gamma + 0.5 * h * k1, x, y);
        const Mat4 k3 = covariance_derivative(s.gamma + 0.5 * h * k2, x, y);
        const Mat4 k4 = covariance_derivative(s.gamma + h * k3, x, y);
        s.gamma += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s.gamma = 0.5 * (s.gamma + s.gamma.transpose()).eval();
        s.t = s0.t + (i < steps ? i * dt : t_final);
        if (trace) trace(s);
    }
    return s;
}

/// Smallest eigenvalue of K gamma K + i Delta2; negative means entangled.
inline double simon_min_eig(const CovarianceState& s) {
    const Mat4 K = SymplecticFixtures::K();
    Eigen::Matrix4cd H = (K * s.gamma * K).cast<std::complex<double>>();
    H += std::complex<double>(0.0, 1.0) * SymplecticFixtures::Delta2().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// d lambda_min / dt at t = 0 from two ground states:
/// (Gamma1 + Gamma2 - sqrt((Gamma1-Gamma2)^2 + 4 Gamma12^2 + 16 g^2)) / 2.
inline double onset_rate(const OscillatorRates& r) {
    const double dg = r.gamma1 - r.gamma2;
    return 0.5 * (r.gamma1 + r.gamma2 -
                  std::sqrt(dg * dg + 4.0 * r.gamma12 * r.gamma12 + 16.0 * r.g * r.g));
}

struct OscillatorVerdict {
    /// Gamma1 + Gamma2 < sqrt((Gamma1-Gamma2)^2 + 4 Gamma12^2 + 16 g^2).
    bool exact = false;
    /// Gamma1 + Gamma2 < 4 g, i.e. the correlated term dropped.
    bool conservative = false;
    /// d<p1^2>/dt + d<p2^2>/dt < 4 alpha_G hbar, written in rates as
    /// Gamma1 r + Gamma2 / r < 4 g with r = p10/p20.
    bool momentum_form = false;
};

namespace detail {

inline OscillatorVerdict oscillator_verdict(const OscillatorRates& r) {
    OscillatorVerdict v;
    // Squared form, (G1+G2)^2 - (G1-G2)^2 = 4 G1 G2, factored as in the qubit case.
    const double root = std::sqrt(r.gamma1 * r.gamma2);
    const double c = std::abs(r.gamma12);
    v.exact = (root - c) * (root + c) < 4.0 * r.g * r.g;
    v.conservative = r.gamma1 + r.gamma2 < 4.0 * r.g;
    v.momentum_form = r.gamma1 * r.p0_ratio + r.gamma2 / r.p0_ratio < 4.0 * r.g;
    return v;
}

}  // namespace detail

/// Throws DomainError for rate sets that violate Gamma12^2 <= Gamma1 Gamma2.
inline OscillatorVerdict oscillators_entangling(const OscillatorRates& r) {
    r.validate();
    return detail::oscillator_verdict(r);
}

}  // namespace gravnoise
