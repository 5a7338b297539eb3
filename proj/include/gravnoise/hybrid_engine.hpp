#pragma once

// Oscillator (mass M, frequency omega) coupled to a two-position mass m.
//
// The state is a 2(N+1) square matrix made of four (N+1) Fock blocks
// rho_{sigma tau}, sigma, tau in {+1, -1}; block row 0 is sigma = +1.
// In rate units the Hamiltonian is H_sigma = omega a^dag a + g sigma X on
// block sigma, with X = a + a^dag. The dissipator has four pieces:
//
//   * oscillator kicks  sum_j w_j (L_j rho L_j^dag - {L_j^dag L_j, rho}/2),
//     L_j = P D(i q_j) P, a quadrature discretisation of
//     int d^3k f1(k) (D(i k_x sqrt(s)) rho D^dag - rho), s = hbar/(2 M omega);
//   * atom dephasing    Gamma2 (sigma tau - 1) rho_{sigma tau};
//   * correlated term   b (tau - sigma) [X, rho_{sigma tau}];
//   * quadratic kicks   -kappa [X, [X, rho_{sigma tau}]].

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <vector>

#include "gravnoise/errors.hpp"
#include "gravnoise/kernel.hpp"
#include "gravnoise/quadrature.hpp"
#include "gravnoise/units.hpp"

namespace gravnoise {

using MatXc = Eigen::MatrixXcd;
using MatXd = Eigen::MatrixXd;
using cplx = std::complex<double>;

struct HybridParams {
    double M = 1e-3;
    double omega = 1.0;
    double m = 132 * amu;
    double d = 1e-3;
    double delta_x = 1e-6;
    double g = 0.0;          // 1/s
    double gamma2 = 0.0;     // atom dephasing, 1/s
    double beta_term = 0.0;  // b = beta dx / (2 sqrt(2 M omega hbar)), 1/s
    double kappa = 0.0;      // c1 / (4 M omega), 1/s
    DissipationKernel kernel = {};

    /// Squared zero-point length of the oscillator, hbar / (2 M omega).
    double s() const { return hbar / (2.0 * M * omega); }
};

/// Coupling rate of the hybrid pair, G M m dx / (d^3 sqrt(2 M omega hbar)).
inline double hybrid_coupling(double M, double m, double d, double dx, double omega) {
    detail::require_positive(dx, "delta_x");
    detail::require_positive(omega, "omega");
    return alpha_g(M, m, d) * dx / std::sqrt(2.0 * M * omega * hbar);
}

inline HybridParams make_hybrid_params(const DissipationKernel& K, double M, double omega, double m,
                                       double d, double dx, const QuadratureSpec& spec = {}) {
    HybridParams p;
    p.M = M;
    p.omega = omega;
    p.m = m;
    p.d = d;
    p.delta_x = dx;
    p.kernel = K;
    p.g = hybrid_coupling(M, m, d, dx, omega);
    p.gamma2 = dephasing_rate(K, 2, dx, spec);
    p.beta_term = K.beta(d) * dx / (2.0 * std::sqrt(2.0 * M * omega * hbar));
    p.kappa = K.c1 / (4.0 * M * omega);
    return p;
}

// ---------------------------------------------------------------------------
// Fock-space operators

/// Truncated X = a + a^dag on Fock levels 0..dim-1.
inline MatXd position_quadrature(int dim) {
    MatXd X = MatXd::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) X(n, n + 1) = X(n + 1, n) = std::sqrt(n + 1.0);
    return X;
}

/// Truncated i(a^dag - a), the conjugate quadrature.
inline MatXc momentum_quadrature(int dim) {
    MatXc P = MatXc::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) {
        const double r = std::sqrt(n + 1.0);
        P(n + 1, n) = cplx(0.0, r);
        P(n, n + 1) = cplx(0.0, -r);
    }
    return P;
}

/// Eigen-decomposition of X on a padded Fock space, shared by every
/// displacement D(iq) = exp(iqX) on the physical levels 0..n_max.
struct PaddedQuadrature {
    int n_max = 0;
    int n_pad = 0;
    Eigen::VectorXd lambda;
    MatXd V;  // columns are eigenvectors

    PaddedQuadrature() = default;
    PaddedQuadrature(int n_max_, int padding) : n_max(n_max_), n_pad(n_max_ + 1 + padding) {
        if (n_max_ < 1) throw DomainError("Fock truncation must be >= 1");
        if (padding < 0) throw DomainError("padding must be non-negative");
        Eigen::SelfAdjointEigenSolver<MatXd> es(position_quadrature(n_pad));
        lambda = es.eigenvalues();
        V = es.eigenvectors();
    }

    /// Rows of V for the physical levels.
    auto top() const { return V.topRows(n_max + 1); }
};

/// <n| exp(i q X) |m> for n, m <= n_max, computed on the padded space.
inline MatXc displacement_matrix(double q, int n_max, int padding = 60) {
    PaddedQuadrature pq(n_max, padding);
    const auto T = pq.top();
    Eigen::VectorXcd phase(pq.n_pad);
    for (int a = 0; a < pq.n_pad; ++a) phase(a) = std::exp(cplx(0.0, q * pq.lambda(a)));
    return T.cast<cplx>() * phase.asDiagonal() * T.transpose().cast<cplx>();
}

// ---------------------------------------------------------------------------
// Jump channels

/// Discretised kick channels for the oscillator. Node j carries rate w_j and
/// displacement D(i q_j); nodes come in +-q pairs with equal weights.
struct JumpChannels {
    std::vector<double> q;
    std::vector<double> w;
    double total_rate = 0.0;
    PaddedQuadrature basis;
    MatXd phi;   // sum_j w_j cos(q_j (lambda_a - lambda_b)) on the padded eigenbasis
    MatXc loss;  // sum_j w_j L_j^dag L_j on the physical levels

    /// sum_j w_j q_j^2, the discretised d<X^2>/dt / 2 from kicks.
    double displacement_moment() const {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) s += w[j] * q[j] * q[j];
        return s;
    }

    /// sum_j w_j P D_j rho D_j^dag P for one (N+1) block.
    MatXc apply_kicks(const MatXc& rho) const {
        const MatXc T = basis.top().cast<cplx>();
        MatXc tilde = T.transpose() * rho * T;
        tilde.array() *= phi.array().cast<cplx>();
        return T * tilde * T.transpose();
    }
};

/// Gauss-Legendre nodes in k on (0, k_max] and in u = cos(theta) on [0, 1],
/// mirrored to -u. Weight of the (k, +-u) node: 2 pi k^2 f1(k) w_k w_u.
inline JumpChannels build_jump_operators(const HybridParams& p, int n_max, int n_quad_nodes,
                                         int padding = 60) {
    if (n_quad_nodes < 8) throw DomainError("n_quad_nodes must be >= 8");
    JumpChannels ch;
    ch.basis = PaddedQuadrature(n_max, padding);
    const int np = ch.basis.n_pad;
    ch.phi = MatXd::Zero(np, np);
    ch.loss = MatXc::Zero(n_max + 1, n_max + 1);

    const double root_s = std::sqrt(p.s());
    const auto kr = gauss_legendre_rule(n_quad_nodes, 0.0, p.kernel.k_max);
    const auto ur = gauss_legendre_rule(n_quad_nodes, 0.0, 1.0);
    for (int i = 0; i < n_quad_nodes; ++i) {
        const double k = kr.nodes[i];
        const double fk = p.kernel.kicks_vanish ? 0.0 : p.kernel.f1(k);
        if (!(fk >= 0.0)) throw DomainError("kernel f1 is negative or undefined at a quadrature node");
        for (int j = 0; j < n_quad_nodes; ++j) {
            const double w = 2.0 * pi * k * k * fk * kr.weights[i] * ur.weights[j];
            const double q = k * ur.nodes[j] * root_s;
            for (double sign : {1.0, -1.0}) {
                ch.q.push_back(sign * q);
                ch.w.push_back(w);
                ch.total_rate += w;
            }
            if (w == 0.0) continue;
            // Both signs together contribute 2 w cos(q (lambda_a - lambda_b)).
            for (int b = 0; b < np; ++b)
                for (int a = 0; a < np; ++a)
                    ch.phi(a, b) += 2.0 * w * std::cos(q * (ch.basis.lambda(a) - ch.basis.lambda(b)));
        }
    }
    // sum_j w_j P D_j^dag P D_j P: the same Hadamard map applied to the
    // projector onto the physical levels (phi is real and symmetric, so the
    // adjoint map coincides with the forward one).
    ch.loss = ch.apply_kicks(MatXc::Identity(n_max + 1, n_max + 1));
    ch.loss = (0.5 * (ch.loss + ch.loss.adjoint())).eval();
    return ch;
}

// ---------------------------------------------------------------------------
// Generator and states

struct HybridState {
    MatXc rho;
    int n_max = 0;
    double t = 0.0;
    /// Largest Hermiticity and trace corrections applied during evolution.
    double max_hermiticity_correction = 0.0;
    double max_trace_correction = 0.0;
    /// Largest population of Fock level N seen during evolution.
    double max_edge_population = 0.0;
};

inline int hybrid_dim(int n_max) { return 2 * (n_max + 1); }

/// Oscillator ground state times (|+1> + |-1>)/sqrt2.
inline HybridState hybrid_initial_state(int n_max) {
    HybridState s;
    s.n_max = n_max;
    const int b = n_max + 1;
    s.rho = MatXc::Zero(2 * b, 2 * b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s.rho(i * b, j * b) = 0.5;
    return s;
}

class HybridGenerator {
public:
    HybridGenerator(HybridParams params, int n_max, JumpChannels channels)
        : p_(std::move(params)), n_(n_max), ch_(std::move(channels)) {
        if (ch_.basis.n_max != n_max) throw DomainError("jump channels were built for a different truncation");
        X_ = position_quadrature(n_ + 1).cast<cplx>();
        Num_ = MatXc::Zero(n_ + 1, n_ + 1);
        for (int k = 0; k <= n_; ++k) Num_(k, k) = static_cast<double>(k);
    }

    HybridGenerator(const HybridParams& params, int n_max, int n_quad_nodes = 32, int padding = 60)
        : HybridGenerator(params, n_max, build_jump_operators(params, n_max, n_quad_nodes, padding)) {}

    int n_max() const { return n_; }
    int dim() const { return hybrid_dim(n_); }
    const HybridParams& params() const { return p_; }
    const JumpChannels& channels() const { return ch_; }

    /// Scale that bounds the step size: omega plus every dissipative rate.
    double stiffness() const {
        return p_.omega + ch_.total_rate + 2.0 * p_.gamma2 + 2.0 * std::abs(p_.beta_term) + 4.0 * p_.kappa;
    }

    MatXc hamiltonian_part(const MatXc& rho) const { return apply(rho, true, false); }
    MatXc dissipator(const MatXc& rho) const { return apply(rho, false, true); }
    MatXc operator()(const MatXc& rho) const { return apply(rho, true, true); }

private:
    MatXc apply(const MatXc& rho, bool unitary, bool dissipative) const {
        const int b = n_ + 1;
        MatXc out = MatXc::Zero(2 * b, 2 * b);
        const int sgn[2] = {1, -1};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const MatXc blk = rho.block(i * b, j * b, b, b);
                auto dst = out.block(i * b, j * b, b, b);
                const double sigma = sgn[i], tau = sgn[j];
                if (unitary) {
                    const MatXc Hs = p_.omega * Num_ + (p_.g * sigma) * X_;
                    const MatXc Ht = p_.omega * Num_ + (p_.g * tau) * X_;
                    dst += cplx(0.0, -1.0) * (Hs * blk - blk * Ht);
                }
                if (dissipative) {
                    if (p_.gamma2 != 0.0) dst += p_.gamma2 * (sigma * tau - 1.0) * blk;
                    if (p_.beta_term != 0.0 && i != j) {
                        dst += p_.beta_term * (tau - sigma) * (X_ * blk - blk * X_);
                    }
                    if (p_.kappa != 0.0) {
                        const MatXc c = X_ * blk - blk * X_;
                        dst -= p_.kappa * (X_ * c - c * X_);
                    }
                    if (ch_.total_rate != 0.0) {
                        dst += ch_.apply_kicks(blk) - 0.5 * (ch_.loss * blk + blk * ch_.loss);
                    }
                }
            }
        }
        return out;
    }

    HybridParams p_;
    int n_;
    JumpChannels ch_;
    MatXc X_, Num_;
};

inline constexpr double truncation_population_limit = 1e-8;

inline double edge_population(const HybridState& s) {
    const int b = s.n_max + 1;
    return std::real(s.rho(s.n_max, s.n_max)) + std::real(s.rho(b + s.n_max, b + s.n_max));
}

using HybridTrace = std::function<void(const HybridState&)>;

/// RK4 on the full generator. After each step the state is made Hermitian
/// and renormalised; the size of those corrections is kept on the state.
/// Throws TruncationError once Fock level N holds 1e-8 or more.
inline HybridState evolve_numeric(const HybridState& s0, const HybridGenerator& L, double t_final,
                                  double dt, const HybridTrace& trace = {}) {
    if (s0.n_max != L.n_max()) throw DomainError("state and generator truncations differ");
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw DomainError("dt must be positive and t_final non-negative");
    if (dt * L.stiffness() >= 0.05) {
        std::ostringstream msg;
        msg << "step too large: dt*(omega + total rate) = " << dt * L.stiffness() << " (need < 0.05)";
        throw DomainError(msg.str());
    }
    HybridState s = s0;
    const long steps = detail::step_count(t_final, dt);
    if (trace) trace(s);
    for (long i = 1; i <= steps; ++i) {
        const double h = i < steps ? dt : t_final - (steps - 1) * dt;
        const MatXc k1 = L(s.rho);
        const MatXc k2 = L(s.rho + 0.5 * h * k1);
        const MatXc k3 = L(s.rho + 0.5 * h * k2);
        const MatXc k4 = L(s.rho + h * k3);
        MatXc next = s.rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const MatXc herm = 0.5 * (next + next.adjoint());
        s.max_hermiticity_correction =
            std::max(s.max_hermiticity_correction, (herm - next).cwiseAbs().maxCoeff());
        const double tr = std::real(herm.trace());
        s.max_trace_correction = std::max(s.max_trace_correction, std::abs(tr - 1.0));
        s.rho = herm / tr;
        s.t = s0.t + (i < steps ? i * dt : t_final);
        const double edge = edge_population(s);
        s.max_edge_population = std::max(s.max_edge_population, edge);
        if (edge >= truncation_population_limit) {
            std::ostringstream msg;
            msg << "Fock truncation N=" << s.n_max << " too small: edge population " << edge << " at t=" << s.t;
            throw TruncationError(msg.str(), edge);
        }
        if (trace) trace(s);
    }
    return s;
}

/// Partial transpose on the two-state factor: the off-diagonal blocks swap.
inline MatXc hybrid_partial_transpose(const MatXc& rho, int n_max) {
    const int b = n_max + 1;
    MatXc pt = rho;
    pt.block(0, b, b, b) = rho.block(b, 0, b, b);
    pt.block(b, 0, b, b) = rho.block(0, b, b, b);
    return pt;
}

inline double pt_min_eig(const HybridState& s) {
    Eigen::SelfAdjointEigenSolver<MatXc> es(hybrid_partial_transpose(s.rho, s.n_max), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// <sigma^-> of the two-state factor, the trace of the (-1, +1) block.
inline cplx hybrid_coherence(const HybridState& s) {
    const int b = s.n_max + 1;
    return s.rho.block(b, 0, b, b).trace();
}

// ---------------------------------------------------------------------------
// Perturbative treatment of the first-order PT eigenvalue

/// D_nm for 1 <= n, m <= n_max_pert (1/s), including the quadratic-kick
/// contribution c1/(2 M omega) on D_11.
inline MatXd dnm_matrix(const DissipationKernel& K, double M, double omega, int n_max_pert,
                        const QuadratureSpec& spec = {}) {
    if (n_max_pert < 2) throw DomainError("n_max_pert must be >= 2");
    detail::require_positive(M, "M");
    detail::require_positive(omega, "omega");
    const double s = hbar / (2.0 * M * omega);
    MatXd D = MatXd::Zero(n_max_pert, n_max_pert);
    if (!K.kicks_vanish) {
        const auto qs = K.spec_for(spec);
        for (int n = 1; n <= n_max_pert; ++n)
            for (int m = n; m <= n_max_pert; ++m) {
                const double v = gaussian_weighted_moment(K.f1, n, m, s, qs);
                D(n - 1, m - 1) = D(m - 1, n - 1) = v;
            }
    }
    D(0, 0) += K.c1 / (2.0 * M * omega);
    return D;
}

/// The Hermitian matrix whose eigenvalues are the first-order slopes of the
/// PT eigenvalues that start at zero, on span{|0,->, |n,+> : n >= 1}.
inline MatXc lambda1_matrix(double gamma2, double g, double beta_term, const MatXd& D) {
    const int n = static_cast<int>(D.rows());
    MatXc C = MatXc::Zero(n + 1, n + 1);
    C(0, 0) = gamma2;
    C.bottomRightCorner(n, n) = D.cast<cplx>();
    const cplx v(-beta_term, -g);
    C(1, 0) = v;
    C(0, 1) = std::conj(v);
    return C;
}

struct Lambda1Branch {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

struct Lambda1Solution {
    Lambda1Branch negative;
    Lambda1Branch positive;
    /// Smallest eigenvalue of lambda1_matrix, the direct cross-check.
    double matrix_min_eig = 0.0;
    bool agrees_with_matrix = false;
};

/// Solves lambda = (Gamma2 + gamma(lambda) +- sqrt((Gamma2 - gamma(lambda))^2 + 4g^2 + 4b^2)) / 2,
/// gamma(lambda) = D11 + D_1n (lambda - D')^-1_nm D_m1 over n, m >= 2, by damped
/// fixed-point iteration from the gamma = D11 roots. D' is diagonalised once.
/// Throws NumericError when the negative branch does not converge.
inline Lambda1Solution lambda1_solve(double gamma2, double g, double beta_term, const MatXd& D) {
    if (D.rows() < 1 || D.rows() != D.cols()) throw DomainError("D must be a non-empty square matrix");
    const int n = static_cast<int>(D.rows());
    const double D11 = D(0, 0);
    Eigen::VectorXd Lam, dq;
    if (n > 1) {
        Eigen::SelfAdjointEigenSolver<MatXd> es(D.bottomRightCorner(n - 1, n - 1));
        Lam = es.eigenvalues();
        dq = es.eigenvectors().transpose() * D.col(0).tail(n - 1);
        if (Lam.size() > 0 && Lam(0) < -1e-10 * std::max(1.0, D.cwiseAbs().maxCoeff())) {
            throw DomainError("D must be positive semidefinite");
        }
    }
    auto gamma_of = [&](double lam) {
        double gm = D11;
        for (int i = 0; i < Lam.size(); ++i) gm += dq(i) * dq(i) / (lam - Lam(i));
        return gm;
    };
    const double coupling = 4.0 * (g * g + beta_term * beta_term);
    auto branch = [&](double lam, double sign) {
        const double gm = gamma_of(lam);
        const double diff = gamma2 - gm;
        return 0.5 * (gamma2 + gm + sign * std::sqrt(diff * diff + coupling));
    };
    const double scale = std::abs(gamma2) + std::abs(g) + std::abs(beta_term) + D.cwiseAbs().maxCoeff();

    auto iterate = [&](double sign) {
        Lambda1Branch out;
        const double diff0 = gamma2 - D11;
        double lam = 0.5 * (gamma2 + D11 + sign * std::sqrt(diff0 * diff0 + coupling));
        double damping = 1.0;
        double prev_step = 0.0;
        for (int it = 1; it <= 200; ++it) {
            const double target = branch(lam, sign);
            const double step = target - lam;
            if (!std::isfinite(step)) break;
            if (it > 1 && step * prev_step < 0.0 && std::abs(step) > 0.5 * std::abs(prev_step)) {
                damping *= 0.5;  // oscillating: damp
            }
            lam += damping * step;
            prev_step = step;
            out.iterations = it;
            out.residual = std::abs(branch(lam, sign) - lam);
            if (out.residual <= 1e-12 * std::max(std::abs(lam), scale)) {
                out.converged = true;
                break;
            }
        }
        out.value = lam;
        return out;
    };

    Lambda1Solution sol;
    sol.negative = iterate(-1.0);
    sol.positive = iterate(+1.0);
    Eigen::SelfAdjointEigenSolver<MatXc> es(lambda1_matrix(gamma2, g, beta_term, D), Eigen::EigenvaluesOnly);
    sol.matrix_min_eig = es.eigenvalues()(0);
    // Below the spectrum of D' the negative root is exactly the lowest
    // eigenvalue of the matrix; above it the two need not coincide.
    sol.agrees_with_matrix = std::abs(sol.matrix_min_eig - sol.negative.value) <= 1e-8 * scale;
    if (!sol.negative.converged) {
        std::ostringstream msg;
        msg << "lambda1 negative branch did not converge (residual " << sol.negative.residual << ")";
        throw NumericError(msg.str(), sol.negative.residual);
    }
    return sol;
}

struct HybridVerdict {
    /// 2g > (1/(2 M omega hbar)) d<p1^2>_e/dt + |d|<sigma^->|_e/dt|.
    bool sufficient = false;
    double entangling_rate = 0.0;       // 2g
    double oscillator_noise_rate = 0.0; // d<p1^2>/dt / (2 M omega hbar)
    double visibility_rate = 0.0;       // 2 Gamma2 |<sigma^-(0)>| = Gamma2
    double threshold_si = 0.0;          // 2 G M m dx / (d^3 sqrt(2 M omega hbar))
};

inline HybridVerdict hybrid_entangling(const HybridParams& p, const QuadratureSpec& spec = {}) {
    HybridVerdict v;
    v.entangling_rate = 2.0 * p.g;
    v.oscillator_noise_rate = momentum_diffusion(p.kernel, 1, spec) / (2.0 * p.M * p.omega * hbar);
    v.visibility_rate = p.gamma2;
    v.threshold_si = 2.0 * hybrid_coupling(p.M, p.m, p.d, p.delta_x, p.omega);
    v.sufficient = v.entangling_rate > v.oscillator_noise_rate + v.visibility_rate;
    return v;
}

}  // namespace gravnoise
