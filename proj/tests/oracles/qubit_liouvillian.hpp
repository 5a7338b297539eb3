#pragma once

// Two-qubit master equation written out as a 16x16 superoperator from its
// operators, then exponentiated. Shares nothing with the analytic propagator
// except the rate values.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <complex>

#include "gravnoise/qubit_engine.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat4c = Eigen::Matrix4cd;
using Mat16c = Eigen::Matrix<cplx, 16, 16>;

// Column-stacking: vec(A X B) = (B^T kron A) vec(X).
inline Mat16c kron(const Mat4c& A, const Mat4c& B) {
    Mat16c K;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) K.block<4, 4>(4 * i, 4 * j) = A(i, j) * B;
    return K;
}

inline Mat16c sandwich(const Mat4c& A, const Mat4c& B) { return kron(B.transpose(), A); }

// Basis order |++>, |+->, |-+>, |-->.
inline Mat4c sigma_z_first() { return Eigen::Vector4cd(1, 1, -1, -1).asDiagonal(); }
inline Mat4c sigma_z_second() { return Eigen::Vector4cd(1, -1, 1, -1).asDiagonal(); }

/// H = c sz1 sz2, dephasing Gamma_a (sz_a rho sz_a - rho), correlated
/// term -b [sz1, [sz2, rho]].
inline Mat16c qubit_liouvillian(const gravnoise::QubitRates& r) {
    const Mat4c I = Mat4c::Identity();
    const Mat4c s1 = sigma_z_first(), s2 = sigma_z_second();
    const Mat4c H = r.coupling * s1 * s2;
    const cplx i(0.0, 1.0);
    Mat16c L = -i * (sandwich(H, I) - sandwich(I, H));
    L += r.gamma1 * (sandwich(s1, s1) - Mat16c::Identity());
    L += r.gamma2 * (sandwich(s2, s2) - Mat16c::Identity());
    const Mat16c dc = sandwich(s1 * s2, I) - sandwich(s1, s2) - sandwich(s2, s1) + sandwich(I, s2 * s1);
    L -= r.beta_term * dc;
    return L;
}

inline Mat4c evolve(const Mat4c& rho0, const gravnoise::QubitRates& r, double t) {
    const Mat16c E = (qubit_liouvillian(r) * t).exp();
    Eigen::Matrix<cplx, 16, 1> v = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(rho0.data());
    Eigen::Matrix<cplx, 16, 1> w = E * v;
    return Eigen::Map<Mat4c>(w.data());
}

}  // namespace oracle
