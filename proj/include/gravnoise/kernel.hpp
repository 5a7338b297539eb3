#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gravnoise/errors.hpp"
#include "gravnoise/quadrature.hpp"
#include "gravnoise/units.hpp"

namespace gravnoise {

/// The reduced description of a gravity model: per-mass isotropic kick
/// densities f1, f2 (SI, m^3/s, supported on (0, k_max]), the correlated
/// coefficient beta(d) in N/m, and optional quadratic single-body diffusion
/// coefficients c1, c2 in N/m.
///
/// Conventions for the generator this stands for, in SI:
///
///   drho/dt = -i/hbar [H, rho]
///             + sum_a int d^3k f_a(k) (e^{ik.x_a} rho e^{-ik.x_a} - rho)
///             - (beta/hbar) [x_1, [x_2, rho]]
///             - sum_a (c_a / 2hbar) [x_a, [x_a, rho]]
///
/// which gives d<p_a^2>/dt = hbar^2 int k_x^2 f_a + hbar c_a and
/// d<p_1 p_2>/dt = hbar beta. The c_a terms are the quadratic (Gaussian)
/// limit of a kick density and describe models whose single-body noise is
/// already expanded to second order in position.
struct DissipationKernel {
    std::string model = "custom";
    RadialFunction f1 = [](double) { return 0.0; };
    RadialFunction f2 = [](double) { return 0.0; };
    double k_max = 1.0;
    std::function<double(double)> beta = [](double) { return 0.0; };
    double c1 = 0.0;
    double c2 = 0.0;
    /// True when f1 and f2 vanish identically; lets callers skip quadrature.
    bool kicks_vanish = false;
    std::map<std::string, double> parameters;
    std::vector<std::string> flags;

    const RadialFunction& f(int which) const { return which == 1 ? f1 : f2; }
    double c(int which) const { return which == 1 ? c1 : c2; }

    QuadratureSpec spec_for(const QuadratureSpec& base) const {
        QuadratureSpec s = base;
        if (!(s.k_max > 0.0)) s.k_max = k_max;
        return s;
    }
};

/// d<p_a^2>/dt in N^2/Hz (kg^2 m^2 / s^3) for mass `which` (1 or 2).
inline double momentum_diffusion(const DissipationKernel& K, int which,
                                 const QuadratureSpec& spec = {}) {
    double kicks = 0.0;
    if (!K.kicks_vanish) kicks = hbar * hbar * heating_moment(K.f(which), K.spec_for(spec));
    return kicks + hbar * K.c(which);
}

/// Single-body dephasing rate (1/s) of a two-position superposition with
/// separation dx, i.e. the decay constant of |<sigma^->| under that mass's
/// share of the dissipator.
inline double dephasing_rate(const DissipationKernel& K, int which, double dx,
                             const QuadratureSpec& spec = {}) {
    double kicks = 0.0;
    if (!K.kicks_vanish) kicks = dephasing_moment(K.f(which), dx, K.spec_for(spec));
    return kicks + K.c(which) * dx * dx / (4.0 * hbar);
}

// ---------------------------------------------------------------------------
// Tabulated kernels

/// Piecewise-linear interpolant over strictly increasing abscissae; zero
/// outside the table.
class LinearTable {
public:
    LinearTable(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        if (x_.size() != y_.size() || x_.size() < 2) {
            throw DomainError("tabulated kernel needs at least two (k, f) samples of equal length");
        }
        for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
            if (!(x_[i + 1] > x_[i])) throw DomainError("tabulated k samples must be strictly increasing");
        }
        if (x_.front() < 0.0) throw DomainError("tabulated k samples must be non-negative");
        for (double v : y_) {
            if (!(v >= 0.0)) throw DomainError("tabulated kernel values must be non-negative");
        }
    }

    double operator()(double k) const {
        if (k < x_.front() || k > x_.back()) return 0.0;
        auto it = std::upper_bound(x_.begin(), x_.end(), k);
        if (it == x_.end()) return y_.back();
        const auto i = static_cast<std::size_t>(it - x_.begin());
        const double t = (k - x_[i - 1]) / (x_[i] - x_[i - 1]);
        return y_[i - 1] + t * (y_[i] - y_[i - 1]);
    }

    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_, y_;
};

inline DissipationKernel custom_kernel(std::vector<double> k, std::vector<double> f1,
                                       std::vector<double> f2, double beta) {
    if (!std::isfinite(beta)) throw DomainError("custom beta must be finite");
    LinearTable t1(k, std::move(f1));
    LinearTable t2(std::move(k), std::move(f2));
    DissipationKernel K;
    K.model = "custom";
    K.k_max = t1.x_max();
    K.f1 = t1;
    K.f2 = t2;
    K.beta = [beta](double) { return beta; };
    K.parameters["beta"] = beta;
    return K;
}

}  // namespace gravnoise
