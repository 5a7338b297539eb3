#pragma once

// Radial reductions of the isotropic k-space integrals used by the framework,
// a global adaptive Gauss-Kronrod integrator, and a Monte Carlo 3-D oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "gravnoise/errors.hpp"
#include "gravnoise/units.hpp"

namespace gravnoise {

using RadialFunction = std::function<double(double)>;

struct QuadratureSpec {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;
    int max_subdivisions = 4000;
    /// Upper radial limit in 1/m. Zero means "use the kernel's own cutoff".
    double k_max = 0.0;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) {
            throw DomainError("quadrature rel_tol must lie in (0, 1e-3]");
        }
        if (!(abs_tol >= 0.0)) throw DomainError("quadrature abs_tol must be non-negative");
        if (max_subdivisions < 16) throw DomainError("quadrature max_subdivisions must be >= 16");
        if (!(k_max >= 0.0) || !std::isfinite(k_max)) {
            throw DomainError("quadrature k_max must be finite and non-negative");
        }
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// 21-point Kronrod rule with its embedded 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> gk21_x = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> gk21_wk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525966138, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> gk21_wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * gk21_wk[10];
    double gauss = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double dx = h * gk21_x[j];
        const double s = f(c - dx) + f(c + dx);
        kron += gk21_wk[j] * s;
        if (j % 2 == 1) gauss += gk21_wg[j / 2] * s;
    }
    kron *= h;
    gauss *= h;
    return {a, b, kron, std::abs(kron - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over the union of the
/// intervals [points[i], points[i+1]]. The segment with the largest error
/// estimate is bisected until sum(error) <= max(abs_tol, rel_tol*|value|).
template <class F>
QuadResult integrate_breakpoints(const F& f, const std::vector<double>& points,
                                 const QuadratureSpec& spec) {
    if (points.size() < 2) return {};
    std::priority_queue<detail::Segment> heap;
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        auto s = detail::gk21(f, points[i], points[i + 1]);
        value += s.value;
        error += s.error;
        heap.push(s);
    }
    const int budget = spec.max_subdivisions + static_cast<int>(points.size());
    auto tol = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(value)); };
    while (!heap.empty() && error > tol()) {
        if (static_cast<int>(heap.size()) >= budget) {
            std::ostringstream msg;
            msg << "adaptive quadrature did not converge after " << heap.size()
                << " subintervals (estimate " << value << ", error " << error << ")";
            throw NumericError(msg.str(), error);
        }
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split any further in double precision.
            std::ostringstream msg;
            msg << "adaptive quadrature hit the resolution limit near k=" << mid
                << " (error " << error << ")";
            throw NumericError(msg.str(), error);
        }
        auto left = detail::gk21(f, worst.a, mid);
        auto right = detail::gk21(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the rounding drift of the incremental updates.
    double v = 0.0, e = 0.0;
    const int n = static_cast<int>(heap.size());
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    return {v, e, n};
}

template <class F>
QuadResult integrate(const F& f, double a, double b, const QuadratureSpec& spec) {
    return integrate_breakpoints(f, std::vector<double>{a, b}, spec);
}

namespace detail {

inline double resolve_k_max(const QuadratureSpec& spec) {
    spec.validate();
    if (!(spec.k_max > 0.0)) throw DomainError("k_max must be positive for a radial moment");
    return spec.k_max;
}

/// Wraps f so that a negative sample aborts the integral.
inline auto non_negative(const RadialFunction& f) {
    return [&f](double k) {
        const double v = f(k);
        if (v < 0.0) {
            std::ostringstream msg;
            msg << "kernel is negative at k=" << k << " (f=" << v << ")";
            throw DomainError(msg.str());
        }
        return v;
    };
}

}  // namespace detail

/// 1 - sin(x)/x, with its Taylor series below x = 1e-4 where the direct form
/// loses every significant digit.
inline double one_minus_sinc(double x) {
    x = std::abs(x);
    if (x < 1e-4) {
        const double x2 = x * x;
        return x2 / 6.0 - x2 * x2 / 120.0;
    }
    return 1.0 - std::sin(x) / x;
}

/// int d^3k k_x^2 f(k) = (4 pi / 3) int_0^kmax k^4 f(k) dk.
///
/// With f in SI (m^3/s) this is d<p^2>/dt / hbar^2 for one mass.
inline QuadResult heating_moment_result(const RadialFunction& f, const QuadratureSpec& spec) {
    const double kmax = detail::resolve_k_max(spec);
    auto g = detail::non_negative(f);
    auto integrand = [&](double k) { return k * k * k * k * g(k); };
    auto r = integrate(integrand, 0.0, kmax, spec);
    r.value *= 4.0 * pi / 3.0;
    r.error *= 4.0 * pi / 3.0;
    return r;
}

inline double heating_moment(const RadialFunction& f, const QuadratureSpec& spec) {
    return heating_moment_result(f, spec).value;
}

/// int d^3k f(k) sin^2(k_x dx / 2) = 2 pi int_0^kmax k^2 f(k) (1 - sinc(k dx)) dk.
///
/// The radial range is split at the zeros k = n pi / dx of sin(k dx); when the
/// range spans many periods several periods share one starting interval so
/// the initial partition stays bounded.
inline QuadResult dephasing_moment_result(const RadialFunction& f, double dx,
                                          const QuadratureSpec& spec) {
    const double kmax = detail::resolve_k_max(spec);
    if (!(dx >= 0.0) || !std::isfinite(dx)) throw DomainError("delta_x must be non-negative");
    if (dx == 0.0) return {};
    auto g = detail::non_negative(f);
    auto integrand = [&](double k) { return k * k * g(k) * one_minus_sinc(k * dx); };

    std::vector<double> pts{0.0};
    const double period = pi / dx;
    const double n_periods = kmax / period;
    constexpr double max_initial = 2048.0;
    const double stride = std::max(1.0, std::ceil(n_periods / max_initial));
    for (double n = stride; n * period < kmax; n += stride) pts.push_back(n * period);
    pts.push_back(kmax);

    QuadratureSpec local = spec;
    local.max_subdivisions = std::max(spec.max_subdivisions, 4 * static_cast<int>(pts.size()));
    auto r = integrate_breakpoints(integrand, pts, local);
    r.value *= 2.0 * pi;
    r.error *= 2.0 * pi;
    return r;
}

inline double dephasing_moment(const RadialFunction& f, double dx, const QuadratureSpec& spec) {
    return dephasing_moment_result(f, dx, spec).value;
}

/// One entry of the hybrid-engine projection matrix,
///
///   D_nm = i^(n-m) / sqrt(n! m!) int d^3k f(k) exp(-k_x^2 s) (k_x^2 s)^((n+m)/2),
///
/// where s = hbar / (2 M omega) is the squared zero-point length. Entries with
/// n + m odd vanish because the integrand is odd in k_x; for n + m even the
/// phase i^(n-m) = (-1)^((n-m)/2) is real, so the result is returned as a
/// real number. The integral is evaluated as nested (k, cos theta) adaptive
/// quadrature with the polar integral folded onto [0, 1].
inline double gaussian_weighted_moment(const RadialFunction& f, int n, int m, double s,
                                       const QuadratureSpec& spec) {
    if (n < 1 || m < 1) throw DomainError("Fock indices of D_nm must be >= 1");
    detail::require_positive(s, "Gaussian width s");
    const double kmax = detail::resolve_k_max(spec);
    if ((n + m) % 2 != 0) return 0.0;
    const int p = (n + m) / 2;

    auto g = detail::non_negative(f);
    QuadratureSpec inner = spec;
    inner.abs_tol = 0.0;
    auto angular = [&](double k) {
        const double c = k * k * s;
        // int_0^1 exp(-c u^2) (c u^2)^p du
        auto h = [c, p](double u) {
            const double y = c * u * u;
            return std::exp(-y) * std::pow(y, p);
        };
        return integrate(h, 0.0, 1.0, inner).value;
    };
    auto integrand = [&](double k) {
        const double fk = g(k);
        if (fk == 0.0) return 0.0;
        return k * k * fk * angular(k);
    };
    auto r = integrate(integrand, 0.0, kmax, spec);
    const double log_fact = std::lgamma(n + 1.0) + std::lgamma(m + 1.0);
    const double sign = (((n - m) / 2) % 2 == 0) ? 1.0 : -1.0;
    return sign * 4.0 * pi * r.value / std::exp(0.5 * log_fact);
}

/// n-point Gauss-Legendre nodes and weights on [a, b] (Golub-Welsch).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule gauss_legendre_rule(int n, double a, double b) {
    if (n < 1) throw DomainError("Gauss-Legendre rule needs n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule r;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        r.nodes.push_back(mid + half * es.eigenvalues()(i));
        r.weights.push_back(2.0 * v0 * v0 * half);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle

using KSpaceIntegrand = std::function<double(double kx, double ky, double kz)>;

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Radial proposal for the Monte Carlo oracle. `uniform_ball` samples the
/// ball |k| <= radius uniformly; `exponential` draws |k| from the density
/// proportional to k^2 exp(-k / scale) over all of k-space, which suits
/// integrands with an exponential tail.
struct McProposal {
    enum class Kind { uniform_ball, exponential } kind = Kind::uniform_ball;
    double radius = 1.0;
    double scale = 1.0;

    static McProposal ball(double radius) { return {Kind::uniform_ball, radius, 1.0}; }
    static McProposal exponential_tail(double scale) { return {Kind::exponential, 0.0, scale}; }
};

/// Importance-sampled estimate of int d^3k F(k). Draws come from
/// std::mt19937_64 seeded with `seed`, so the result is bitwise reproducible
/// for a given (integrand, proposal, n_samples, seed).
inline McEstimate mc_oracle_3d(const KSpaceIntegrand& F, const McProposal& proposal,
                               std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 10000) throw DomainError("mc_oracle_3d needs at least 1e4 samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::gamma_distribution<double> radial_gamma(3.0, proposal.scale);

    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double cos_t = 2.0 * unit(rng) - 1.0;
        const double phi = 2.0 * pi * unit(rng);
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        double k = 0.0;
        double inv_pdf = 0.0;
        if (proposal.kind == McProposal::Kind::uniform_ball) {
            const double R = proposal.radius;
            k = R * std::cbrt(unit(rng));
            inv_pdf = 4.0 * pi * R * R * R / 3.0;
        } else {
            k = radial_gamma(rng);
            const double lam = 1.0 / proposal.scale;
            // pdf(k-vector) = lam^3 exp(-lam k) / (8 pi)
            inv_pdf = 8.0 * pi * std::exp(lam * k) / (lam * lam * lam);
        }
        const double val = F(k * sin_t * std::cos(phi), k * sin_t * std::sin(phi), k * cos_t) * inv_pdf;
        const double delta = val - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (val - mean);
    }
    const double var = m2 / static_cast<double>(n_samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

}  // namespace gravnoise
