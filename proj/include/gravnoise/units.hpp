#pragma once

// Physical constants and the unit convention shared by every module.
//
// Everything is SI internally. Formulas that are naturally written with
// hbar = 1 get explicit hbar factors at the point of transcription. The two
// conversions that matter are
//
//   * force-noise densities:  S_FF[SI] = hbar * S_FF[natural]
//   * kick-rate densities f(k): f[SI, m^3/s] = f[natural] / hbar
//
// so that a kernel f in SI gives d<p^2>/dt = hbar^2 * int d^3k k_x^2 f(k).

#include <algorithm>
#include <cmath>

#include "gravnoise/errors.hpp"

namespace gravnoise {

struct PhysicalConstants {
    static constexpr double G_N = 6.674e-11;                 // m^3 kg^-1 s^-2
    static constexpr double hbar = 1.054571817e-34;          // J s
    static constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
};

inline constexpr double G_N = PhysicalConstants::G_N;
inline constexpr double hbar = PhysicalConstants::hbar;
inline constexpr double amu = PhysicalConstants::atomic_mass_unit;
inline constexpr double pi = 3.14159265358979323846;

namespace detail {

inline void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be positive and finite");
    }
}

/// Number of steps of size dt needed to cover t_final; a remainder below
/// 1e-9 dt is absorbed into the last full step instead of adding a sliver.
inline long step_count(double t_final, double dt) {
    const double r = t_final / dt;
    const double whole = std::floor(r + 1e-9);
    return static_cast<long>(r - whole > 1e-9 ? whole + 1.0 : std::max(whole, 0.0));
}

inline void require_non_negative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be non-negative and finite");
    }
}

}  // namespace detail

/// Ground-state spreads of an oscillator; p0 * x0 == hbar.
struct ZeroPointScales {
    double p0;  // kg m / s
    double x0;  // m
};

inline ZeroPointScales zero_point_scales(double m, double omega) {
    detail::require_positive(m, "mass");
    detail::require_positive(omega, "omega");
    return {std::sqrt(m * omega * hbar), std::sqrt(hbar / (m * omega))};
}

/// Newtonian coupling alpha_G = G m1 m2 / d^3, in N/m.
inline double alpha_g(double m1, double m2, double d) {
    detail::require_positive(m1, "m1");
    detail::require_positive(m2, "m2");
    detail::require_positive(d, "d");
    return G_N * m1 * m2 / (d * d * d);
}

/// Coupling rate g = alpha_G / (p10 p20) * hbar of two oscillators.
///
/// With p_a0 = sqrt(m_a w_a hbar) the hbar in hbar/(p10 p20) cancels, leaving
/// alpha_G / sqrt(m1 w1 m2 w2), which is already in 1/s.
inline double g_rate_oscillators(double m1, double omega1, double m2, double omega2,
                                 double d) {
    detail::require_positive(omega1, "omega1");
    detail::require_positive(omega2, "omega2");
    return alpha_g(m1, m2, d) / std::sqrt(m1 * omega1 * m2 * omega2);
}

/// sqrt(S_FF)/m, the acceleration amplitude spectral density in m/s^2/sqrt(Hz).
inline double force_noise_to_acceleration_asd(double S_FF, double m) {
    detail::require_non_negative(S_FF, "S_FF");
    detail::require_positive(m, "mass");
    return std::sqrt(S_FF) / m;
}

inline double acceleration_asd_to_force_noise(double S_aa_sqrt, double m) {
    detail::require_non_negative(S_aa_sqrt, "acceleration ASD");
    detail::require_positive(m, "mass");
    return m * m * S_aa_sqrt * S_aa_sqrt;
}

// Conversions between the hbar = 1 form of a quantity and SI.
inline constexpr double sff_from_natural(double s_natural) { return s_natural * hbar; }
inline constexpr double sff_to_natural(double s_si) { return s_si / hbar; }
inline constexpr double kick_density_from_natural(double f_natural) { return f_natural / hbar; }
inline constexpr double kick_density_to_natural(double f_si) { return f_si * hbar; }
/// A coupling written as energy/length^2 (alpha_G, beta) turns into an
/// angular-frequency scale when divided by hbar and multiplied by length^2.
inline constexpr double rate_from_energy(double energy) { return energy / hbar; }
inline constexpr double energy_from_rate(double rate) { return rate * hbar; }

}  // namespace gravnoise
