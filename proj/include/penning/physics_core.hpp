#pragma once

// Closed-form single-electron frequencies and energies in an ideal Penning trap.
// Angular frequencies are rad/s throughout.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

struct ModeFrequencies {
    double cyclotron;          // omega_c
    double reduced_cyclotron;  // omega_+
    double magnetron;          // omega_-
    double axial;              // omega_z
    double larmor;             // omega_L
};

struct RadialPair {
    double reduced_cyclotron;
    double magnetron;
};

inline double cyclotron_frequency(double B0)
{
    if (!(B0 > 0.0) || !std::isfinite(B0))
        throw InvalidInput("cyclotron_frequency: B0 must be positive, got " + std::to_string(B0));
    return constants::e * B0 / constants::m_e;
}

inline double larmor_frequency(double B0)
{
    if (!(B0 > 0.0) || !std::isfinite(B0))
        throw InvalidInput("larmor_frequency: B0 must be positive, got " + std::to_string(B0));
    return constants::g * constants::e * B0 / (2.0 * constants::m_e);
}

/// omega_z = sqrt(2 e U / (m d^2)) for an ideal hyperbolic trap of size d.
inline double axial_frequency_ideal(double U, double d)
{
    if (!(U > 0.0))
        throw InvalidInput("axial_frequency_ideal: U must be positive (no axial confinement)");
    if (!(d > 0.0))
        throw InvalidInput("axial_frequency_ideal: d must be positive");
    return std::sqrt(2.0 * constants::e * U / (constants::m_e * d * d));
}

/// Reduced-cyclotron and magnetron roots. The magnetron root is computed as
/// omega_z^2 / (2 omega_+) to avoid cancellation when omega_z << omega_c.
inline RadialPair radial_frequencies(double omega_c, double omega_z)
{
    if (!(omega_c > 0.0) || omega_z < 0.0)
        throw InvalidInput("radial_frequencies: need omega_c > 0 and omega_z >= 0");
    const double disc = omega_c * omega_c - 2.0 * omega_z * omega_z;
    if (!(disc > 0.0))
        throw StabilityViolation("radial_frequencies: omega_c^2 <= 2 omega_z^2, radial motion unbound");
    const double plus = 0.5 * (omega_c + std::sqrt(disc));
    const double minus = omega_z * omega_z / (2.0 * plus);
    return {plus, minus};
}

inline ModeFrequencies mode_frequencies(double B0, double omega_z)
{
    const double wc = cyclotron_frequency(B0);
    const auto [plus, minus] = radial_frequencies(wc, omega_z);
    return {wc, plus, minus, omega_z, larmor_frequency(B0)};
}

/// Motional energy; the magnetron ladder enters with a negative sign.
inline double motional_energy(int n_plus, int n_z, int n_minus, const ModeFrequencies& f)
{
    if (n_plus < 0 || n_z < 0 || n_minus < 0)
        throw InvalidInput("motional_energy: quantum numbers must be non-negative");
    const double hb = constants::hbar;
    return hb * f.reduced_cyclotron * (n_plus + 0.5) + hb * f.axial * (n_z + 0.5)
         - hb * f.magnetron * (n_minus + 0.5);
}

struct BottleShift {
    double up;    // shift of omega_z for spin up
    double down;  // shift of omega_z for spin down
};

/// Threshold above which bottle_shift abandons the first-order expansion.
inline constexpr double kBottleFirstOrderLimit = 1e-4;

/// Spin-conditioned axial shift from a magnetic bottle B_z = B0 + B2 z^2.
///
/// The spin energy +-(g/2) mu_B B2 z^2 adds to (1/2) m omega_z^2 z^2, so the
/// exact frequencies are sqrt(omega_z^2 +- g mu_B B2 / m). The first-order
/// value +-g mu_B B2 / (2 m omega_z) is returned while it stays below
/// kBottleFirstOrderLimit relative; beyond that the exact difference is used.
inline BottleShift bottle_shift(double B2, double omega_z)
{
    if (!(omega_z > 0.0))
        throw InvalidInput("bottle_shift: omega_z must be positive");
    const double k = constants::g * constants::mu_B * B2 / constants::m_e;  // rad^2/s^2
    const double first = k / (2.0 * omega_z);
    if (std::abs(first) / omega_z <= kBottleFirstOrderLimit)
        return {first, -first};
    const double w2 = omega_z * omega_z;
    if (!(w2 + k > 0.0) || !(w2 - k > 0.0))
        throw InvalidInput("bottle_shift: bottle strength removes axial confinement for one spin state");
    return {std::sqrt(w2 + k) - omega_z, std::sqrt(w2 - k) - omega_z};
}

/// Larmor frequency at each site of a linear field gradient B0 + b x.
inline std::vector<double> gradient_site_frequencies(double b, double B0, std::span<const double> positions)
{
    std::vector<double> out;
    out.reserve(positions.size());
    for (double x : positions) {
        if (!std::isfinite(x))
            throw InvalidInput("gradient_site_frequencies: non-finite site position");
        const double B = B0 + b * x;
        if (!(B > 0.0))
            throw InvalidInput("gradient_site_frequencies: field changes sign at x = " + std::to_string(x));
        out.push_back(constants::g * constants::e * B / (2.0 * constants::m_e));
    }
    return out;
}

} // namespace penning
