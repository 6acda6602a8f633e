#pragma once

// Qubit-qubit coupling strengths: gradient-mediated spin-spin Ising coupling
// and wire-mediated exchange between axial modes of two traps.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

/// Ising coupling J (Hz) between two spins a distance d apart in a field
/// gradient b, both electrons with axial frequency omega_z.
inline double spin_spin_J(double b, double omega_z, double d)
{
    using namespace constants;
    if (!(d > 0.0))
        throw InvalidInput("spin_spin_J: distance must be positive");
    if (!(omega_z > 0.0))
        throw InvalidInput("spin_spin_J: omega_z must be positive");
    const double prefactor = (1.0 / (4.0 * pi * eps0)) * (g * g * mu_B * mu_B * e * e) / (2.0 * pi * hbar * m_e * m_e);
    const double w2 = omega_z * omega_z;
    return prefactor * b * b / (w2 * w2 * d * d * d);
}

struct Site {
    double x;  // m
    double y;  // m
};

struct ArrayLayout {
    std::vector<Site> sites;
    double gradient;  // T/m
    double omega_z;   // rad/s
};

/// Symmetric coupling matrix in Hz with zero diagonal.
inline Eigen::MatrixXd j_matrix(const ArrayLayout& layout)
{
    if (layout.gradient < 0.0)
        throw InvalidInput("j_matrix: gradient must be non-negative");
    const auto n = static_cast<Eigen::Index>(layout.sites.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(n, 1), std::max<Eigen::Index>(n, 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const auto& a = layout.sites[static_cast<std::size_t>(i)];
            const auto& b = layout.sites[static_cast<std::size_t>(j)];
            const double d = std::hypot(a.x - b.x, a.y - b.y);
            if (!(d > 0.0))
                throw InvalidInput("j_matrix: sites " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
            J(i, j) = J(j, i) = spin_spin_J(layout.gradient, layout.omega_z, d);
        }
    }
    return J;
}

/// Axial derivative of the image-charge fraction induced on a disk of radius
/// R0 by a charge at height h: R0^2 / (h^2 + R0^2)^{3/2}, in 1/m.
inline double pickup_coefficient(double R0, double h)
{
    if (!(R0 > 0.0) || !(h > 0.0))
        throw InvalidInput("pickup_coefficient: R0 and h must be positive");
    const double s = h * h + R0 * R0;
    return R0 * R0 / (s * std::sqrt(s));
}

/// h / R0 used when a trap height is not given: the two-figure scaling rule of
/// the compensated three-electrode trap (R1 = 2 R0, R2 = 3 R0, outer ring
/// nulling c4). The full electrostatic solution gives 0.78135.
inline constexpr double kCompensatedHeightRatio = 0.78;

enum class CapacitanceRule {
    Layout,          // C0 = R0 x 100 fF/mm, Cw = d x 66 fF/mm
    SelfCapacitance, // C0 = pi eps0 R0, Cw as above
};

struct Capacitances {
    double electrode;  // C0, F
    double wire;       // Cw, F
};

inline constexpr double kElectrodeCapacitancePerLength = 100e-15 / 1e-3;  // F/m
inline constexpr double kWireCapacitancePerLength = 66e-15 / 1e-3;        // F/m

inline Capacitances default_capacitances(double R0, double d, CapacitanceRule rule = CapacitanceRule::Layout)
{
    if (!(R0 > 0.0) || !(d > 0.0))
        throw InvalidInput("default_capacitances: R0 and d must be positive");
    const double c0 = rule == CapacitanceRule::Layout ? R0 * kElectrodeCapacitancePerLength
                                                      : constants::pi * constants::eps0 * R0;
    return {c0, d * kWireCapacitancePerLength};
}

struct WireLink {
    double R0_1, R0_2;  // m
    double h_1, h_2;    // m
    double length;      // m
    double C0_1, C0_2;  // F
    double C_w;         // F
    double R_w;         // Ohm
    double omega_z;     // rad/s

    /// Identical traps, layout capacitances, h = height_ratio x R0.
    static WireLink symmetric(double R0, double d, double omega_z, double R_w = 1e-3,
                              double height_ratio = kCompensatedHeightRatio)
    {
        const auto caps = default_capacitances(R0, d);
        const double h = height_ratio * R0;
        return {R0, R0, h, h, d, caps.electrode, caps.electrode, caps.wire, R_w, omega_z};
    }

    void validate() const
    {
        if (!(R0_1 > 0.0 && R0_2 > 0.0 && h_1 > 0.0 && h_2 > 0.0 && length > 0.0 && C0_1 > 0.0 && C0_2 > 0.0
              && C_w > 0.0 && R_w > 0.0 && omega_z > 0.0))
            throw InvalidInput("WireLink: all parameters must be positive");
    }
};

/// Exchange rate Omega_12 (rad/s) of the two axial modes:
///     e^2 alpha_1 alpha_2 / (2 m omega_z (C0_1 + C0_2 + C_w)).
inline double wire_coupling(const WireLink& link)
{
    link.validate();
    const double a1 = pickup_coefficient(link.R0_1, link.h_1);
    const double a2 = pickup_coefficient(link.R0_2, link.h_2);
    const double c_total = link.C0_1 + link.C0_2 + link.C_w;
    return constants::e * constants::e * a1 * a2 / (2.0 * constants::m_e * link.omega_z * c_total);
}

inline double swap_time(double omega12)
{
    if (!(omega12 > 0.0))
        throw InvalidInput("swap_time: coupling must be positive");
    return constants::pi / omega12;
}

/// Number of SWAP gates per decoherence time of a resistive wire link.
inline double n_max(double T, double R_w, double C0, double C_w)
{
    if (!(T > 0.0 && R_w > 0.0 && C0 > 0.0 && C_w > 0.0))
        throw InvalidInput("n_max: temperature, resistance and capacitances must be positive");
    using namespace constants;
    return 3.0 * hbar / (4.0 * pi * k_B * T * R_w * (2.0 * C0 + C_w));
}

inline double n_max(double T, const WireLink& link)
{
    return n_max(T, link.R_w, 0.5 * (link.C0_1 + link.C0_2), link.C_w);
}

} // namespace penning
