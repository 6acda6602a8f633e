#pragma once

#include <numbers>

namespace penning {

/// CODATA-2018 values, SI units. Every formula in the library reads from here.
struct PhysicalConstants {
    double electron_charge;       // C
    double electron_mass;         // kg
    double g_factor;              // dimensionless, |g| of the free electron
    double bohr_magneton;         // J/T
    double reduced_planck;        // J s
    double boltzmann;             // J/K
    double vacuum_permittivity;   // F/m
    double speed_of_light;        // m/s
};

inline constexpr PhysicalConstants codata2018{
    .electron_charge = 1.602176634e-19,
    .electron_mass = 9.1093837015e-31,
    .g_factor = 2.00231930436,
    .bohr_magneton = 9.2740100783e-24,
    .reduced_planck = 1.054571817e-34,
    .boltzmann = 1.380649e-23,
    .vacuum_permittivity = 8.8541878128e-12,
    .speed_of_light = 299792458.0,
};

namespace constants {
inline constexpr double e = codata2018.electron_charge;
inline constexpr double m_e = codata2018.electron_mass;
inline constexpr double g = codata2018.g_factor;
inline constexpr double mu_B = codata2018.bohr_magneton;
inline constexpr double hbar = codata2018.reduced_planck;
inline constexpr double k_B = codata2018.boltzmann;
inline constexpr double eps0 = codata2018.vacuum_permittivity;
inline constexpr double c = codata2018.speed_of_light;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
} // namespace constants

inline constexpr double to_hz(double omega) { return omega / constants::two_pi; }
inline constexpr double to_rad_per_s(double hz) { return hz * constants::two_pi; }

} // namespace penning
