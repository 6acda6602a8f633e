#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "penning/physics_core.hpp"

using namespace penning;
using penning::constants::two_pi;

TEST(PhysicsCore, ConstantsAreSane)
{
    const auto& c = codata2018;
    for (double v : {c.electron_charge, c.electron_mass, c.bohr_magneton, c.reduced_planck, c.boltzmann,
                     c.vacuum_permittivity, c.speed_of_light})
        EXPECT_GT(v, 0.0);
    EXPECT_GT(c.g_factor, 2.0);
    EXPECT_LT(c.g_factor, 2.01);
}

TEST(PhysicsCore, CyclotronFrequency)
{
    EXPECT_NEAR(to_hz(cyclotron_frequency(3.0)), 83.977e9, 0.01e9);
    EXPECT_NEAR(to_hz(cyclotron_frequency(1.0)), 27.99e9, 0.01e9);
    EXPECT_DOUBLE_EQ(cyclotron_frequency(6.0), 2.0 * cyclotron_frequency(3.0));
    EXPECT_THROW(cyclotron_frequency(0.0), InvalidInput);
    EXPECT_THROW(cyclotron_frequency(-1.0), InvalidInput);
}

TEST(PhysicsCore, AxialFrequencyIdeal)
{
    // Invert for exactly 100 MHz: U = m d^2 w^2 / (2e).
    const double w = two_pi * 1e8;
    const double d = 1e-3;
    const double U = constants::m_e * d * d * w * w / (2.0 * constants::e);
    EXPECT_NEAR(axial_frequency_ideal(U, d) / w, 1.0, 1e-14);
    EXPECT_NEAR(axial_frequency_ideal(4.0 * U, d), 2.0 * axial_frequency_ideal(U, d), 1e-6);
    EXPECT_NEAR(to_hz(axial_frequency_ideal(1.0, 1e-3)), 94.394e6, 0.001e6);
    EXPECT_THROW(axial_frequency_ideal(0.0, 1e-3), InvalidInput);
    EXPECT_THROW(axial_frequency_ideal(1.0, -1e-3), InvalidInput);
}

TEST(PhysicsCore, RadialFrequencies)
{
    const auto free = radial_frequencies(1e11, 0.0);
    EXPECT_DOUBLE_EQ(free.reduced_cyclotron, 1e11);
    EXPECT_DOUBLE_EQ(free.magnetron, 0.0);

    const auto r = radial_frequencies(two_pi * 84e9, two_pi * 100e6);
    EXPECT_NEAR(to_hz(r.magnetron), 59.52e3, 0.01e3);

    EXPECT_THROW(radial_frequencies(1.0, 0.7072), StabilityViolation);
    EXPECT_NO_THROW(radial_frequencies(1.0, 0.7071));
    EXPECT_THROW(radial_frequencies(1.0, 1.0), StabilityViolation);
}

TEST(PhysicsCore, FrequencyIdentitiesAndHierarchyOnRandomInputs)
{
    std::mt19937_64 rng(20231016);
    std::uniform_real_distribution<double> logB(-1.0, 1.0);
    // omega_z < omega_+ requires omega_z < 2 omega_c / 3, i.e. 0.94 of the stability limit.
    std::uniform_real_distribution<double> frac(1e-6, 0.9);
    for (int i = 0; i < 10000; ++i) {
        const double B0 = std::pow(10.0, logB(rng));
        const double wc = cyclotron_frequency(B0);
        const double wz = frac(rng) * wc / std::sqrt(2.0);
        const auto f = mode_frequencies(B0, wz);
        ASSERT_LE(std::abs(f.reduced_cyclotron + f.magnetron - f.cyclotron) / f.cyclotron, 1e-12);
        ASSERT_LE(std::abs(f.reduced_cyclotron * f.magnetron - 0.5 * wz * wz) / (0.5 * wz * wz), 1e-12);
        ASSERT_LT(f.magnetron, f.axial);
        ASSERT_LT(f.axial, f.reduced_cyclotron);
        ASSERT_LT(f.reduced_cyclotron, f.larmor);
    }
}

TEST(PhysicsCore, MotionalEnergyLadders)
{
    const auto f = mode_frequencies(3.0, two_pi * 100e6);
    const double hb = constants::hbar;
    EXPECT_NEAR(motional_energy(0, 0, 0, f), 0.5 * hb * (f.reduced_cyclotron + f.axial - f.magnetron), 1e-35);
    EXPECT_NEAR(motional_energy(1, 0, 0, f) - motional_energy(0, 0, 0, f), hb * f.reduced_cyclotron,
                1e-12 * hb * f.reduced_cyclotron);
    EXPECT_NEAR(motional_energy(0, 3, 0, f) - motional_energy(0, 2, 0, f), hb * f.axial, 1e-9 * hb * f.axial);
    double prev = motional_energy(0, 0, 0, f);
    for (int n = 1; n < 50; ++n) {
        const double e = motional_energy(0, 0, n, f);
        EXPECT_LT(e, prev);
        EXPECT_NEAR(prev - e, hb * f.magnetron, 1e-6 * hb * f.magnetron);
        prev = e;
    }
    EXPECT_THROW(motional_energy(-1, 0, 0, f), InvalidInput);
}

TEST(PhysicsCore, LarmorFrequency)
{
    for (double B : {0.1, 1.0, 3.0, 7.0})
        EXPECT_NEAR(larmor_frequency(B) / cyclotron_frequency(B), constants::g / 2.0, 1e-15);
    EXPECT_NEAR(to_hz(larmor_frequency(3.0)), 84.07e9, 0.01e9);
    EXPECT_NEAR(to_hz(larmor_frequency(3.5682)), 100.0e9, 0.01e9);
    EXPECT_THROW(larmor_frequency(0.0), InvalidInput);
}

namespace {
// Exact spin-dependent axial frequencies of the quadratic potential.
double exact_shift(double B2, double wz, int spin)
{
    const double k = constants::g * constants::mu_B * B2 / constants::m_e;
    return spin * k / (std::sqrt(wz * wz + spin * k) + wz);  // cancellation-free form
}
} // namespace

TEST(PhysicsCore, BottleShift)
{
    const double wz = two_pi * 100e6;
    const auto zero = bottle_shift(0.0, wz);
    EXPECT_EQ(zero.up, 0.0);
    EXPECT_EQ(zero.down, 0.0);

    // B2 giving a relative shift of 1e-6, obtained by inverting the exact eigenfrequency.
    const double target = 1e-6;
    const double k = std::pow(wz * (1.0 + target), 2) - wz * wz;
    const double B2 = k * constants::m_e / (constants::g * constants::mu_B);
    EXPECT_NEAR(B2, 3.873e4, 0.001e4);
    const auto s = bottle_shift(B2, wz);
    EXPECT_NEAR(s.up / wz, target, 1e-6 * target);
    EXPECT_DOUBLE_EQ(s.up, -s.down);

    // Below the limit the first-order value is off from the exact one by about rel / 2.
    for (double rel : {1e-8, 1e-6, 1e-5, 1e-4}) {
        const double b2 = 2.0 * rel * constants::m_e * wz * wz / (constants::g * constants::mu_B);
        const auto sh = bottle_shift(b2, wz);
        EXPECT_NEAR(sh.up / exact_shift(b2, wz, +1), 1.0, 0.6 * rel);
        EXPECT_NEAR(sh.down / exact_shift(b2, wz, -1), 1.0, 0.6 * rel);
    }
    // Beyond the limit the exact value is returned.
    const double big = 2.0 * 1e-2 * constants::m_e * wz * wz / (constants::g * constants::mu_B);
    EXPECT_NEAR(bottle_shift(big, wz).up, exact_shift(big, wz, +1), 1e-9 * wz);
    EXPECT_NEAR(bottle_shift(big, wz).down, exact_shift(big, wz, -1), 1e-9 * wz);
    EXPECT_THROW(bottle_shift(1.0, 0.0), InvalidInput);
}

TEST(PhysicsCore, GradientSiteFrequencies)
{
    const std::vector<double> xs{-1e-3, 0.0, 1e-3, 2e-3};
    const auto flat = gradient_site_frequencies(0.0, 3.0, xs);
    for (double w : flat)
        EXPECT_EQ(w, flat.front());

    const auto f = gradient_site_frequencies(50.0, 3.0, xs);
    EXPECT_NEAR(to_hz(f[2] - f[1]), 1.401e9, 0.001e9);
    for (std::size_t i = 1; i < f.size(); ++i)
        EXPECT_GT(f[i], f[i - 1]);

    const std::vector<double> far{-0.1};
    EXPECT_THROW(gradient_site_frequencies(50.0, 3.0, far), InvalidInput);
    const std::vector<double> bad{std::nan("")};
    EXPECT_THROW(gradient_site_frequencies(50.0, 3.0, bad), InvalidInput);
}
