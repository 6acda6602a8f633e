#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "penning/decoherence.hpp"

using namespace penning;
using constants::two_pi;

namespace {

const double kAxial = two_pi * 100e6;

/// Field at which the Larmor frequency is 100 GHz, with a 100 MHz axial mode.
ModeFrequencies hundred_gigahertz_modes()
{
    return mode_frequencies(3.5682, kAxial);
}

NoiseEnvironment budget_environment()
{
    NoiseEnvironment env;
    env.temperature = 0.1;
    env.dc_voltage_stability = 6e-8;
    env.voltage_noise_rel_psd = 1e-22;
    env.magnetic_noise_rel_psd = 1e-22;
    env.magnetic.model = SpectrumModel::VacuumMagnetic;
    env.electric.model = SpectrumModel::GoldElectrode;
    return env;
}

bool within_factor_two(double value, double quoted)
{
    return value >= 0.5 * quoted && value <= 2.0 * quoted;
}

} // namespace

TEST(Decoherence, CyclotronDecay)
{
    const double g = cyclotron_decay_rate(two_pi * 100e9);
    EXPECT_NEAR(g, 4.95, 0.01);
    EXPECT_GE(g, 1.0);
    EXPECT_LE(g, 10.0);
    EXPECT_NEAR(cyclotron_decay_rate(two_pi * 200e9) / g, 4.0, 1e-12);
    EXPECT_EQ(cyclotron_decay_rate(0.0), 0.0);
    EXPECT_THROW(cyclotron_decay_rate(-1.0), InvalidInput);
}

TEST(Decoherence, SuppressionRatio)
{
    const double r = spin_suppression_ratio(two_pi * 100e9);
    EXPECT_NEAR(r, 8.09e-10, 0.01e-10);
    EXPECT_GE(r, 1e-10);
    EXPECT_LE(r, 1e-8);
}

TEST(Decoherence, SpinFlipRates)
{
    const auto zero = spin_flip_rates(0.0, 0.0);
    EXPECT_EQ(zero.gamma_minus, 0.0);
    EXPECT_EQ(zero.gamma_plus, 0.0);

    const double s = 1e-20;
    const auto flat = spin_flip_rates(s, s);
    EXPECT_DOUBLE_EQ(flat.gamma_minus, flat.gamma_plus);
    EXPECT_DOUBLE_EQ(flat.gamma_minus, kSpinNoiseCoupling * s);
    EXPECT_DOUBLE_EQ(flat.flip_up(), 2.0 * flat.gamma_minus);
    EXPECT_DOUBLE_EQ(flat.coherence_decay(), 6.0 * flat.gamma_minus);

    // S_B(+wL) feeds Gamma_+, S_B(-wL) feeds Gamma_-.
    const auto skew = spin_flip_rates(2.0 * s, s);
    EXPECT_DOUBLE_EQ(skew.gamma_plus, 2.0 * skew.gamma_minus);
    EXPECT_THROW(spin_flip_rates(-1.0, 0.0), InvalidInput);
    EXPECT_THROW(spin_flip_rates(0.0, -1.0), InvalidInput);
}

TEST(Decoherence, AxialHeating)
{
    EXPECT_EQ(axial_heating_rate(0.0, kAxial), 0.0);
    const double S_E = 10.0 * 2.0 * constants::hbar * constants::m_e * kAxial / (constants::e * constants::e);
    EXPECT_NEAR(S_E, 4.70e-17, 0.01e-17);
    EXPECT_NEAR(axial_heating_rate(S_E, kAxial), 10.0, 1e-12);
    EXPECT_NEAR(axial_heating_rate(S_E, 2.0 * kAxial), 5.0, 1e-12);
    EXPECT_THROW(axial_heating_rate(-1.0, kAxial), InvalidInput);
    EXPECT_THROW(axial_heating_rate(1.0, 0.0), InvalidInput);
}

TEST(Decoherence, JohnsonSpectrum)
{
    const auto s = johnson_voltage_spectrum(0.1, 100e3, kAxial);
    EXPECT_NEAR(s.value, 2.761e-19, 0.001e-19);
    EXPECT_TRUE(s.low_frequency);
    EXPECT_NEAR(johnson_voltage_spectrum(0.2, 100e3).value / s.value, 2.0, 1e-12);
    EXPECT_EQ(johnson_voltage_spectrum(0.1, 0.0).value, 0.0);
    // 100 GHz at 100 mK is far outside the classical regime: flagged, not thrown.
    EXPECT_FALSE(johnson_voltage_spectrum(0.1, 100e3, two_pi * 100e9).low_frequency);
    EXPECT_THROW(johnson_voltage_spectrum(0.0, 1.0), InvalidInput);
}

TEST(Decoherence, CalibratedCircuitHeating)
{
    Spectrum circuit{SpectrumModel::JohnsonCircuit, 0.0, 100e3};
    EXPECT_NEAR(axial_heating_rate(circuit.at(kAxial, 0.1), kAxial), 10.0, 1e-9);
    Spectrum gold{SpectrumModel::GoldElectrode};
    EXPECT_NEAR(axial_heating_rate(gold.at(kAxial, 0.1), kAxial), 1e-3, 1e-15);
}

TEST(Decoherence, DcDephasing)
{
    const double tau = dc_dephasing_time(6e-8, kAxial);
    EXPECT_NEAR(tau, 53.05e-3, 0.01e-3);
    EXPECT_NEAR(tau, 50e-3, 5e-3);
    EXPECT_TRUE(std::isinf(dc_dephasing_time(0.0, kAxial)));
    EXPECT_NEAR(dc_dephasing_time(6e-8, 2.0 * kAxial), 0.5 * tau, 1e-15);
    EXPECT_THROW(dc_dephasing_time(-1e-8, kAxial), InvalidInput);
}

TEST(Decoherence, DynamicalDephasing)
{
    EXPECT_NEAR(dynamical_dephasing_rate(1e-22, kAxial), 9.87e-6, 0.01e-6);
    EXPECT_NEAR(dynamical_dephasing_rate(1e-22, two_pi * 100e9), 9.87, 0.01);
    EXPECT_EQ(dynamical_dephasing_rate(0.0, kAxial), 0.0);
}

TEST(Decoherence, WireGateDecoherence)
{
    const auto link = WireLink::symmetric(100e-6, 150e-6, kAxial);
    const double omega = wire_coupling(link);
    const double n = n_max(0.1, link);
    const double g = wire_gate_decoherence(omega, n);
    EXPECT_TRUE(within_factor_two(g, 1e-2)) << g;
    EXPECT_NEAR(omega / (constants::pi * g * n), 1.0, 1e-9);
    EXPECT_NEAR(wire_gate_decoherence(omega, 0.5 * n), 2.0 * g, 1e-12 * g);
    EXPECT_LT(wire_gate_decoherence(omega, 1e300), 1e-290);
    EXPECT_THROW(wire_gate_decoherence(0.0, 1.0), InvalidInput);
}

TEST(Decoherence, ThreeWayIdentityOnRandomLinks)
{
    for (double r0 : {10e-6, 100e-6, 1e-3})
        for (double d : {10e-6, 1e-3, 0.1})
            for (double T : {0.01, 0.1, 4.2}) {
                const auto link = WireLink::symmetric(r0, d, kAxial);
                const double omega = wire_coupling(link);
                const double n = n_max(T, link);
                EXPECT_NEAR(n * constants::pi * wire_gate_decoherence(omega, n) / omega, 1.0, 1e-9);
            }
}

TEST(Decoherence, BudgetReproducesReferenceRates)
{
    const auto freqs = hundred_gigahertz_modes();
    ASSERT_NEAR(to_hz(freqs.larmor), 100e9, 0.01e9);
    const auto b = build_budget(budget_environment(), freqs, WireLink::symmetric(100e-6, 150e-6, kAxial));
    EXPECT_TRUE(within_factor_two(b.dc_electric_dephasing, 10.0)) << b.dc_electric_dephasing;
    EXPECT_TRUE(within_factor_two(b.dynamical_electric_dephasing, 1e-5)) << b.dynamical_electric_dephasing;
    EXPECT_TRUE(within_factor_two(b.magnetic_dephasing, 10.0)) << b.magnetic_dephasing;
    ASSERT_TRUE(b.wire_johnson.has_value());
    EXPECT_TRUE(within_factor_two(*b.wire_johnson, 1e-2)) << *b.wire_johnson;
    for (const auto& [name, rate] : b.entries())
        EXPECT_GE(rate, 0.0) << name;
    EXPECT_EQ(b.entries().size(), 9u);
    EXPECT_EQ(b.dominant().first, "dc_electric_dephasing");
}

TEST(Decoherence, BudgetWithoutLinkMarksWireAbsent)
{
    const auto b = build_budget(budget_environment(), hundred_gigahertz_modes());
    EXPECT_FALSE(b.wire_johnson.has_value());
    EXPECT_EQ(b.entries().size(), 8u);
}

TEST(Decoherence, QuietEnvironmentLeavesOnlyCyclotronDecay)
{
    NoiseEnvironment quiet;
    const auto freqs = hundred_gigahertz_modes();
    const auto b = build_budget(quiet, freqs);
    for (const auto& [name, rate] : b.entries()) {
        if (name == "cyclotron_decay")
            EXPECT_NEAR(rate, cyclotron_decay_rate(freqs.reduced_cyclotron), 0.0);
        else
            EXPECT_EQ(rate, 0.0) << name;
    }
    EXPECT_GT(b.cyclotron_decay, 1.0);
}

TEST(Decoherence, VacuumSpinFlipsAreSuppressed)
{
    NoiseEnvironment env;
    env.magnetic.model = SpectrumModel::VacuumMagnetic;
    const auto freqs = hundred_gigahertz_modes();
    const auto b = build_budget(env, freqs);
    EXPECT_GT(b.spin_flip_down, 0.0);
    EXPECT_LE(b.spin_flip_down, 1e-8 * b.cyclotron_decay);
    EXPECT_EQ(b.spin_flip_up, 0.0);
    // Emission equals gamma_c(omega_L) x hbar omega_L / m c^2.
    EXPECT_NEAR(b.spin_flip_down,
                cyclotron_decay_rate(freqs.larmor) * spin_suppression_ratio(freqs.larmor), 1e-12 * b.spin_flip_down);
}

TEST(Decoherence, DetailedBalanceSpectrum)
{
    Spectrum s{SpectrumModel::DetailedBalance, 1e-20};
    const double w = two_pi * 10e9;
    const double T = 0.5;
    EXPECT_NEAR(s.at(-w, T) / s.at(w, T), std::exp(-constants::hbar * w / (constants::k_B * T)), 1e-12);
}

TEST(Decoherence, EnvironmentValidation)
{
    NoiseEnvironment env;
    env.temperature = 0.0;
    EXPECT_THROW(env.validate(), InvalidInput);
    env.temperature = 0.1;
    env.magnetic_noise_rel_psd = -1.0;
    EXPECT_THROW(build_budget(env, hundred_gigahertz_modes()), InvalidInput);
    EXPECT_EQ(spectrum_model_from_string("gold-electrode-intrinsic"), SpectrumModel::GoldElectrode);
    EXPECT_THROW(spectrum_model_from_string("pink"), ConfigError);
}
