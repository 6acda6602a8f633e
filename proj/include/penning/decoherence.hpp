#pragma once

// Noise-to-rate conversions for the spin, cyclotron and axial degrees of
// freedom, and the aggregated error budget of a trapped-electron register.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "penning/constants.hpp"
#include "penning/coupling.hpp"
#include "penning/errors.hpp"
#include "penning/physics_core.hpp"

namespace penning {

/// Free-space spontaneous emission rate of the cyclotron mode.
inline double cyclotron_decay_rate(double omega_plus)
{
    using namespace constants;
    if (omega_plus < 0.0)
        throw InvalidInput("cyclotron_decay_rate: frequency must be non-negative");
    return e * e * omega_plus * omega_plus / (3.0 * pi * eps0 * m_e * c * c * c);
}

/// hbar omega_L / (m c^2): suppression of vacuum spin flips relative to
/// cyclotron decay.
inline double spin_suppression_ratio(double omega_L)
{
    using namespace constants;
    return hbar * omega_L / (m_e * c * c);
}

struct SpinRates {
    double gamma_minus;  // (ge/4m)^2 S_B(-omega_L)
    double gamma_plus;   // (ge/4m)^2 S_B(+omega_L)

    double flip_up() const { return 2.0 * gamma_minus; }    // down -> up
    double flip_down() const { return 2.0 * gamma_plus; }   // up -> down
    double coherence_decay() const { return 3.0 * (gamma_minus + gamma_plus); }
};

inline constexpr double kSpinNoiseCoupling = (constants::g * constants::e / (4.0 * constants::m_e))
                                           * (constants::g * constants::e / (4.0 * constants::m_e));

inline SpinRates spin_flip_rates(double S_B_plus, double S_B_minus)
{
    if (S_B_plus < 0.0 || S_B_minus < 0.0)
        throw InvalidInput("spin_flip_rates: spectral densities must be non-negative");
    return {kSpinNoiseCoupling * S_B_minus, kSpinNoiseCoupling * S_B_plus};
}

/// Heating rate of the axial ground state from electric-field noise at omega_z.
inline double axial_heating_rate(double S_E, double omega_z)
{
    if (S_E < 0.0 || !(omega_z > 0.0))
        throw InvalidInput("axial_heating_rate: need S_E >= 0 and omega_z > 0");
    using namespace constants;
    return e * e * S_E / (2.0 * hbar * m_e * omega_z);
}

struct JohnsonSpectrum {
    double value;         // V^2/Hz
    bool low_frequency;   // hbar omega << k_B T holds (ratio <= 0.1)
};

inline constexpr double kJohnsonRegimeLimit = 0.1;

inline JohnsonSpectrum johnson_voltage_spectrum(double T, double R_c, double omega = 0.0)
{
    if (!(T > 0.0) || R_c < 0.0)
        throw InvalidInput("johnson_voltage_spectrum: need T > 0 and R_c >= 0");
    using namespace constants;
    return {2.0 * k_B * T * R_c, hbar * std::abs(omega) <= kJohnsonRegimeLimit * k_B * T};
}

/// Quasi-static dephasing time from a relative voltage (or field) offset:
/// the frequency moves by (1/2) dU/U omega. Returns +inf for a perfect supply.
inline double dc_dephasing_time(double dU_over_U, double omega)
{
    if (dU_over_U < 0.0 || !(omega > 0.0))
        throw InvalidInput("dc_dephasing_time: need dU/U >= 0 and omega > 0");
    if (dU_over_U == 0.0)
        return std::numeric_limits<double>::infinity();
    return 1.0 / (0.5 * dU_over_U * omega);
}

/// Phase-diffusion rate (omega/2)^2 S_rel for a white relative PSD.
inline double dynamical_dephasing_rate(double S_rel, double omega)
{
    if (S_rel < 0.0 || omega < 0.0)
        throw InvalidInput("dynamical_dephasing_rate: inputs must be non-negative");
    return 0.25 * omega * omega * S_rel;
}

/// Decoherence rate of the wire gate implied by the figure of merit.
inline double wire_gate_decoherence(double omega12, double N_max)
{
    if (!(omega12 > 0.0) || !(N_max > 0.0))
        throw InvalidInput("wire_gate_decoherence: coupling and N_max must be positive");
    return omega12 / (constants::pi * N_max);
}

// ---------------------------------------------------------------------------
// Spectra

/// Transfer factor G (squared, 1/m^2) mapping circuit Johnson noise onto the
/// field at the electron, S_E = G^2 S_V. Calibrated so that a 100 kOhm circuit
/// at 100 mK heats a 100 MHz axial mode at 10 /s (Q = 1e3, R0 = 100 um).
inline constexpr double kJohnsonFieldTransferSq = []() {
    using namespace constants;
    constexpr double omega = two_pi * 100e6;
    constexpr double target_rate = 10.0;
    constexpr double S_E = target_rate * 2.0 * hbar * m_e * omega / (e * e);
    constexpr double S_V = 2.0 * k_B * 0.1 * 100e3;
    return S_E / S_V;
}();

/// White S_E that gives 1e-3 /s heating at 100 MHz: intrinsic noise of gold
/// electrodes with R0 = 100 um.
inline constexpr double kGoldElectrodeFieldNoise = []() {
    using namespace constants;
    constexpr double omega = two_pi * 100e6;
    return 1e-3 * 2.0 * hbar * m_e * omega / (e * e);
}();

enum class SpectrumModel {
    Zero,
    White,           // S(+w) = S(-w) = level
    DetailedBalance, // S(+w) = level, S(-w) = level exp(-hbar|w|/kT)
    VacuumMagnetic,  // S_B reproducing hbar w/(m c^2) x cyclotron decay for spin emission
    GoldElectrode,   // white, kGoldElectrodeFieldNoise
    JohnsonCircuit,  // white, G^2 2 k_B T R_c
};

inline constexpr std::array<std::pair<SpectrumModel, std::string_view>, 6> kSpectrumModelNames{{
    {SpectrumModel::Zero, "zero"},
    {SpectrumModel::White, "white"},
    {SpectrumModel::DetailedBalance, "detailed-balance"},
    {SpectrumModel::VacuumMagnetic, "vacuum"},
    {SpectrumModel::GoldElectrode, "gold-electrode-intrinsic"},
    {SpectrumModel::JohnsonCircuit, "johnson-circuit"},
}};

inline std::string_view to_string(SpectrumModel m)
{
    for (const auto& [model, name] : kSpectrumModelNames)
        if (model == m)
            return name;
    return "unknown";
}

inline SpectrumModel spectrum_model_from_string(std::string_view s)
{
    for (const auto& [model, name] : kSpectrumModelNames)
        if (name == s)
            return model;
    throw ConfigError("unknown spectrum model '" + std::string(s) + "'");
}

struct Spectrum {
    SpectrumModel model = SpectrumModel::Zero;
    double level = 0.0;               // White / DetailedBalance
    double circuit_resistance = 0.0;  // JohnsonCircuit, Ohm

    /// Two-sided spectral density at angular frequency omega; positive
    /// frequencies carry emission by the system.
    double at(double omega, double temperature) const
    {
        using namespace constants;
        switch (model) {
        case SpectrumModel::Zero:
            return 0.0;
        case SpectrumModel::White:
            return level;
        case SpectrumModel::DetailedBalance:
            return omega >= 0.0 ? level : level * std::exp(-hbar * std::abs(omega) / (k_B * temperature));
        case SpectrumModel::VacuumMagnetic:
            if (omega <= 0.0)
                return 0.0;
            return cyclotron_decay_rate(omega) * spin_suppression_ratio(omega) / (2.0 * kSpinNoiseCoupling);
        case SpectrumModel::GoldElectrode:
            return kGoldElectrodeFieldNoise;
        case SpectrumModel::JohnsonCircuit:
            return kJohnsonFieldTransferSq * johnson_voltage_spectrum(temperature, circuit_resistance).value;
        }
        return 0.0;
    }
};

struct NoiseEnvironment {
    double temperature = 0.1;                // K
    Spectrum magnetic;                       // S_B, T^2/Hz
    Spectrum electric;                       // S_E, (V/m)^2/Hz
    double dc_voltage_stability = 0.0;       // dU/U
    double voltage_noise_rel_psd = 0.0;      // S_U/U^2, 1/Hz
    double magnetic_noise_rel_psd = 0.0;     // S_B/B^2, 1/Hz

    void validate() const
    {
        if (!(temperature > 0.0))
            throw InvalidInput("NoiseEnvironment: temperature must be positive");
        if (dc_voltage_stability < 0.0 || voltage_noise_rel_psd < 0.0 || magnetic_noise_rel_psd < 0.0
            || magnetic.level < 0.0 || electric.level < 0.0 || magnetic.circuit_resistance < 0.0
            || electric.circuit_resistance < 0.0)
            throw InvalidInput("NoiseEnvironment: spectral values must be non-negative");
    }
};

struct DecoherenceBudget {
    double dc_electric_dephasing = 0.0;
    double dynamical_electric_dephasing = 0.0;
    double magnetic_dephasing = 0.0;
    std::optional<double> wire_johnson;  // absent without a wire link
    double cyclotron_decay = 0.0;
    double spin_flip_up = 0.0;
    double spin_flip_down = 0.0;
    double spin_coherence_decay = 0.0;
    double axial_heating = 0.0;

    /// (name, rate) in a fixed order; the wire entry is skipped when absent.
    std::vector<std::pair<std::string_view, double>> entries() const
    {
        std::vector<std::pair<std::string_view, double>> out{
            {"dc_electric_dephasing", dc_electric_dephasing},
            {"dynamical_electric_dephasing", dynamical_electric_dephasing},
            {"magnetic_dephasing", magnetic_dephasing},
        };
        if (wire_johnson)
            out.emplace_back("wire_johnson", *wire_johnson);
        out.insert(out.end(), {{"cyclotron_decay", cyclotron_decay},
                               {"spin_flip_up", spin_flip_up},
                               {"spin_flip_down", spin_flip_down},
                               {"spin_coherence_decay", spin_coherence_decay},
                               {"axial_heating", axial_heating}});
        return out;
    }

    std::pair<std::string_view, double> dominant() const
    {
        const auto all = entries();
        return *std::max_element(all.begin(), all.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    }

    double total() const
    {
        double sum = 0.0;
        for (const auto& [name, rate] : entries())
            sum += rate;
        return sum;
    }
};

inline DecoherenceBudget build_budget(const NoiseEnvironment& env, const ModeFrequencies& freqs,
                                      const std::optional<WireLink>& link = std::nullopt)
{
    env.validate();
    DecoherenceBudget b;
    const double tau = dc_dephasing_time(env.dc_voltage_stability, freqs.axial);
    b.dc_electric_dephasing = std::isinf(tau) ? 0.0 : 1.0 / tau;
    b.dynamical_electric_dephasing = dynamical_dephasing_rate(env.voltage_noise_rel_psd, freqs.axial);
    b.magnetic_dephasing = dynamical_dephasing_rate(env.magnetic_noise_rel_psd, freqs.larmor);
    if (link) {
        const double omega12 = wire_coupling(*link);
        b.wire_johnson = wire_gate_decoherence(omega12, n_max(env.temperature, *link));
    }
    b.cyclotron_decay = cyclotron_decay_rate(freqs.reduced_cyclotron);
    const auto spin = spin_flip_rates(env.magnetic.at(freqs.larmor, env.temperature),
                                      env.magnetic.at(-freqs.larmor, env.temperature));
    b.spin_flip_up = spin.flip_up();
    b.spin_flip_down = spin.flip_down();
    b.spin_coherence_decay = spin.coherence_decay();
    b.axial_heating = axial_heating_rate(env.electric.at(freqs.axial, env.temperature), freqs.axial);
    return b;
}

} // namespace penning
