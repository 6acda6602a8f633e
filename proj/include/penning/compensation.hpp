#pragma once

// Tuning one electrode voltage so that a chosen anharmonic Taylor coefficient
// of the axial potential vanishes about the self-consistent equilibrium.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "penning/electrostatics.hpp"
#include "penning/errors.hpp"

namespace penning {

/// Nulling c4 reproduces the reference compensated trap. The c3 root of the
/// same geometry sits near -1.13 V, where the trap is 118 um high.
inline constexpr int kDefaultNulledOrder = 4;

struct CompensationResult {
    double knob_voltage;
    TrapCharacterization characterization;
    int nulled_order;
    double residual;
};

struct KnobSearch {
    double lo = -10.0;
    double hi = 10.0;
    std::size_t samples = 200;
    double tolerance = 1e-12;  // V, bracket width at which bisection stops
};

/// c_k z0^k / (c_2 z0^2): scale-free anharmonicity of order k.
inline double normalized_coefficient(const TrapCharacterization& t, int k)
{
    if (k < 2 || static_cast<std::size_t>(k) >= t.taylor.size())
        throw InvalidInput("normalized_coefficient: order " + std::to_string(k) + " not available");
    return t.taylor[static_cast<std::size_t>(k)] * std::pow(t.z0, k - 2) / t.taylor[2];
}

/// Normalized coefficients for k = 3..6.
inline std::array<double, 4> anharmonicity_report(const TrapCharacterization& t)
{
    std::array<double, 4> out{};
    for (int k = 3; k <= 6; ++k)
        out[static_cast<std::size_t>(k - 3)] = normalized_coefficient(t, k);
    return out;
}

inline std::array<double, 4> anharmonicity_report(const ElectrodeStack& stack)
{
    return anharmonicity_report(characterize(stack));
}

template <class F>
concept TrapFamily = requires(F f, double v) {
    { f(v) } -> std::convertible_to<TrapCharacterization>;
};

/// Finds the knob voltage at which normalized_coefficient(order) vanishes.
///
/// A uniform pre-scan locates every sign change among voltages that trap;
/// each bracket is bisected and the root closest to 0 V is returned.
/// Voltages that lose the trap during the pre-scan are skipped; losing the
/// trap inside a bracket is an error.
template <TrapFamily Family>
CompensationResult null_coefficient(Family&& family, int order, const KnobSearch& search = {})
{
    if (order != 3 && order != 4)
        throw InvalidInput("optimize_compensation: nulled order must be 3 or 4, got " + std::to_string(order));
    if (search.samples < 2 || !(search.hi > search.lo))
        throw InvalidInput("optimize_compensation: invalid knob search range");

    auto evaluate = [&](double u) -> std::optional<double> {
        try {
            return normalized_coefficient(family(u), order);
        } catch (const NoTrap&) {
            return std::nullopt;
        }
    };

    std::vector<double> volts(search.samples);
    std::vector<std::optional<double>> values(search.samples);
    std::optional<double> first_lost;
    for (std::size_t i = 0; i < search.samples; ++i) {
        volts[i] = search.lo + (search.hi - search.lo) * static_cast<double>(i) / static_cast<double>(search.samples - 1);
        values[i] = evaluate(volts[i]);
        if (!values[i] && !first_lost)
            first_lost = volts[i];
    }

    std::optional<double> best;
    auto consider = [&](double root) {
        if (!best || std::abs(root) < std::abs(*best))
            best = root;
    };
    bool any_trap = false;
    for (std::size_t i = 0; i < search.samples; ++i) {
        if (!values[i])
            continue;
        any_trap = true;
        if (*values[i] == 0.0) {
            consider(volts[i]);
            continue;
        }
        if (i + 1 >= search.samples || !values[i + 1] || *values[i + 1] == 0.0)
            continue;
        if ((*values[i] > 0.0) == (*values[i + 1] > 0.0))
            continue;
        double lo = volts[i];
        double hi = volts[i + 1];
        double f_lo = *values[i];
        while (hi - lo > search.tolerance) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            const auto f_mid = evaluate(mid);
            if (!f_mid)
                throw NoTrap("optimize_compensation: trap lost at knob voltage " + std::to_string(mid) + " V");
            if (*f_mid == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((*f_mid > 0.0) == (f_lo > 0.0)) {
                lo = mid;
                f_lo = *f_mid;
            } else {
                hi = mid;
            }
        }
        consider(0.5 * (lo + hi));
    }
    if (!any_trap)
        throw NoTrap("optimize_compensation: no trap anywhere in the knob range (first lost at "
                     + std::to_string(first_lost.value_or(search.lo)) + " V)");
    if (!best)
        throw NoSolution("optimize_compensation: normalized c" + std::to_string(order)
                         + " has no sign change in [" + std::to_string(search.lo) + ", "
                         + std::to_string(search.hi) + "] V");

    CompensationResult result;
    result.knob_voltage = *best;
    result.characterization = family(*best);
    result.nulled_order = order;
    result.residual = std::abs(normalized_coefficient(result.characterization, order));
    return result;
}

inline CompensationResult optimize_compensation(const ElectrodeStack& stack, std::size_t knob,
                                                int nulled_order = kDefaultNulledOrder,
                                                const KnobSearch& search = {})
{
    if (knob >= stack.size())
        throw InvalidInput("optimize_compensation: knob electrode " + std::to_string(knob) + " out of range");
    auto family = [&](double volts) {
        const auto trial = stack.with_voltage(knob, volts);
        return characterize_at(trial, find_equilibrium(trial));
    };
    return null_coefficient(family, nulled_order, search);
}

} // namespace penning
