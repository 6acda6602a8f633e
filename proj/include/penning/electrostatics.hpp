#pragma once

// On-axis potential of concentric planar electrodes in the gapless model.
//
// An annulus a < r < b held at U and surrounded by a grounded plane gives,
// on its axis,
//     Phi(z) = U * [ z / sqrt(z^2 + a^2) - z / sqrt(z^2 + b^2) ],
// and the central disk is the a = 0 case (the first bracket term is 1).
// A stack is a superposition of such terms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

inline constexpr int kMaxDerivativeOrder = 6;

struct Electrode {
    double inner_radius;  // m
    double outer_radius;  // m
    double voltage;       // V
};

/// Ordered contiguous electrodes: a disk followed by rings. Beyond the last
/// outer radius the plane is grounded.
class ElectrodeStack {
public:
    explicit ElectrodeStack(std::vector<Electrode> rings) : rings_(std::move(rings)) { validate(); }

    /// Builds a gapless stack from the outer radius of each electrode.
    static ElectrodeStack from_radii(std::span<const double> outer_radii, std::span<const double> voltages)
    {
        if (outer_radii.size() != voltages.size())
            throw InvalidInput("ElectrodeStack: radii and voltages differ in length");
        std::vector<Electrode> rings;
        double inner = 0.0;
        for (std::size_t i = 0; i < outer_radii.size(); ++i) {
            rings.push_back({inner, outer_radii[i], voltages[i]});
            inner = outer_radii[i];
        }
        return ElectrodeStack(std::move(rings));
    }

    std::span<const Electrode> rings() const { return rings_; }
    std::size_t size() const { return rings_.size(); }
    double max_radius() const { return rings_.back().outer_radius; }
    double voltage(std::size_t i) const { return rings_.at(i).voltage; }

    ElectrodeStack with_voltage(std::size_t index, double volts) const
    {
        if (index >= rings_.size())
            throw InvalidInput("ElectrodeStack: electrode index " + std::to_string(index) + " out of range");
        auto copy = rings_;
        copy[index].voltage = volts;
        return ElectrodeStack(std::move(copy));
    }

    ElectrodeStack scaled(double s) const
    {
        if (!(s > 0.0))
            throw InvalidInput("ElectrodeStack: scale factor must be positive");
        auto copy = rings_;
        for (auto& r : copy) {
            r.inner_radius *= s;
            r.outer_radius *= s;
        }
        return ElectrodeStack(std::move(copy));
    }

private:
    void validate() const
    {
        if (rings_.empty())
            throw InvalidInput("ElectrodeStack: at least one electrode required");
        if (rings_.front().inner_radius != 0.0)
            throw InvalidInput("ElectrodeStack: first electrode must be a disk (inner radius 0)");
        for (std::size_t i = 0; i < rings_.size(); ++i) {
            const auto& r = rings_[i];
            if (!std::isfinite(r.outer_radius) || !std::isfinite(r.voltage) || !(r.outer_radius > r.inner_radius))
                throw InvalidInput("ElectrodeStack: electrode " + std::to_string(i)
                                   + " needs finite radii with outer > inner and a finite voltage");
            if (i > 0 && r.inner_radius != rings_[i - 1].outer_radius)
                throw InvalidInput("ElectrodeStack: electrode " + std::to_string(i)
                                   + " is not contiguous with its inner neighbour");
        }
    }

    std::vector<Electrode> rings_;
};

struct TrapCharacterization {
    double z0;                  // m
    std::vector<double> taylor; // c_k in V/m^k, Phi(z) ~ sum c_k (z - z0)^k
    double omega_z;             // rad/s
    double depth_ev;            // smaller escape barrier along the axis
};

namespace detail {

/// d^k/dz^k of z / sqrt(z^2 + r^2) for k = 0..kMaxDerivativeOrder.
///
/// Each derivative has the form P_k(z) (z^2 + r^2)^{-(k + 1/2)} with
/// P_0 = z and P_{k+1} = P_k' (z^2 + r^2) - (2k + 1) z P_k. The polynomial
/// coefficients are small integers times powers of r^2, so they are carried
/// exactly and only evaluated at the end.
inline std::array<double, kMaxDerivativeOrder + 1> edge_derivatives(double z, double r)
{
    std::array<double, kMaxDerivativeOrder + 1> out{};
    if (r == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double r2 = r * r;
    const double s = z * z + r2;
    constexpr std::size_t kCoeffs = kMaxDerivativeOrder + 2;
    std::array<double, kCoeffs> p{};
    p[1] = 1.0;
    double q = 0.5;
    double s_pow = 1.0 / std::sqrt(s);
    for (int k = 0; k <= kMaxDerivativeOrder; ++k) {
        double value = 0.0;
        for (std::size_t i = kCoeffs; i-- > 0;)
            value = value * z + p[i];
        out[k] = value * s_pow;
        if (k == kMaxDerivativeOrder)
            break;
        std::array<double, kCoeffs> next{};
        for (std::size_t i = 1; i < kCoeffs; ++i) {
            const double d = static_cast<double>(i) * p[i];
            if (d == 0.0)
                continue;
            next[i - 1] += d * r2;
            if (i + 1 < kCoeffs)
                next[i + 1] += d;
        }
        for (std::size_t i = 0; i + 1 < kCoeffs; ++i)
            next[i + 1] -= 2.0 * q * p[i];
        p = next;
        q += 1.0;
        s_pow /= s;
    }
    return out;
}

inline void require_positive_height(double z)
{
    if (!(z > 0.0) || !std::isfinite(z))
        throw DomainError("on-axis potential requires z > 0, got z = " + std::to_string(z));
}

} // namespace detail

inline double on_axis_potential(const ElectrodeStack& stack, double z)
{
    detail::require_positive_height(z);
    double phi = 0.0;
    for (const auto& r : stack.rings()) {
        if (r.voltage == 0.0)
            continue;
        const double inner = r.inner_radius == 0.0 ? 1.0 : z / std::hypot(z, r.inner_radius);
        phi += r.voltage * (inner - z / std::hypot(z, r.outer_radius));
    }
    return phi;
}

/// Analytic d^k Phi / dz^k for k = 1..order.
inline std::vector<double> potential_derivatives(const ElectrodeStack& stack, double z, int order)
{
    detail::require_positive_height(z);
    if (order < 1 || order > kMaxDerivativeOrder)
        throw InvalidInput("potential_derivatives: order must be in [1, 6], got " + std::to_string(order));
    std::vector<double> out(static_cast<std::size_t>(order), 0.0);
    for (const auto& r : stack.rings()) {
        if (r.voltage == 0.0)
            continue;
        const auto a = detail::edge_derivatives(z, r.inner_radius);
        const auto b = detail::edge_derivatives(z, r.outer_radius);
        for (int k = 1; k <= order; ++k)
            out[static_cast<std::size_t>(k - 1)] += r.voltage * (a[k] - b[k]);
    }
    return out;
}

namespace detail {

inline double slope(const ElectrodeStack& stack, double z) { return potential_derivatives(stack, z, 1)[0]; }

inline constexpr std::size_t kScanSamples = 2000;
inline constexpr double kScanLowerFraction = 1e-3;
inline constexpr double kScanUpperFactor = 20.0;
inline constexpr double kHeightTolerance = 1e-12;  // m

inline std::vector<double> log_grid(double lo, double hi, std::size_t n)
{
    std::vector<double> z(n);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        z[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    z.back() = hi;
    return z;
}

/// Bisection on Phi' between lo and hi where Phi' changes sign, followed by a
/// Newton polish that is kept only if it stays inside the final bracket.
inline double refine_stationary_point(const ElectrodeStack& stack, double lo, double hi)
{
    double f_lo = slope(stack, lo);
    while (hi - lo > kHeightTolerance) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = slope(stack, mid);
        if (f_mid == 0.0)
            return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const auto d = potential_derivatives(stack, z, 2);
        if (d[1] == 0.0)
            break;
        const double next = z - d[0] / d[1];
        if (!(next >= lo - kHeightTolerance && next <= hi + kHeightTolerance))
            break;
        z = next;
    }
    return z;
}

struct Scan {
    std::vector<double> z;
    std::vector<double> phi;
};

inline Scan scan_axis(const ElectrodeStack& stack)
{
    const double rmax = stack.max_radius();
    Scan s;
    s.z = log_grid(kScanLowerFraction * rmax, kScanUpperFactor * rmax, kScanSamples);
    s.phi.reserve(s.z.size());
    for (double z : s.z)
        s.phi.push_back(on_axis_potential(stack, z));
    return s;
}

} // namespace detail

/// Height of the potential maximum confining an electron. Among several
/// interior maxima the one with the largest Phi (lowest electron energy) wins.
inline double find_equilibrium(const ElectrodeStack& stack)
{
    const auto s = detail::scan_axis(stack);
    double best_z = 0.0;
    double best_phi = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 1; i + 1 < s.z.size(); ++i) {
        if (!(s.phi[i] >= s.phi[i - 1] && s.phi[i] > s.phi[i + 1]))
            continue;
        const double lo = s.z[i - 1];
        const double hi = s.z[i + 1];
        if (!(detail::slope(stack, lo) > 0.0) || !(detail::slope(stack, hi) < 0.0))
            continue;
        const double z0 = detail::refine_stationary_point(stack, lo, hi);
        const double phi0 = on_axis_potential(stack, z0);
        if (phi0 > best_phi) {
            best_phi = phi0;
            best_z = z0;
            found = true;
        }
    }
    if (!found)
        throw NoTrap("no interior potential maximum in (" + std::to_string(s.z.front()) + ", "
                     + std::to_string(s.z.back()) + "] m");
    return best_z;
}

namespace detail {

/// Lowest Phi along the axis on one side of z0, including the limit at the
/// end of the segment (surface: Phi(0+) = disk voltage; infinity: 0).
inline double lowest_potential(const ElectrodeStack& stack, const Scan& s, double z0, bool toward_surface)
{
    double lowest = toward_surface ? stack.voltage(0) : 0.0;
    for (std::size_t i = 1; i + 1 < s.z.size(); ++i) {
        const bool on_side = toward_surface ? s.z[i + 1] < z0 : s.z[i - 1] > z0;
        if (!on_side)
            continue;
        lowest = std::min(lowest, s.phi[i]);
        if (s.phi[i] <= s.phi[i - 1] && s.phi[i] < s.phi[i + 1]) {
            const double zm = refine_stationary_point(stack, s.z[i - 1], s.z[i + 1]);
            lowest = std::min(lowest, on_axis_potential(stack, zm));
        }
    }
    return lowest;
}

} // namespace detail

inline TrapCharacterization characterize_at(const ElectrodeStack& stack, double z0, int taylor_order = kMaxDerivativeOrder)
{
    if (taylor_order < 2 || taylor_order > kMaxDerivativeOrder)
        throw InvalidInput("characterize: Taylor order must be in [2, 6]");
    TrapCharacterization t;
    t.z0 = z0;
    const auto d = potential_derivatives(stack, z0, taylor_order);
    t.taylor.resize(static_cast<std::size_t>(taylor_order) + 1);
    t.taylor[0] = on_axis_potential(stack, z0);
    double factorial = 1.0;
    for (int k = 1; k <= taylor_order; ++k) {
        factorial *= k;
        t.taylor[static_cast<std::size_t>(k)] = d[static_cast<std::size_t>(k - 1)] / factorial;
    }
    const double c2 = t.taylor[2];
    if (!(c2 < 0.0))
        throw NoTrap("characterize: curvature at z0 is not confining (c2 = " + std::to_string(c2) + " V/m^2)");
    t.omega_z = std::sqrt(2.0 * constants::e * std::abs(c2) / constants::m_e);

    const auto s = detail::scan_axis(stack);
    const double phi0 = t.taylor[0];
    const double barrier_surface = phi0 - detail::lowest_potential(stack, s, z0, true);
    const double barrier_far = phi0 - detail::lowest_potential(stack, s, z0, false);
    // Barrier in volts equals the electron's barrier in eV.
    t.depth_ev = std::min(barrier_surface, barrier_far);
    return t;
}

inline TrapCharacterization characterize(const ElectrodeStack& stack, int taylor_order = kMaxDerivativeOrder)
{
    return characterize_at(stack, find_equilibrium(stack), taylor_order);
}

} // namespace penning
