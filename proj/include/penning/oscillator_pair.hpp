#pragma once

// Two axial oscillators exchanging quanta through a wire, each damped by its
// own thermal channel. Density matrix on a truncated Fock space; the basis
// index of |n1, n2> is n1 (n_cut + 1) + n2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <boost/numeric/odeint.hpp>

#include "penning/constants.hpp"
#include "penning/errors.hpp"
#include "penning/register_sim.hpp"

namespace penning {

inline constexpr int kDefaultFockCutoff = 4;
inline constexpr double kLeakageLimit = 1e-4;

class OscillatorPairState {
public:
    static OscillatorPairState fock(int n_cut, int n1, int n2)
    {
        OscillatorPairState s(n_cut);
        if (n1 < 0 || n2 < 0 || n1 > n_cut || n2 > n_cut)
            throw InvalidInput("OscillatorPairState: Fock numbers must lie in [0, n_cut]");
        const auto i = s.index(n1, n2);
        s.rho_(i, i) = 1.0;
        return s;
    }

    static OscillatorPairState from_matrix(int n_cut, Eigen::MatrixXcd rho)
    {
        OscillatorPairState s(n_cut);
        if (rho.rows() != s.dimension() || rho.cols() != s.dimension())
            throw InvalidInput("OscillatorPairState: matrix dimension does not match n_cut");
        s.rho_ = std::move(rho);
        return s;
    }

    int n_cut() const { return n_cut_; }
    Eigen::Index levels() const { return n_cut_ + 1; }
    Eigen::Index dimension() const { return levels() * levels(); }
    Eigen::Index index(int n1, int n2) const { return n1 * levels() + n2; }
    const Eigen::MatrixXcd& matrix() const { return rho_; }
    Eigen::MatrixXcd& matrix() { return rho_; }

    double trace() const { return rho_.trace().real(); }
    double population(int n1, int n2) const { return rho_(index(n1, n2), index(n1, n2)).real(); }

    double mean_number(int mode) const
    {
        double n = 0.0;
        for (int a = 0; a <= n_cut_; ++a)
            for (int b = 0; b <= n_cut_; ++b)
                n += (mode == 0 ? a : b) * population(a, b);
        return n;
    }

    /// Population in any basis state with either mode at the cutoff.
    double leakage() const
    {
        double p = 0.0;
        for (int a = 0; a <= n_cut_; ++a)
            for (int b = 0; b <= n_cut_; ++b)
                if (a == n_cut_ || b == n_cut_)
                    p += population(a, b);
        return p;
    }

private:
    explicit OscillatorPairState(int n_cut) : n_cut_(n_cut)
    {
        if (n_cut < 2)
            throw InvalidInput("OscillatorPairState: n_cut must be at least 2");
        rho_ = Eigen::MatrixXcd::Zero(dimension(), dimension());
    }

    int n_cut_;
    Eigen::MatrixXcd rho_;
};

struct SwapParameters {
    double omega12;      // rad/s
    double gamma_z;      // 1/s, per-mode damping rate
    double temperature;  // K, environment of the damping channels
    double omega_z;      // rad/s, sets the thermal occupation

    void validate() const
    {
        if (!(omega12 >= 0.0) || !(gamma_z >= 0.0) || !(temperature >= 0.0) || !(omega_z > 0.0))
            throw InvalidInput("evolve_swap: need omega12, gamma_z, T >= 0 and omega_z > 0");
    }
};

inline double thermal_occupation(double omega, double temperature)
{
    if (temperature <= 0.0)
        return 0.0;
    const double x = constants::hbar * omega / (constants::k_B * temperature);
    return 1.0 / std::expm1(x);
}

struct SwapTolerances {
    double rel = 1e-8;
    double abs = 1e-12;
    double leakage = kLeakageLimit;
};

namespace detail {

using SparseC = Eigen::SparseMatrix<cplx>;

/// Lowering operator of one mode embedded in the two-mode space.
inline SparseC lowering(int n_cut, int mode)
{
    const int d = n_cut + 1;
    SparseC a(d * d, d * d);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int n1 = 0; n1 < d; ++n1)
        for (int n2 = 0; n2 < d; ++n2) {
            const int n = mode == 0 ? n1 : n2;
            if (n == 0)
                continue;
            const int target = mode == 0 ? (n1 - 1) * d + n2 : n1 * d + (n2 - 1);
            t.emplace_back(target, n1 * d + n2, std::sqrt(static_cast<double>(n)));
        }
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

/// Generator of the beam-splitter master equation, applied to dense matrices.
class SwapGenerator {
public:
    SwapGenerator(int n_cut, const SwapParameters& p)
    {
        const SparseC a1 = lowering(n_cut, 0);
        const SparseC a2 = lowering(n_cut, 1);
        const SparseC a1d = SparseC(a1.adjoint());
        const SparseC a2d = SparseC(a2.adjoint());
        minus_i_h_ = SparseC((a1d * a2 + a1 * a2d) * cplx{0.0, -0.5 * p.omega12});
        const double nth = thermal_occupation(p.omega_z, p.temperature);
        const double down = p.gamma_z * (nth + 1.0);
        const double up = p.gamma_z * nth;
        for (const SparseC* a : {&a1, &a2}) {
            const SparseC ad = SparseC(a->adjoint());
            if (down > 0.0)
                add_channel(SparseC(*a * std::sqrt(down)));
            if (up > 0.0)
                add_channel(SparseC(ad * std::sqrt(up)));
        }
        // Effective non-Hermitian part: -iH - (1/2) sum L^dag L.
        left_ = minus_i_h_;
        for (const auto& c : channels_)
            left_ -= SparseC(c.ldl * 0.5);
        left_.makeCompressed();
        left_adjoint_ = SparseC(left_.adjoint());
    }

    /// d rho / dt = K rho + rho K^dag + sum L rho L^dag with K = -iH - (1/2) sum L^dag L.
    void apply(const Eigen::Ref<const Eigen::MatrixXcd>& rho, Eigen::Ref<Eigen::MatrixXcd> out) const
    {
        out.noalias() = left_ * rho;
        out.noalias() += rho * left_adjoint_;
        for (const auto& c : channels_) {
            const Eigen::MatrixXcd lr = c.l * rho;
            out.noalias() += lr * c.ld;
        }
    }

private:
    struct Channel {
        SparseC l, ld, ldl;
    };
    void add_channel(SparseC l)
    {
        SparseC ld = SparseC(l.adjoint());
        SparseC ldl = SparseC(ld * l);
        channels_.push_back({std::move(l), std::move(ld), std::move(ldl)});
    }

    SparseC minus_i_h_;
    SparseC left_;
    SparseC left_adjoint_;
    std::vector<Channel> channels_;
};

} // namespace detail

/// Master-equation evolution of the pair for time t under the wire exchange
/// Hamiltonian (hbar Omega12 / 2)(a1^dag a2 + a1 a2^dag) plus local thermal
/// damping at rate gamma_z on each mode. Omega12 is the rate at which the
/// populations swap, so a single quantum moves across in pi / Omega12. Throws TruncationError when the
/// population at the Fock cutoff exceeds tol.leakage at any accepted step.
inline OscillatorPairState evolve_swap(const OscillatorPairState& pair, const SwapParameters& p, double t,
                                       const SwapTolerances& tol = {})
{
    p.validate();
    if (t < 0.0)
        throw InvalidInput("evolve_swap: time must be non-negative");
    if (t == 0.0)
        return pair;
    namespace ode = boost::numeric::odeint;
    using State = std::vector<cplx>;

    const detail::SwapGenerator gen(pair.n_cut(), p);
    const Eigen::Index dim = pair.dimension();
    State x(pair.matrix().data(), pair.matrix().data() + dim * dim);
    auto rhs = [&](const State& s, State& ds, double) {
        ds.resize(s.size());
        const Eigen::Map<const Eigen::MatrixXcd> rho(s.data(), dim, dim);
        Eigen::Map<Eigen::MatrixXcd> out(ds.data(), dim, dim);
        gen.apply(rho, out);
    };

    OscillatorPairState probe = pair;
    auto check_leakage = [&](const State& s, double time) {
        probe.matrix() = Eigen::Map<const Eigen::MatrixXcd>(s.data(), dim, dim);
        const double leak = probe.leakage();
        if (leak > tol.leakage) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "evolve_swap: population %.3e at the Fock cutoff n_cut = %d (t = %.3e s); increase n_cut",
                          leak, pair.n_cut(), time);
            throw TruncationError(msg);
        }
    };

    const double rate = std::max({p.omega12, p.gamma_z * (1.0 + thermal_occupation(p.omega_z, p.temperature)), 1.0 / t});
    auto stepper = ode::make_controlled(tol.abs, tol.rel, ode::runge_kutta_dopri5<State>());
    ode::integrate_adaptive(stepper, rhs, x, 0.0, t, 0.01 / rate, check_leakage);

    OscillatorPairState out = pair;
    out.matrix() = Eigen::Map<const Eigen::MatrixXcd>(x.data(), dim, dim);
    // Re-impose Hermiticity lost to round-off.
    out.matrix() = (0.5 * (out.matrix() + out.matrix().adjoint())).eval();
    return out;
}

/// Number of SWAP gates before decoherence, Omega12 / (pi gamma_z).
inline double swap_shots_to_failure(double omega12, double gamma_z)
{
    if (!(omega12 > 0.0) || !(gamma_z > 0.0))
        throw InvalidInput("swap_shots_to_failure: coupling and damping must be positive");
    return omega12 / (constants::pi * gamma_z);
}

/// Applies SWAP pulses of length pi/Omega12 to |1,0> until the probability of
/// finding the excitation where an ideal gate sequence would put it drops
/// below 1/e. Returns the (fractional, linearly interpolated) gate count.
inline double simulated_swaps_to_failure(const SwapParameters& p, int n_cut = kDefaultFockCutoff,
                                         int max_swaps = 100000)
{
    p.validate();
    if (!(p.omega12 > 0.0))
        throw InvalidInput("simulated_swaps_to_failure: coupling must be positive");
    const double threshold = std::exp(-1.0);
    const double tau = constants::pi / p.omega12;
    auto state = OscillatorPairState::fock(n_cut, 1, 0);
    double previous = 1.0;
    for (int k = 1; k <= max_swaps; ++k) {
        state = evolve_swap(state, p, tau);
        const double f = (k % 2 == 1) ? state.population(0, 1) : state.population(1, 0);
        if (f < threshold)
            return (k - 1) + (previous - threshold) / (previous - f);
        previous = f;
    }
    throw NoSolution("simulated_swaps_to_failure: fidelity stayed above 1/e for " + std::to_string(max_swaps) + " gates");
}

} // namespace penning
