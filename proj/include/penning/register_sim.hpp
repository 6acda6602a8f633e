#pragma once

// Dense state-vector register of electron spins and the single-spin master
// equation. Qubit q is bit q of the basis index; |0> = spin down, |1> = up.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "penning/constants.hpp"
#include "penning/errors.hpp"

namespace penning {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 12;

enum class Axis { X, Y, Z };

class RegisterState {
public:
    static RegisterState basis(int n_qubits, std::uint64_t index)
    {
        RegisterState s(n_qubits);
        if (index >= s.amplitudes_.size())
            throw InvalidInput("RegisterState: basis index out of range");
        s.amplitudes_[index] = 1.0;
        return s;
    }

    /// Normalizes the given amplitudes; the length must be a power of two.
    static RegisterState from_amplitudes(std::vector<cplx> amps)
    {
        int n = 0;
        while ((std::size_t{1} << n) < amps.size())
            ++n;
        if ((std::size_t{1} << n) != amps.size() || n < 1 || n > kMaxQubits)
            throw InvalidInput("RegisterState: amplitude count must be 2^n with 1 <= n <= 12");
        RegisterState s(n);
        s.amplitudes_ = std::move(amps);
        const double nrm = s.norm();
        if (!(nrm > 0.0))
            throw InvalidInput("RegisterState: zero vector");
        for (auto& a : s.amplitudes_)
            a /= nrm;
        return s;
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    const std::vector<cplx>& amplitudes() const { return amplitudes_; }
    cplx amplitude(std::size_t i) const { return amplitudes_.at(i); }

    double norm() const
    {
        double s = 0.0;
        for (const auto& a : amplitudes_)
            s += std::norm(a);
        return std::sqrt(s);
    }

    std::vector<double> probabilities() const
    {
        std::vector<double> p;
        p.reserve(amplitudes_.size());
        for (const auto& a : amplitudes_)
            p.push_back(std::norm(a));
        return p;
    }

    /// Probability that qubit q reads 1.
    double excited_population(int q) const
    {
        check_qubit(q);
        double p = 0.0;
        for (std::size_t i = 0; i < amplitudes_.size(); ++i)
            if ((i >> q) & 1U)
                p += std::norm(amplitudes_[i]);
        return p;
    }

    double fidelity(const RegisterState& other) const
    {
        if (other.dimension() != dimension())
            throw InvalidInput("RegisterState: fidelity between registers of different size");
        cplx overlap = 0.0;
        for (std::size_t i = 0; i < amplitudes_.size(); ++i)
            overlap += std::conj(amplitudes_[i]) * other.amplitudes_[i];
        return std::norm(overlap);
    }

    void check_qubit(int q) const
    {
        if (q < 0 || q >= n_qubits_)
            throw InvalidInput("RegisterState: qubit index " + std::to_string(q) + " out of range for "
                               + std::to_string(n_qubits_) + " qubits");
    }

    std::vector<cplx>& mutable_amplitudes() { return amplitudes_; }

private:
    explicit RegisterState(int n_qubits) : n_qubits_(n_qubits)
    {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw InvalidInput("RegisterState: qubit count must be in [1, 12], got " + std::to_string(n_qubits));
        amplitudes_.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
    }

    int n_qubits_;
    std::vector<cplx> amplitudes_;
};

/// exp(-i angle sigma_axis / 2).
inline Eigen::Matrix2cd rotation_matrix(Axis axis, double angle)
{
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    const cplx i{0.0, 1.0};
    Eigen::Matrix2cd u;
    switch (axis) {
    case Axis::X:
        u << c, -i * s, -i * s, c;
        break;
    case Axis::Y:
        u << c, -s, s, c;
        break;
    case Axis::Z:
        u << std::exp(-i * (0.5 * angle)), 0.0, 0.0, std::exp(i * (0.5 * angle));
        break;
    }
    return u;
}

inline RegisterState apply_rotation(RegisterState state, int qubit, Axis axis, double angle)
{
    state.check_qubit(qubit);
    const auto u = rotation_matrix(axis, angle);
    auto& amps = state.mutable_amplitudes();
    const std::size_t bit = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & bit)
            continue;
        const cplx a0 = amps[i];
        const cplx a1 = amps[i | bit];
        amps[i] = u(0, 0) * a0 + u(0, 1) * a1;
        amps[i | bit] = u(1, 0) * a0 + u(1, 1) * a1;
    }
    return state;
}

/// Evolution for time t under (hbar pi / 2) sum_{i>j} J_ij sz_i sz_j, J in Hz.
inline RegisterState evolve_ising(RegisterState state, const Eigen::MatrixXd& J, double t)
{
    const auto n = static_cast<Eigen::Index>(state.n_qubits());
    if (J.rows() != n || J.cols() != n)
        throw InvalidInput("evolve_ising: coupling matrix is " + std::to_string(J.rows()) + "x"
                           + std::to_string(J.cols()) + " for " + std::to_string(n) + " qubits");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (J(i, i) != 0.0)
            throw InvalidInput("evolve_ising: coupling matrix must have zero diagonal");
        for (Eigen::Index j = 0; j < i; ++j)
            if (std::abs(J(i, j) - J(j, i)) > 1e-12 * (std::abs(J(i, j)) + std::abs(J(j, i))))
                throw InvalidInput("evolve_ising: coupling matrix must be symmetric");
    }
    auto& amps = state.mutable_amplitudes();
    for (std::size_t b = 0; b < amps.size(); ++b) {
        double energy = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double si = ((b >> i) & 1U) ? -1.0 : 1.0;
            for (Eigen::Index j = 0; j < i; ++j) {
                const double sj = ((b >> j) & 1U) ? -1.0 : 1.0;
                energy += J(i, j) * si * sj;
            }
        }
        amps[b] *= std::polar(1.0, -0.5 * constants::pi * energy * t);
    }
    return state;
}

// ---------------------------------------------------------------------------
// Single spin density matrix, basis order (down, up).

struct SpinDensity {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Identity() * 0.5;

    static SpinDensity from_elements(double down_down, cplx down_up)
    {
        SpinDensity s;
        s.rho << down_down, down_up, std::conj(down_up), 1.0 - down_down;
        return s;
    }
    static SpinDensity down() { return from_elements(1.0, 0.0); }
    static SpinDensity up() { return from_elements(0.0, 0.0); }

    double down_down() const { return rho(0, 0).real(); }
    double up_up() const { return rho(1, 1).real(); }
    cplx down_up() const { return rho(0, 1); }
};

struct SpinRelaxation {
    double larmor;       // omega_L, rad/s
    double gamma_minus;  // 1/s
    double gamma_plus;   // 1/s

    void validate() const
    {
        if (gamma_minus < 0.0 || gamma_plus < 0.0)
            throw InvalidInput("spin master equation: rates must be non-negative");
    }
};

/// Closed-form solution of
///   d rho_dd/dt = -2 G- rho_dd + 2 G+ rho_uu,
///   d rho_du/dt = (i omega_L - 3 (G- + G+)) rho_du.
inline SpinDensity evolve_spin_master(const SpinDensity& rho, const SpinRelaxation& p, double t)
{
    p.validate();
    if (t < 0.0)
        throw InvalidInput("evolve_spin_master: time must be non-negative");
    const double sum = p.gamma_minus + p.gamma_plus;
    double dd = rho.down_down();
    if (sum > 0.0) {
        const double steady = p.gamma_plus / sum;
        dd = steady + (dd - steady) * std::exp(-2.0 * sum * t);
    }
    const cplx du = rho.down_up() * std::exp(cplx{-3.0 * sum * t, p.larmor * t});
    return SpinDensity::from_elements(dd, du);
}

/// Same dynamics by adaptive Dormand-Prince integration of the rate
/// equations. Kept as an independent route for cross-checking.
inline SpinDensity integrate_spin_master(const SpinDensity& rho, const SpinRelaxation& p, double t,
                                         double rel_tol = 1e-10, double abs_tol = 1e-14)
{
    p.validate();
    if (t < 0.0)
        throw InvalidInput("integrate_spin_master: time must be non-negative");
    namespace ode = boost::numeric::odeint;
    using State = std::vector<cplx>;
    State x{rho.rho(0, 0), rho.rho(1, 1), rho.rho(0, 1)};
    const double gm = p.gamma_minus;
    const double gp = p.gamma_plus;
    const cplx coh{-3.0 * (gm + gp), p.larmor};
    auto rhs = [&](const State& s, State& ds, double) {
        ds[0] = -2.0 * gm * s[0] + 2.0 * gp * s[1];
        ds[1] = 2.0 * gm * s[0] - 2.0 * gp * s[1];
        ds[2] = coh * s[2];
    };
    if (t > 0.0) {
        auto stepper = ode::make_controlled(abs_tol, rel_tol, ode::runge_kutta_dopri5<State>());
        const double rate = std::max({std::abs(coh), 2.0 * (gm + gp), 1.0 / t});
        ode::integrate_adaptive(stepper, rhs, x, 0.0, t, 0.01 / rate);
    }
    SpinDensity out;
    out.rho << x[0], x[2], std::conj(x[2]), x[1];
    return out;
}

} // namespace penning
