#pragma once

// Brute-force reference for the damped two-oscillator exchange: the full
// Liouvillian on column-stacked rho, built from dense Kronecker products and
// exponentiated directly. Shares no code with the library integrator.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "penning/oscillator_pair.hpp"

namespace test_support {

using penning::cplx;

inline Eigen::MatrixXcd liouvillian_oracle(int n_cut, const penning::SwapParameters& p)
{
    const int d = n_cut + 1;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 1; n < d; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd a1 = Eigen::kroneckerProduct(a, id);
    const Eigen::MatrixXcd a2 = Eigen::kroneckerProduct(id, a);
    const Eigen::MatrixXcd H = 0.5 * p.omega12 * (a1.adjoint() * a2 + a1 * a2.adjoint());
    const Eigen::Index D = d * d;
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(D, D);
    const cplx i{0.0, 1.0};
    Eigen::MatrixXcd L = -i * (Eigen::kroneckerProduct(I, H) - Eigen::kroneckerProduct(H.transpose(), I));

    const double hw_kt = penning::constants::hbar * p.omega_z / (penning::constants::k_B * std::max(p.temperature, 1e-300));
    const double nth = p.temperature > 0.0 ? 1.0 / (std::exp(hw_kt) - 1.0) : 0.0;
    std::vector<Eigen::MatrixXcd> jumps;
    for (const Eigen::MatrixXcd* m : {&a1, &a2}) {
        jumps.push_back(std::sqrt(p.gamma_z * (nth + 1.0)) * *m);
        jumps.push_back(std::sqrt(p.gamma_z * nth) * m->adjoint());
    }
    for (const auto& c : jumps) {
        const Eigen::MatrixXcd cdc = c.adjoint() * c;
        L += Eigen::kroneckerProduct(c.conjugate(), c);
        L -= 0.5 * Eigen::kroneckerProduct(I, cdc);
        L -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), I);
    }
    return L;
}

inline Eigen::MatrixXcd oracle_evolve(const penning::OscillatorPairState& s, const penning::SwapParameters& p, double t)
{
    const Eigen::MatrixXcd prop = (liouvillian_oracle(s.n_cut(), p) * t).exp();
    const Eigen::Index D = s.dimension();
    const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(s.matrix().data(), D * D);
    const Eigen::VectorXcd w = prop * v;
    return Eigen::Map<const Eigen::MatrixXcd>(w.data(), D, D);
}

} // namespace test_support
