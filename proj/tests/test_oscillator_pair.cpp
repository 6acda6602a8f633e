#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liouvillian_oracle.hpp"
#include "penning/oscillator_pair.hpp"

using namespace penning;
using constants::pi;
using constants::two_pi;

namespace {

const double kOmega = two_pi * 1e3;
const double kAxial = two_pi * 100e6;

double max_abs(const Eigen::MatrixXcd& m)
{
    return m.cwiseAbs().maxCoeff();
}

} // namespace

TEST(OscillatorPair, LosslessSwap)
{
    const SwapParameters p{kOmega, 0.0, 0.0, kAxial};
    const auto out = evolve_swap(OscillatorPairState::fock(4, 1, 0), p, pi / kOmega);
    EXPECT_GT(out.population(0, 1), 1.0 - 1e-8);
    EXPECT_NEAR(out.trace(), 1.0, 1e-8);
}

TEST(OscillatorPair, QuarterPeriodSplitsExcitation)
{
    const SwapParameters p{kOmega, 0.0, 0.0, kAxial};
    const auto out = evolve_swap(OscillatorPairState::fock(4, 1, 0), p, pi / (2.0 * kOmega));
    EXPECT_NEAR(out.population(1, 0), 0.5, 1e-8);
    EXPECT_NEAR(out.population(0, 1), 0.5, 1e-8);
    // Maximally entangled: |coherence| between |1,0> and |0,1> is 1/2.
    EXPECT_NEAR(std::abs(out.matrix()(out.index(1, 0), out.index(0, 1))), 0.5, 1e-8);
}

// One period 2 pi / Omega multiplies the n-quantum sector by (-1)^n, so states
// of definite quantum-number parity (and every Fock mixture) recur exactly.
TEST(OscillatorPair, LosslessRecurrence)
{
    const int n_cut = 4;
    const auto base = OscillatorPairState::fock(n_cut, 0, 0);
    Eigen::VectorXcd odd = Eigen::VectorXcd::Zero(base.dimension());
    odd(base.index(1, 0)) = {0.6, 0.0};
    odd(base.index(0, 1)) = {0.0, 0.48};
    odd(base.index(2, 1)) = {0.2, 0.1};
    Eigen::VectorXcd even = Eigen::VectorXcd::Zero(base.dimension());
    even(base.index(0, 0)) = {0.5, 0.0};
    even(base.index(1, 1)) = {0.4, -0.3};
    even(base.index(2, 0)) = {0.2, 0.1};
    even(base.index(0, 2)) = {0.0, 0.3};
    const SwapParameters p{kOmega, 0.0, 0.0, kAxial};
    for (Eigen::VectorXcd psi : {odd, even}) {
        psi.normalize();
        const auto start = OscillatorPairState::from_matrix(n_cut, psi * psi.adjoint());
        const auto out = evolve_swap(start, p, two_pi / kOmega);
        const double fidelity = (psi.adjoint() * out.matrix() * psi)(0, 0).real();
        EXPECT_GT(fidelity, 1.0 - 1e-6);
    }
}

TEST(OscillatorPair, DampedSwapMatchesLiouvillianOracle)
{
    const int n_cut = 4;
    for (double T : {0.0, 2e-3}) {
        const SwapParameters p{kOmega, 0.02 * kOmega, T, kAxial};
        const auto start = OscillatorPairState::fock(n_cut, 1, 0);
        const double t = pi / kOmega;
        const auto out = evolve_swap(start, p, t);
        const auto oracle = test_support::oracle_evolve(start, p, t);
        EXPECT_LT(max_abs(out.matrix() - oracle), 1e-6) << "T = " << T;
        EXPECT_NEAR(out.population(0, 1), oracle(start.index(0, 1), start.index(0, 1)).real(), 1e-6);
    }
}

TEST(OscillatorPair, SwapInfidelityRegressionConstant)
{
    // At zero temperature the single excitation decays at gamma_z whichever
    // mode holds it, so 1 - F = 1 - exp(-pi gamma/Omega) and c = pi.
    const double ratio = 1e-4;
    const SwapParameters p{kOmega, ratio * kOmega, 0.0, kAxial};
    const auto start = OscillatorPairState::fock(4, 1, 0);
    const auto oracle = test_support::oracle_evolve(start, p, pi / kOmega);
    const double c_oracle = (1.0 - oracle(start.index(0, 1), start.index(0, 1)).real()) / ratio;
    constexpr double kSwapInfidelityConstant = 3.14159;
    EXPECT_NEAR(c_oracle, kSwapInfidelityConstant, 1e-3);
    const auto out = evolve_swap(start, p, pi / kOmega);
    EXPECT_NEAR((1.0 - out.population(0, 1)) / ratio, kSwapInfidelityConstant, 1e-3);
}

TEST(OscillatorPair, ShotsToFailure)
{
    EXPECT_NEAR(swap_shots_to_failure(kOmega, kOmega / pi), 1.0, 1e-15);
    EXPECT_THROW(swap_shots_to_failure(0.0, 1.0), InvalidInput);
    EXPECT_THROW(swap_shots_to_failure(1.0, 0.0), InvalidInput);

    const SwapParameters p{kOmega, 1e-3 * kOmega, 0.0, kAxial};
    const auto t0 = std::chrono::steady_clock::now();
    const double simulated = simulated_swaps_to_failure(p);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double estimate = swap_shots_to_failure(p.omega12, p.gamma_z);
    EXPECT_NEAR(simulated / estimate, 1.0, 0.2) << simulated << " vs " << estimate;
    EXPECT_LT(dt, 20.0);
}

TEST(OscillatorPair, TracePreservedOverRandomSequences)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto s = OscillatorPairState::fock(4, 1, 0);
    for (int k = 0; k < 100; ++k) {
        const SwapParameters p{kOmega * (0.5 + u(rng)), 0.05 * kOmega * u(rng), 1e-3 * u(rng), kAxial};
        s = evolve_swap(s, p, u(rng) / kOmega);
        ASSERT_NEAR(s.trace(), 1.0, 1e-8);
        ASSERT_LT(max_abs(s.matrix() - s.matrix().adjoint()), 1e-12);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.matrix());
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8);
}

TEST(OscillatorPair, TruncationIsReported)
{
    // Hot environment pumps quanta into the top level of a small space.
    const SwapParameters hot{kOmega, 0.5 * kOmega, 0.1, kAxial};
    EXPECT_THROW(evolve_swap(OscillatorPairState::fock(2, 0, 0), hot, 10.0 / kOmega), TruncationError);
    try {
        evolve_swap(OscillatorPairState::fock(2, 0, 0), hot, 10.0 / kOmega);
    } catch (const TruncationError& e) {
        EXPECT_NE(std::string(e.what()).find("increase n_cut"), std::string::npos);
    }
}

TEST(OscillatorPair, InputValidation)
{
    EXPECT_THROW(OscillatorPairState::fock(1, 0, 0), InvalidInput);
    EXPECT_THROW(OscillatorPairState::fock(4, 5, 0), InvalidInput);
    const SwapParameters bad{-1.0, 0.0, 0.0, kAxial};
    EXPECT_THROW(evolve_swap(OscillatorPairState::fock(4, 0, 0), bad, 1.0), InvalidInput);
    const SwapParameters ok{kOmega, 0.0, 0.0, kAxial};
    EXPECT_THROW(evolve_swap(OscillatorPairState::fock(4, 0, 0), ok, -1.0), InvalidInput);
}
