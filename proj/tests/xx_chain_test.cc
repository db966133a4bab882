#include "lprep/xx_chain.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "test_oracles.h"

using namespace lprep;

namespace {

constexpr double kPi = std::numbers::pi;

using oracle::dense_eigenspace_weight;
using oracle::dense_t;
using oracle::dense_xx;
using oracle::expi;
using oracle::jw_lowering;
using oracle::lowering;
using oracle::mode_lowering;
using oracle::random_mode;
using oracle::z;

}  // namespace

TEST(xx_modes, two_sites) {
    auto set = xx_modes(2);
    EXPECT_NEAR(set.energies[0], -2, 1e-12);
    EXPECT_NEAR(set.energies[1], 2, 1e-12);
    const double r = 1 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(set.modes[0][0] - r) + std::abs(set.modes[0][1] - r), 0, 1e-12);
    EXPECT_NEAR(std::abs(set.modes[1][0] + set.modes[1][1]), 0, 1e-12);
}

TEST(xx_modes, gram_identity_and_sine_form) {
    for (std::size_t n : {2u, 3u, 6u, 11u}) {
        auto set = xx_modes(n);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                Complex g = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    g += std::conj(set.modes[a][j]) * set.modes[b][j];
                }
                ASSERT_NEAR(std::abs(g - (a == b ? 1.0 : 0.0)), 0, 1e-10);
            }
            EXPECT_NEAR(set.energies[a], -4 * std::cos(kPi * (a + 1) / (n + 1)), 1e-10);
            for (std::size_t j = 0; j < n; ++j) {
                const double analytic = std::sqrt(2.0 / (n + 1)) * std::sin(kPi * double((a + 1) * (j + 1)) / (n + 1));
                ASSERT_NEAR(set.modes[a][j].real(), analytic, 1e-8);
            }
        }
    }
    EXPECT_THROW(xx_modes(1), std::invalid_argument);
}

TEST(angle_split, examples) {
    auto a = angle_split(0.7, 0);
    EXPECT_NEAR(a.beta, 0, 1e-15);
    EXPECT_NEAR(a.gamma, 0.7, 1e-15);
    auto b = angle_split(0.7, kPi / 2);
    EXPECT_NEAR(b.gamma, 0, 1e-15);
    EXPECT_NEAR(b.beta, 0.35, 1e-15);
    auto c = angle_split(kPi / 2, kPi / 4);
    EXPECT_NEAR(c.beta, kPi / 4, 1e-15);
    EXPECT_NEAR(c.gamma, kPi / 4, 1e-15);
}

TEST(angle_split, trig_system_and_operator_identity) {
    // Two anticommuting fermions on two qubits: A = a_0, B = a_1 with its string.
    oracle::Mat a = jw_lowering(2, 0), b = jw_lowering(2, 1);
    ASSERT_LE((a * b + b * a).norm(), 1e-15);
    oracle::Mat ka = a + a.adjoint(), kb = b + b.adjoint();
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const double alpha = 8 * (rng.uniform() - 0.5), theta = 8 * (rng.uniform() - 0.5);
        auto s = angle_split(alpha, theta);
        ASSERT_NEAR(std::cos(2 * s.beta) * std::cos(s.gamma), std::cos(alpha), 1e-12);
        ASSERT_NEAR(std::sin(2 * s.beta) * std::cos(s.gamma), std::sin(alpha) * std::sin(theta), 1e-12);
        ASSERT_NEAR(std::sin(s.gamma), std::sin(alpha) * std::cos(theta), 1e-12);
        oracle::Mat lhs = expi(std::cos(theta) * ka + std::sin(theta) * kb, alpha);
        oracle::Mat rhs = expi(kb, s.beta) * expi(ka, s.gamma) * expi(kb, s.beta);
        ASSERT_LE((lhs - rhs).norm(), 1e-10);
    }
}

TEST(xx_operators, mode_operator_squares_to_one) {
    Rng rng(12);
    for (std::size_t n : {2u, 4u, 6u}) {
        auto c = random_mode(n, rng);
        oracle::Mat a = mode_lowering(n, c);
        oracle::Mat k = a + a.adjoint();
        EXPECT_LE((k * k - oracle::Mat::Identity(k.rows(), k.cols())).norm(), 1e-10);
    }
}

TEST(xx_operators, direct_action_matches_dense) {
    Rng rng(13);
    const std::size_t n = 5;
    auto c = random_mode(n, rng);
    auto psi = random_state(n, rng);
    oracle::Mat a = mode_lowering(n, c);
    for (bool adjoint : {false, true}) {
        auto out = apply_mode_operator(psi, c, adjoint);
        oracle::Vec expect = (adjoint ? oracle::Mat(a.adjoint()) : a) * oracle::to_eigen(psi);
        for (Eigen::Index i = 0; i < expect.size(); ++i) {
            ASSERT_NEAR(std::abs(out[i] - expect(i)), 0, 1e-12);
        }
    }
    auto hpsi = apply_xx_hamiltonian(psi);
    oracle::Vec expect = dense_xx(n) * oracle::to_eigen(psi);
    for (Eigen::Index i = 0; i < expect.size(); ++i) {
        ASSERT_NEAR(std::abs(hpsi[i] - expect(i)), 0, 1e-12);
    }
}

TEST(angle_schedule, palindromic_reconstruction) {
    Rng rng(14);
    for (std::size_t n = 1; n <= 6; ++n) {
        for (double alpha : {kPi / 2, 0.37}) {
            auto c = random_mode(n, rng);
            auto s = angle_schedule(c, alpha);
            auto r = [&](Qubit j) {
                oracle::Mat aj = jw_lowering(n, j);
                return expi(s.phase[j] * aj + std::conj(s.phase[j]) * aj.adjoint(), s.theta[j]);
            };
            oracle::Mat chain = r(0);
            for (Qubit j = 1; j < n; ++j) {
                chain = r(j) * chain * r(j);
            }
            oracle::Mat a = mode_lowering(n, c);
            ASSERT_LE((chain - expi(a + a.adjoint(), alpha)).norm(), 1e-9) << n;
        }
    }
}

TEST(angle_schedule, zero_coefficients_skip_layers) {
    std::vector<Complex> c{0.6, 0.0, Complex(0, 0.8), 0.0};
    auto s = angle_schedule(c, kPi / 2);
    EXPECT_EQ(s.theta[1], 0.0);
    EXPECT_EQ(s.theta[3], 0.0);
    EXPECT_THROW(angle_schedule({0.5, 0.5}, 1.0), std::invalid_argument);
}

TEST(apply_mode_rotation, circuits_match_dense_exponential) {
    Rng rng(15);
    for (std::size_t n = 2; n <= 5; ++n) {
        auto c = random_mode(n, rng);
        oracle::Mat a = mode_lowering(n, c);
        oracle::Mat w = expi(a + a.adjoint(), kPi / 2);
        for (auto jw : {JWMode::Direct, JWMode::Protocol}) {
            for (auto circuit : {XXCircuit::Palindrome, XXCircuit::Compressed}) {
                auto psi = random_state(n, rng);
                StateVector state = jw == JWMode::Protocol ? psi.with_zero_qubits(n) : psi;
                ResourceLedger ledger;
                auto driver = MeasurementDriver::sampling(rng);
                apply_mode_rotation(state, c, kPi / 2, {jw, circuit}, ledger, driver);
                StateVector out = jw == JWMode::Protocol ? state.without_high_qubits(n) : state;
                oracle::Mat expect_op = circuit == XXCircuit::Compressed ? oracle::Mat(dense_t(n, n) * w * dense_t(n, n)) : w;
                oracle::Vec expect = expect_op * oracle::to_eigen(psi);
                ASSERT_LE((oracle::to_eigen(out) - expect).norm(), 1e-9) << n;
            }
        }
    }
}

TEST(prepare_xx, vacuum) {
    Rng rng(16);
    auto r = prepare_xx_eigenstate(4, {}, rng);
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_NEAR(std::abs((*r.final_state)[0]), 1.0, 1e-15);
    EXPECT_EQ(r.ledger.depth(), 0u);
    EXPECT_TRUE(r.bounds_satisfied());
}

TEST(prepare_xx, two_site_ground_mode) {
    Rng rng(17);
    auto r = prepare_xx_eigenstate(2, {0}, rng);
    const auto &s = *r.final_state;
    const double h = 1 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(s[1]), h, 1e-12);
    EXPECT_NEAR(std::abs(s[2]), h, 1e-12);
    EXPECT_NEAR(std::abs(s[1] - s[2]), 0, 1e-12);
    EXPECT_LE(r.eigen_residual, 1e-10);
    EXPECT_NEAR(r.energy, -2, 1e-12);
}

TEST(prepare_xx, six_sites_two_modes_against_dense_diagonalization) {
    Rng rng(18);
    const oracle::Mat h = dense_xx(6);
    for (std::vector<std::size_t> s : {std::vector<std::size_t>{0, 1}, {1, 4}, {0, 5}, {2, 3}}) {
        auto r = prepare_xx_eigenstate(6, s, rng);
        const double w = dense_eigenspace_weight(h, oracle::to_eigen(*r.final_state), r.energy);
        EXPECT_GE(w, 1 - 1e-9);
        EXPECT_LE(r.eigen_residual, 1e-8);
        EXPECT_NEAR(r.sector_weight, 1, 1e-10);
        EXPECT_TRUE(r.bounds_satisfied());
    }
}

TEST(prepare_xx, degenerate_eigenspace_uses_projector) {
    // ε_1 + ε_5 = ε_2 + ε_4 = 0 at N = 5: a two-dimensional eigenspace inside the M = 2 sector.
    Rng rng(19);
    auto r = prepare_xx_eigenstate(5, {0, 4}, rng);
    EXPECT_NEAR(r.energy, 0, 1e-12);
    ASSERT_TRUE(r.eigenspace_infidelity.has_value());
    EXPECT_LE(*r.eigenspace_infidelity, 1e-9);
    const double w = dense_eigenspace_weight(dense_xx(5), oracle::to_eigen(*r.final_state), 0.0);
    EXPECT_GE(w, 1 - 1e-9);
}

TEST(prepare_xx, each_step_annihilated_by_next_mode) {
    Rng rng(20);
    const std::size_t n = 6;
    auto modes = xx_modes(n);
    std::vector<std::size_t> s{3, 0, 5};
    for (std::size_t k = 0; k < s.size(); ++k) {
        std::vector<std::size_t> prefix(s.begin(), s.begin() + k);
        auto r = prepare_xx_eigenstate(n, prefix, rng, {JWMode::Direct, XXCircuit::Compressed});
        oracle::Vec after = mode_lowering(n, modes.modes[s[k]]) * oracle::to_eigen(*r.final_state);
        EXPECT_LE(after.norm(), 1e-10);
    }
}

TEST(prepare_xx, protocol_direct_and_palindrome_agree) {
    Rng rng(21);
    std::vector<std::size_t> s{1, 2, 4};
    auto a = prepare_xx_eigenstate(7, s, rng, {JWMode::Protocol, XXCircuit::Compressed});
    auto b = prepare_xx_eigenstate(7, s, rng, {JWMode::Direct, XXCircuit::Compressed});
    auto c = prepare_xx_eigenstate(7, s, rng, {JWMode::Direct, XXCircuit::Palindrome});
    EXPECT_LE(infidelity(*a.final_state, *b.final_state), 1e-12);
    EXPECT_LE(infidelity(*a.final_state, *c.final_state), 1e-12);
    EXPECT_LE(a.construction_infidelity, 1e-10);
}

TEST(prepare_xx, depth_is_bilinear) {
    Rng rng(22);
    for (std::size_t n : {3u, 5u, 8u}) {
        auto modes_all = xx_modes(n);
        for (std::size_t m = 1; m <= 3; ++m) {
            std::vector<std::size_t> s;
            for (std::size_t k = 0; k < m; ++k) {
                s.push_back(k);
            }
            auto r = prepare_xx_eigenstate(n, s, rng, {JWMode::Direct, XXCircuit::Compressed});
            EXPECT_EQ(r.ledger.depth(), m * (14 * n - 13) + 6 * (n - 1));
            auto p = prepare_xx_eigenstate(n, s, rng, {JWMode::Direct, XXCircuit::Palindrome});
            EXPECT_EQ(p.ledger.depth(), m * (26 * n - 25));
        }
    }
}

TEST(prepare_xx, larger_chain_residual) {
    Rng rng(23);
    auto r = prepare_xx_eigenstate(14, {0, 3, 6, 13}, rng, {JWMode::Direct, XXCircuit::Compressed});
    EXPECT_LE(r.eigen_residual, 1e-8);
    EXPECT_LE(r.construction_infidelity, 1e-9);
    EXPECT_NEAR(r.sector_weight, 1, 1e-10);
}

TEST(prepare_xx, rejects_bad_input) {
    Rng rng(24);
    EXPECT_THROW(prepare_xx_eigenstate(4, {1, 1}, rng), std::invalid_argument);
    EXPECT_THROW(prepare_xx_eigenstate(4, {4}, rng), std::invalid_argument);
    EXPECT_THROW(prepare_xx_eigenstate(14, {0}, rng, {JWMode::Protocol, XXCircuit::Compressed}), std::invalid_argument);
}
