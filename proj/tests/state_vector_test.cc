#include "lprep/state_vector.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_oracles.h"

using namespace lprep;

TEST(state_vector, starts_in_all_zero) {
    StateVector s(3);
    ASSERT_EQ(s.dim(), 8u);
    ASSERT_EQ(s[0], Complex(1));
    ASSERT_NEAR(s.norm(), 1.0, 1e-15);
}

TEST(state_vector, qubit_count_guard) {
    ASSERT_THROW(StateVector(0), std::invalid_argument);
    ASSERT_THROW(StateVector(27), std::invalid_argument);
    ASSERT_THROW(StateVector::from_amplitudes({1.0, 0.0, 0.0}), std::invalid_argument);
    ASSERT_THROW(StateVector::from_amplitudes({1.0, 1.0}), std::invalid_argument);
}

TEST(apply_unitary, identity_leaves_state_unchanged) {
    Rng rng(1);
    auto s = random_state(3, rng);
    const Qubit t[2] = {2, 0};
    auto out = apply_unitary(s, t, gates::identity(4));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        ASSERT_EQ(out[i], s[i]);
    }
}

TEST(apply_unitary, x_on_qubit_zero_sets_lsb) {
    const Qubit t[1] = {0};
    auto out = apply_unitary(StateVector(2), t, gates::pauli_x());
    ASSERT_NEAR(std::abs(out[1]), 1.0, 1e-15);
}

TEST(apply_unitary, bell_state_matches_dense_oracle) {
    StateVector s(2);
    const Qubit h_target[1] = {0};
    s.apply_unitary(h_target, gates::hadamard());
    const Qubit cx[2] = {0, 1};
    s.apply_unitary(cx, gates::cnot());

    oracle::Mat h = oracle::kron_ops(2, {{0, gates::hadamard()}});
    oracle::Mat c = oracle::Mat::Zero(4, 4);
    // CNOT control qubit 0 -> target qubit 1, written out over basis indices.
    c(0, 0) = 1;
    c(3, 1) = 1;
    c(2, 2) = 1;
    c(1, 3) = 1;
    oracle::Vec zero = oracle::Vec::Zero(4);
    zero(0) = 1;
    oracle::Vec expected = c * h * zero;

    ASSERT_NEAR(expected(0).real(), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_NEAR(expected(3).real(), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_NEAR((oracle::to_eigen(s) - expected).norm(), 0.0, 1e-14);
    ASSERT_NEAR(s.norm(), 1.0, 1e-12);
}

TEST(apply_unitary, random_gates_match_dense_construction) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = random_state(4, rng);
        std::vector<Qubit> targets = {static_cast<Qubit>(trial % 4), static_cast<Qubit>((trial + 2) % 4)};
        if (trial % 3 == 0) {
            targets.push_back((trial + 1) % 4);
        }
        Matrix u = gates::random_unitary(std::size_t{1} << targets.size(), rng);
        oracle::Vec expected = oracle::dense_gate(4, targets, u) * oracle::to_eigen(s);
        s.apply_unitary(targets, u);
        ASSERT_NEAR((oracle::to_eigen(s) - expected).norm(), 0.0, 1e-12);
    }
}

TEST(apply_unitary, rejects_non_unitary_with_deviation) {
    StateVector s(2);
    Matrix m = gates::identity(2) * 1.1;
    const Qubit t[1] = {1};
    try {
        s.apply_unitary(t, m);
        FAIL() << "expected rejection";
    } catch (const NonUnitaryMatrix &e) {
        ASSERT_NEAR(e.deviation(), std::sqrt(2.0) * 0.21, 1e-12);
    }
}

TEST(apply_unitary, rejects_duplicate_targets) {
    StateVector s(2);
    const Qubit t[2] = {1, 1};
    ASSERT_THROW(s.apply_unitary(t, gates::identity(4)), std::invalid_argument);
}

TEST(measure, eigenstate) {
    Rng rng(3);
    auto out = measure(StateVector(1), 0, Basis::Z, Sample{&rng});
    ASSERT_EQ(out.bit, 0);
    ASSERT_DOUBLE_EQ(out.probability, 1.0);
    ASSERT_NEAR(std::abs(out.state[0]), 1.0, 1e-15);
}

TEST(measure, bell_pair_collapses_to_product) {
    auto bell = StateVector::from_amplitudes({1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)});
    for (Qubit q : {Qubit{0}, Qubit{1}}) {
        for (int bit : {0, 1}) {
            auto out = measure(bell, q, Basis::Z, Postselect{bit});
            ASSERT_NEAR(out.probability, 0.5, 1e-15);
            ASSERT_NEAR(std::abs(out.state[bit ? 3 : 0]), 1.0, 1e-15);
        }
    }
}

TEST(measure, x_basis_on_zero) {
    for (int bit : {0, 1}) {
        auto out = measure(StateVector(1), 0, Basis::X, Postselect{bit});
        ASSERT_NEAR(out.probability, 0.5, 1e-15);
        ASSERT_NEAR(out.state[0].real(), 1 / std::sqrt(2.0), 1e-15);
        ASSERT_NEAR(out.state[1].real(), bit ? -1 / std::sqrt(2.0) : 1 / std::sqrt(2.0), 1e-15);
    }
}

TEST(measure, zero_probability_postselection_reports_weight) {
    try {
        measure(StateVector(1), 0, Basis::Z, Postselect{1});
        FAIL();
    } catch (const ZeroProbabilityBranch &e) {
        ASSERT_EQ(e.probability(), 0.0);
    }
}

TEST(measure, born_frequencies_within_five_sigma) {
    // cos(0.6)|0> + sin(0.6)|1> on qubit 1 of a two-qubit register.
    StateVector base(2);
    base.apply_single(1, gates::ry_full(0.6));
    const double p1 = std::pow(std::sin(0.6), 2);
    Rng rng(2024);
    const int shots = 10000;
    int ones = 0;
    for (int i = 0; i < shots; ++i) {
        ones += measure(base, 1, Basis::Z, Sample{&rng}).bit;
    }
    const double sigma = std::sqrt(p1 * (1 - p1) / shots);
    ASSERT_LE(std::abs(ones / static_cast<double>(shots) - p1), 5 * sigma);
}

TEST(measure, norm_preserved_through_random_sequence) {
    Rng rng(11);
    auto s = random_state(5, rng);
    for (int step = 0; step < 40; ++step) {
        if (step % 4 == 3) {
            s.measure(rng.next_u64() % 5, step % 8 == 3 ? Basis::X : Basis::Z, Sample{&rng});
        } else {
            std::vector<Qubit> t = {static_cast<Qubit>(step % 5), static_cast<Qubit>((step + 3) % 5)};
            s.apply_unitary(t, gates::random_unitary(4, rng));
        }
        ASSERT_NEAR(s.norm(), 1.0, 1e-12);
    }
}

TEST(fidelity, basic_cases) {
    StateVector zero(1);
    auto one = StateVector::basis_state(1, 1);
    ASSERT_DOUBLE_EQ(fidelity(zero, zero), 1.0);
    ASSERT_DOUBLE_EQ(fidelity(zero, one), 0.0);
    for (double phi : {0.3, 1.7, -2.9}) {
        auto rotated = StateVector::from_amplitudes({std::polar(1.0, phi), 0});
        ASSERT_NEAR(fidelity(zero, rotated), 1.0, 1e-15);
    }
}

TEST(fidelity, symmetric_and_dimension_checked) {
    Rng rng(5);
    auto a = random_state(3, rng);
    auto b = random_state(3, rng);
    ASSERT_NEAR(fidelity(a, b), fidelity(b, a), 1e-15);
    ASSERT_THROW(fidelity(a, StateVector(2)), std::invalid_argument);
}

TEST(excitation_projector_reference, w_state_is_eigenstate) {
    auto w = oracle::from_eigen(oracle::dicke(3, 3, 1));
    const Qubit sites[3] = {0, 1, 2};
    auto proj = excitation_projector_reference(w, sites, 1, 2);
    ASSERT_NEAR(proj.probability, 1.0, 1e-14);
    ASSERT_NEAR(fidelity(proj.state, w), 1.0, 1e-14);
}

TEST(excitation_projector_reference, parity_of_plus_plus) {
    auto plus2 = StateVector::from_amplitudes({0.5, 0.5, 0.5, 0.5});
    const Qubit sites[2] = {0, 1};
    auto proj = excitation_projector_reference(plus2, sites, 0, 1);
    ASSERT_NEAR(proj.probability, 0.5, 1e-15);
    ASSERT_NEAR(proj.state[0].real(), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_NEAR(proj.state[3].real(), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_NEAR(std::abs(proj.state[1]), 0, 1e-15);
}

TEST(excitation_projector_reference, completeness_and_idempotence) {
    Rng rng(17);
    for (unsigned n_sites = 1; n_sites <= 6; ++n_sites) {
        auto s = random_state(n_sites + 1, rng);
        std::vector<Qubit> sites;
        for (Qubit q = 0; q < n_sites; ++q) {
            sites.push_back(q);
        }
        const auto max_ell = static_cast<unsigned>(std::ceil(std::log2(n_sites + 1.0)));
        for (unsigned ell = 1; ell <= max_ell; ++ell) {
            double total = 0;
            for (std::uint64_t j = 0; j < (1u << ell); ++j) {
                try {
                    auto p = excitation_projector_reference(s, sites, j, ell);
                    total += p.probability;
                    auto again = excitation_projector_reference(p.state, sites, j, ell);
                    ASSERT_NEAR(again.probability, 1.0, 1e-12);
                } catch (const ZeroProbabilityBranch &e) {
                    total += e.probability();
                }
            }
            ASSERT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(excitation_projector_reference, zero_weight_throws) {
    const Qubit sites[2] = {0, 1};
    ASSERT_THROW(excitation_projector_reference(StateVector(2), sites, 1, 1), ZeroProbabilityBranch);
    ASSERT_THROW(excitation_projector_reference(StateVector(2), sites, 2, 1), std::invalid_argument);
}

TEST(register_layout, contiguous_is_valid) {
    auto layout = RegisterLayout::contiguous(4, 2, 3);
    layout.validate();
    ASSERT_EQ(layout.n_qubits(), 4u + 8u + 3u);
    ASSERT_EQ(layout.ancillas_per_site(), 2u);
    ASSERT_EQ(layout.extra_ancillas.front(), 4u);
}

TEST(register_layout, rejects_overlap_and_uneven_ancillas) {
    auto layout = RegisterLayout::contiguous(3, 1, 0);
    layout.site_ancillas[1][0] = 0;
    ASSERT_THROW(layout.validate(), std::invalid_argument);
    auto uneven = RegisterLayout::contiguous(2, 1, 1);
    uneven.site_ancillas[1].push_back(uneven.extra_ancillas[0]);
    uneven.extra_ancillas.clear();
    ASSERT_THROW(uneven.validate(), std::invalid_argument);
}

TEST(state_vector, zero_qubit_extension_round_trip) {
    Rng rng(19);
    auto s = random_state(3, rng);
    auto big = s.with_zero_qubits(2);
    ASSERT_EQ(big.n_qubits(), 5u);
    auto back = big.without_high_qubits(3);
    ASSERT_NEAR(fidelity(back, s), 1.0, 1e-14);
    big.apply_single(4, gates::hadamard());
    ASSERT_THROW(big.without_high_qubits(3), std::runtime_error);
}

TEST(gates, inverse_qft_is_unitary_and_inverts_phase_ramp) {
    for (unsigned k = 1; k <= 4; ++k) {
        Matrix f = gates::inverse_qft(k);
        ASSERT_LT(unitarity_deviation(f), 1e-12);
        const std::size_t d = std::size_t{1} << k;
        for (std::size_t j = 0; j < d; ++j) {
            Eigen::VectorXcd ramp(static_cast<Eigen::Index>(d));
            for (std::size_t c = 0; c < d; ++c) {
                ramp(static_cast<Eigen::Index>(c)) =
                    std::polar(1.0 / std::sqrt(double(d)), 2 * std::numbers::pi * double(j * c) / double(d));
            }
            Eigen::VectorXcd out = f * ramp;
            ASSERT_NEAR(std::abs(out(static_cast<Eigen::Index>(j))), 1.0, 1e-12);
        }
    }
}
