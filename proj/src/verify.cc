#include "lprep/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lprep/excitation_measure.h"
#include "lprep/fanout.h"

namespace lprep {

VVerification verify_v_protocol(std::size_t n, std::size_t trials, Rng &rng) {
    if (n < 1 || n > 8) {
        throw std::invalid_argument("verify-v supports 1 <= N <= 8");
    }
    VVerification out;
    out.n = n;
    out.trials = trials;
    out.min_depth = SIZE_MAX;
    const auto layout = RegisterLayout::contiguous(n, 1, 0);
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<Matrix> b0, b1;
        for (std::size_t j = 0; j < n; ++j) {
            b0.push_back(gates::random_unitary(2, rng));
            b1.push_back(gates::random_unitary(2, rng));
        }
        const auto spec = ControlledProductSpec::over_layout(layout, b0, b1);
        auto input = random_state(n, rng).with_zero_qubits(layout.n_qubits() - n);
        input.apply_single(spec.control, gates::random_unitary(2, rng));
        const Qubit pair[2] = {spec.control, 0};
        input.apply_unitary(pair, gates::random_unitary(4, rng));

        const auto reference = apply_v_reference(input, spec);
        std::vector<Qubit> others;
        for (const auto &site : layout.site_ancillas) {
            for (auto q : site) {
                if (q != spec.control) {
                    others.push_back(q);
                }
            }
        }
        double total = 0;
        for (const auto &b : enumerate_v_branches(input, layout, spec)) {
            ++out.branches;
            total += b.weight;
            out.min_fidelity = std::min(out.min_fidelity, fidelity(b.state, reference));
            out.max_ancilla_leak = std::max(out.max_ancilla_leak, 1 - b.state.probability_all_zero(others));
            out.min_depth = std::min(out.min_depth, b.ledger.depth());
            out.max_depth = std::max(out.max_depth, b.ledger.depth());
        }
        out.max_weight_defect = std::max(out.max_weight_defect, std::abs(total - 1));
    }
    if (out.branches == 0) {
        out.min_depth = 0;
    }
    return out;
}

MeasureVerification verify_excitation_measurement(std::size_t n, unsigned ell, std::size_t trials, Rng &rng) {
    if (ell < 1 || ell > exact_ell(n)) {
        throw std::invalid_argument("ell must lie in 1..ceil(log2(N+1))");
    }
    MeasureVerification out;
    out.n = n;
    out.ell = ell;
    out.trials = trials;
    std::vector<Qubit> sites(n);
    for (Qubit q = 0; q < n; ++q) {
        sites[q] = q;
    }
    const std::uint64_t d = std::uint64_t{1} << ell;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto psi = random_state(n, rng);
        const auto law = readout_distribution(psi, ell, 0);
        double tv = 0;
        for (std::uint64_t r = 0; r < d; ++r) {
            double ref_p = 0;
            std::optional<StateVector> ref_state;
            try {
                auto proj = excitation_projector_reference(psi, sites, r, ell);
                ref_p = proj.probability;
                ref_state = std::move(proj.state);
            } catch (const ZeroProbabilityBranch &) {
            }
            tv += std::abs(law[r] - ref_p);
            if (ref_state) {
                auto m = measure_excitations_mod(psi, ell, 0, rng, r);
                out.min_post_fidelity = std::min(out.min_post_fidelity, fidelity(m.state, *ref_state));
            }
        }
        out.max_tv_distance = std::max(out.max_tv_distance, 0.5 * tv);
    }
    return out;
}

}  // namespace lprep
