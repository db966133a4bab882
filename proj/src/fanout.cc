#include "lprep/fanout.h"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace lprep {

MeasurementDriver MeasurementDriver::sampling(Rng &rng) {
    MeasurementDriver d;
    d.rng_ = &rng;
    return d;
}

MeasurementDriver MeasurementDriver::forced(std::vector<int> outcomes) {
    MeasurementDriver d;
    d.forced_ = std::move(outcomes);
    return d;
}

bool MeasurementDriver::exhausted() const {
    return rng_ == nullptr && consumed() >= forced_.size();
}

int MeasurementDriver::measure(StateVector &state, Qubit q, Basis basis) {
    std::pair<int, double> result;
    if (rng_ != nullptr) {
        result = state.measure(q, basis, Sample{rng_});
    } else {
        if (consumed() >= forced_.size()) {
            throw std::logic_error("forced outcome string exhausted");
        }
        result = state.measure(q, basis, Postselect{forced_[consumed()]});
    }
    record_.push(MeasurementEntry{q, basis, result.first, result.second});
    return result.first;
}

ControlledProductSpec ControlledProductSpec::over_layout(
    const RegisterLayout &layout, std::vector<Matrix> branch0, std::vector<Matrix> branch1) {
    if (layout.ancillas_per_site() < 1) {
        throw std::invalid_argument("layout lacks per-site ancillas");
    }
    ControlledProductSpec spec;
    spec.control = layout.site_ancillas.front().front();
    spec.sites = layout.system_sites;
    spec.branch0 = std::move(branch0);
    spec.branch1 = std::move(branch1);
    return spec;
}

void ControlledProductSpec::validate(std::size_t n_qubits) const {
    if (branch0.size() != sites.size() || branch1.size() != sites.size()) {
        throw std::invalid_argument("branch unitary lists must match the number of sites");
    }
    if (control >= n_qubits) {
        throw std::out_of_range("control outside register");
    }
    std::set<Qubit> seen{control};
    for (auto s : sites) {
        if (s >= n_qubits || !seen.insert(s).second) {
            throw std::invalid_argument("sites must be distinct register qubits different from the control");
        }
    }
    for (std::size_t j = 0; j < sites.size(); ++j) {
        for (const Matrix *u : {&branch0[j], &branch1[j]}) {
            if (u->rows() != 2 || u->cols() != 2 || unitarity_deviation(*u) > 1e-10) {
                throw std::invalid_argument("branch unitary for site " + std::to_string(j) + " is not a 2x2 unitary");
            }
        }
    }
}

StateVector apply_v_reference(StateVector state, const ControlledProductSpec &spec) {
    spec.validate(state.n_qubits());
    for (std::size_t j = 0; j < spec.sites.size(); ++j) {
        const Qubit targets[2] = {spec.sites[j], spec.control};
        state.apply_unitary(targets, gates::controlled_pair(spec.branch0[j], spec.branch1[j]));
    }
    return state;
}

namespace {

/// chain[0] is the control; site_controller[j] is the chain qubit that drives sites[j].
struct Chain {
    std::vector<Qubit> qubits;
    std::vector<Qubit> site_controller;
};

Chain build_chain(const RegisterLayout &layout, const ControlledProductSpec &spec) {
    if (layout.ancillas_per_site() < 1) {
        throw std::invalid_argument("layout lacks per-site ancillas required by the V protocol");
    }
    spec.validate(layout.n_qubits());
    Chain chain;
    chain.qubits.push_back(spec.control);
    for (auto site : spec.sites) {
        auto it = std::find(layout.system_sites.begin(), layout.system_sites.end(), site);
        if (it == layout.system_sites.end()) {
            throw std::invalid_argument("target " + std::to_string(site) + " is not a system site of the layout");
        }
        Qubit anc = layout.site_ancillas[static_cast<std::size_t>(it - layout.system_sites.begin())].front();
        if (anc != spec.control) {
            chain.qubits.push_back(anc);
        }
        chain.site_controller.push_back(anc);
    }
    return chain;
}

/// Gate lists for the three two-qubit ancilla layers, 0-indexed chain positions.
struct ChainLayers {
    std::vector<std::pair<std::size_t, std::size_t>> bell;
    std::vector<std::pair<std::size_t, std::size_t>> cnot_a;
    std::vector<std::pair<std::size_t, std::size_t>> cnot_b;
};

ChainLayers chain_layers(std::size_t length) {
    ChainLayers layers;
    for (std::size_t i = 1; 2 * i <= length - 1; ++i) {
        layers.bell.emplace_back(2 * i - 1, 2 * i);
        layers.cnot_a.emplace_back(2 * i - 2, 2 * i - 1);
    }
    for (std::size_t i = 0; 2 * i + 1 <= length - 1; ++i) {
        layers.cnot_b.emplace_back(2 * i, 2 * i + 1);
    }
    return layers;
}

std::vector<std::vector<Qubit>> as_gates(
    const std::vector<std::pair<std::size_t, std::size_t>> &pairs, const std::vector<Qubit> &chain) {
    std::vector<std::vector<Qubit>> out;
    for (auto [a, b] : pairs) {
        out.push_back({chain[a], chain[b]});
    }
    return out;
}

ResourceLedger ledger_for(const Chain &chain, const ControlledProductSpec &spec) {
    const auto layers = chain_layers(chain.qubits.size());
    ResourceLedger ledger;
    ledger.ancillas_per_site = 1;
    ledger.record(LayerEvent::unitary("V: Bell pairs on chain ancillas", as_gates(layers.bell, chain.qubits)));
    ledger.record(LayerEvent::unitary("V: CNOT chain", as_gates(layers.cnot_a, chain.qubits)));
    ledger.record(LayerEvent::locc("V: Z readout, parity corrections, reset", layers.bell.size()));
    ledger.record(LayerEvent::unitary("V: CNOT fill", as_gates(layers.cnot_b, chain.qubits)));
    std::vector<std::vector<Qubit>> controlled;
    for (std::size_t j = 0; j < spec.sites.size(); ++j) {
        controlled.push_back({chain.site_controller[j], spec.sites[j]});
    }
    ledger.record(LayerEvent::unitary("V: controlled branch unitaries", std::move(controlled)));
    ledger.record(LayerEvent::locc("V: X readout, Z^p on control", chain.qubits.size() - 1));
    return ledger;
}

}  // namespace

ResourceLedger v_protocol_ledger(const RegisterLayout &layout, const ControlledProductSpec &spec) {
    return ledger_for(build_chain(layout, spec), spec);
}

std::size_t v_protocol_measurement_count(const RegisterLayout &layout, const ControlledProductSpec &spec) {
    const auto chain = build_chain(layout, spec);
    return chain_layers(chain.qubits.size()).bell.size() + chain.qubits.size() - 1;
}

VProtocolRun apply_v_protocol(
    StateVector state, const RegisterLayout &layout, const ControlledProductSpec &spec, MeasurementDriver &driver) {
    if (state.n_qubits() != layout.n_qubits()) {
        throw std::invalid_argument("state does not match layout");
    }
    const Chain chain = build_chain(layout, spec);
    const auto layers = chain_layers(chain.qubits.size());
    const auto &c = chain.qubits;
    const std::size_t first_entry = driver.consumed();
    const Matrix x = gates::pauli_x();
    const Matrix h = gates::hadamard();

    // Layer 1: |Φ+⟩ on (c[2i-1], c[2i]).
    for (auto [a, b] : layers.bell) {
        state.apply_single(c[a], h);
        const Qubit t[2] = {c[a], c[b]};
        state.apply_unitary(t, gates::cnot());
    }
    // Layer 2: CNOT c[2i-2] -> c[2i-1].
    for (auto [a, b] : layers.cnot_a) {
        const Qubit t[2] = {c[a], c[b]};
        state.apply_unitary(t, gates::cnot());
    }
    // LOCC 1: read the CNOT targets, push accumulated parity onto later even positions, reset.
    std::vector<int> alpha(c.size(), 0);
    for (auto [a, b] : layers.cnot_a) {
        alpha[b] = driver.measure(state, c[b], Basis::Z);
    }
    int parity = 0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        if (k % 2 == 1) {
            parity ^= alpha[k];
            if (alpha[k]) {
                state.apply_single(c[k], x);
            }
        } else if (parity) {
            state.apply_single(c[k], x);
        }
    }
    // Layer 3: CNOT c[2i] -> c[2i+1] fills the odd positions; chain is now a copy of the control.
    for (auto [a, b] : layers.cnot_b) {
        const Qubit t[2] = {c[a], c[b]};
        state.apply_unitary(t, gates::cnot());
    }
    // Layer 4: every chain qubit drives its site.
    for (std::size_t j = 0; j < spec.sites.size(); ++j) {
        const Qubit t[2] = {spec.sites[j], chain.site_controller[j]};
        state.apply_unitary(t, gates::controlled_pair(spec.branch0[j], spec.branch1[j]));
    }
    // LOCC 2: X readout of the chain, Z^p on the control, then reset |±⟩ -> |0⟩.
    int beta_parity = 0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        int beta = driver.measure(state, c[k], Basis::X);
        beta_parity ^= beta;
        state.apply_single(c[k], h);
        if (beta) {
            state.apply_single(c[k], x);
        }
    }
    if (beta_parity) {
        state.apply_single(spec.control, gates::pauli_z());
    }

    MeasurementRecord record;
    const auto &all = driver.record().entries;
    record.entries.assign(all.begin() + static_cast<std::ptrdiff_t>(first_entry), all.end());
    return VProtocolRun{std::move(state), std::move(record), ledger_for(chain, spec)};
}

std::vector<VBranch> enumerate_v_branches(
    const StateVector &state, const RegisterLayout &layout, const ControlledProductSpec &spec) {
    if (spec.sites.size() > 8) {
        throw std::invalid_argument("exhaustive branch enumeration is capped at 8 sites");
    }
    const std::size_t k = v_protocol_measurement_count(layout, spec);
    std::vector<VBranch> branches;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
        std::vector<int> outcomes(k);
        for (std::size_t i = 0; i < k; ++i) {
            outcomes[i] = static_cast<int>((bits >> i) & 1);
        }
        auto driver = MeasurementDriver::forced(outcomes);
        try {
            auto run = apply_v_protocol(state, layout, spec, driver);
            branches.push_back(
                VBranch{std::move(outcomes), run.record.branch_weight(), std::move(run.state), std::move(run.ledger)});
        } catch (const ZeroProbabilityBranch &) {
            // Unreachable outcome string.
        }
    }
    return branches;
}

}  // namespace lprep
