#include "lprep/excitation_measure.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lprep {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

std::vector<Complex> kick_phases(std::size_t n_sites, unsigned x, unsigned offset, int sign) {
    std::vector<Complex> table(n_sites + 1);
    const double denom = std::ldexp(1.0, static_cast<int>(x));
    for (std::size_t e = 0; e <= n_sites; ++e) {
        table[e] = std::polar(1.0, sign * kTwoPi * (static_cast<double>(e) - offset) / denom);
    }
    return table;
}

/// Ancilla x (1-based) of a register laid out as sites, then extras.
Qubit ancilla(const RegisterLayout &layout, unsigned x) {
    return layout.extra_ancillas[x - 1];
}

ControlledProductSpec kick_spec(Qubit control, const std::vector<Qubit> &sites, unsigned x, unsigned offset,
                                int sign) {
    ControlledProductSpec spec;
    spec.control = control;
    spec.sites = sites;
    const double angle = sign * kTwoPi / std::ldexp(1.0, static_cast<int>(x));
    spec.branch0.assign(sites.size(), gates::identity());
    spec.branch1.assign(sites.size(), gates::phase(angle));
    // The −offset part of the phase is global on the |1⟩ branch; fold it into one site.
    spec.branch1[0] *= std::polar(1.0, -angle * offset);
    return spec;
}

ResourceLedger kick_ledger(std::size_t n_sites, unsigned ell, unsigned x) {
    auto layout = RegisterLayout::contiguous(n_sites, 1, ell);
    return v_protocol_ledger(layout, kick_spec(layout.extra_ancillas[x - 1], layout.system_sites, x, 0, 1));
}

/// Controlled e^{sign·2πi(N_e − offset)/2^x} with ancilla x as control.
void controlled_kick(StateVector &state, const RegisterLayout &layout, const ModularMeasurementSpec &spec,
                     const ExcitationCounter &count, unsigned x, int sign, KickMode mode, Rng &rng) {
    const Qubit control = ancilla(layout, x);
    if (mode == KickMode::Fast) {
        const auto table = kick_phases(spec.sites.size(), x, spec.offset, sign);
        const std::uint64_t bit = std::uint64_t{1} << control;
        state.apply_phases([&](std::uint64_t i) { return (i & bit) ? table[count(i)] : Complex(1); });
        return;
    }
    auto driver = MeasurementDriver::sampling(rng);
    auto run = apply_v_protocol(std::move(state), layout, kick_spec(control, spec.sites, x, spec.offset, sign), driver);
    state = std::move(run.state);
}

Matrix qft(unsigned ell) {
    return gates::inverse_qft(ell).adjoint();
}

/// Ancilla targets for the (inverse) QFT: ancilla ell is the least significant bit.
std::vector<Qubit> qft_targets(const RegisterLayout &layout, unsigned ell) {
    std::vector<Qubit> t;
    for (unsigned x = ell; x >= 1; --x) {
        t.push_back(ancilla(layout, x));
    }
    return t;
}

std::vector<std::vector<Qubit>> single_gates(const std::vector<Qubit> &qubits) {
    std::vector<std::vector<Qubit>> out;
    for (auto q : qubits) {
        out.push_back({q});
    }
    return out;
}

/// Runs H, kicks and the inverse QFT; the ancillas then hold the readout integer.
void phase_estimate(StateVector &state, const RegisterLayout &layout, const ModularMeasurementSpec &spec,
                    KickMode mode, Rng &rng) {
    const ExcitationCounter count(state.n_qubits(), spec.sites);
    for (unsigned x = 1; x <= spec.ell; ++x) {
        state.apply_single(ancilla(layout, x), gates::hadamard());
    }
    for (unsigned x = 1; x <= spec.ell; ++x) {
        controlled_kick(state, layout, spec, count, x, +1, mode, rng);
    }
    state.apply_unitary(qft_targets(layout, spec.ell), gates::inverse_qft(spec.ell));
}

std::uint64_t pow2(unsigned ell) {
    return std::uint64_t{1} << ell;
}

}  // namespace

ModularMeasurementSpec ModularMeasurementSpec::over_sites(std::size_t n_sites, unsigned ell, unsigned offset) {
    ModularMeasurementSpec spec;
    spec.ell = ell;
    spec.offset = offset;
    for (Qubit q = 0; q < n_sites; ++q) {
        spec.sites.push_back(q);
    }
    return spec;
}

unsigned exact_ell(std::size_t n_sites) {
    unsigned ell = 0;
    while (pow2(ell) < n_sites + 1) {
        ++ell;
    }
    return std::max(ell, 1u);
}

void ModularMeasurementSpec::validate() const {
    if (sites.empty()) {
        throw std::invalid_argument("modular measurement needs at least one site");
    }
    if (ell < 1 || ell > exact_ell(sites.size())) {
        throw std::invalid_argument("ell must lie in [1, ceil(log2(N+1))] = [1, " +
                                    std::to_string(exact_ell(sites.size())) + "], got " + std::to_string(ell));
    }
    if (offset > sites.size()) {
        throw std::invalid_argument("offset must lie in [0, N]");
    }
}

void apply_phase_kick(StateVector &state, const ModularMeasurementSpec &spec, unsigned x) {
    const ExcitationCounter count(state.n_qubits(), spec.sites);
    const auto table = kick_phases(spec.sites.size(), x, spec.offset, +1);
    state.apply_phases([&](std::uint64_t i) { return table[count(i)]; });
}

ResourceLedger excitation_measurement_ledger(std::size_t n_sites, unsigned ell) {
    ResourceLedger ledger;
    auto layout = RegisterLayout::contiguous(n_sites, 1, ell);
    ledger.record(LayerEvent::unitary("H on phase ancillas", single_gates(
                                                                 {layout.extra_ancillas.begin(),
                                                                  layout.extra_ancillas.begin() + ell})));
    for (unsigned x = 1; x <= ell; ++x) {
        ledger.append(kick_ledger(n_sites, ell, x));
    }
    ledger.charge_qft(ell);
    ledger.record(LayerEvent::locc("Z readout of phase ancillas, reset", ell));
    ledger.ancillas_per_site = 1;
    ledger.extra_ancillas = ell;
    return ledger;
}

ExcitationMeasurement measure_excitations_mod(StateVector state, const RegisterLayout &layout,
                                              const ModularMeasurementSpec &spec, Rng &rng,
                                              std::optional<std::uint64_t> postselect, KickMode mode) {
    spec.validate();
    layout.validate();
    if (state.n_qubits() != layout.n_qubits()) {
        throw std::invalid_argument("state does not match layout");
    }
    if (layout.extra_ancillas.size() < spec.ell) {
        throw std::invalid_argument("layout provides fewer than ell extra ancillas");
    }
    if (mode == KickMode::Protocol && layout.ancillas_per_site() < 1) {
        throw std::invalid_argument("protocol kicks need one ancilla per site");
    }
    const std::uint64_t d = pow2(spec.ell);
    if (postselect && *postselect >= d) {
        throw std::invalid_argument("postselected readout out of range");
    }

    phase_estimate(state, layout, spec, mode, rng);

    MeasurementRecord record;
    std::uint64_t readout = 0;
    for (unsigned x = 1; x <= spec.ell; ++x) {
        const Qubit q = ancilla(layout, x);
        const unsigned weight = spec.ell - x;
        MeasureMode m = postselect ? MeasureMode{Postselect{static_cast<int>((*postselect >> weight) & 1)}}
                                   : MeasureMode{Sample{&rng}};
        auto [bit, p] = state.measure(q, Basis::Z, m);
        record.push(MeasurementEntry{q, Basis::Z, bit, p});
        readout |= static_cast<std::uint64_t>(bit) << weight;
        if (bit) {
            state.apply_single(q, gates::pauli_x());
        }
    }
    return ExcitationMeasurement{readout,
                                 (readout + spec.offset) % d,
                                 record.branch_weight(),
                                 std::move(state),
                                 record,
                                 excitation_measurement_ledger(spec.sites.size(), spec.ell)};
}

ExcitationMeasurement measure_excitations_mod(const StateVector &system, unsigned ell, unsigned offset, Rng &rng,
                                              std::optional<std::uint64_t> postselect, KickMode mode) {
    const std::size_t n = system.n_qubits();
    const std::size_t per_site = mode == KickMode::Protocol ? 1 : 0;
    auto layout = RegisterLayout::contiguous(n, per_site, ell);
    auto spec = ModularMeasurementSpec::over_sites(n, ell, offset);
    auto out = measure_excitations_mod(system.with_zero_qubits(layout.n_qubits() - n), layout, spec, rng,
                                       postselect, mode);
    out.state = out.state.without_high_qubits(n);
    return out;
}

std::vector<double> readout_distribution(const StateVector &system, unsigned ell, unsigned offset) {
    const std::size_t n = system.n_qubits();
    auto layout = RegisterLayout::contiguous(n, 0, ell);
    auto spec = ModularMeasurementSpec::over_sites(n, ell, offset);
    spec.validate();
    auto state = system.with_zero_qubits(ell);
    Rng unused(0);
    phase_estimate(state, layout, spec, KickMode::Fast, unused);
    std::vector<double> dist(pow2(ell), 0.0);
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
        std::uint64_t r = 0;
        for (unsigned x = 1; x <= ell; ++x) {
            r |= ((i >> ancilla(layout, x)) & 1) << (ell - x);
        }
        dist[r] += std::norm(state[i]);
    }
    return dist;
}

std::size_t parallel_register_size(std::size_t n_sites, unsigned ell) {
    return n_sites * ell + ell;
}

ResourceLedger parallel_measurement_ledger(std::size_t n_sites, unsigned ell) {
    if (ell < 1) {
        throw std::invalid_argument("ell must be positive");
    }
    ResourceLedger ledger;
    ledger.charge_fanout("fan-out of the system into ell - 1 copies");
    ledger.record(LayerEvent::unitary_charge("H on phase ancillas", ell));
    // One V per copy; the copies and their ancillas are disjoint, so the ell V circuits share layers.
    ResourceLedger v = kick_ledger(n_sites, 1, 1);
    for (const auto &e : v.trace()) {
        ledger.record(e.kind == LayerKind::UnitaryLayer
                          ? LayerEvent::unitary_charge(e.description + " (all copies)", e.gate_count * ell)
                          : LayerEvent::locc(e.description + " (all copies)", e.gate_count * ell));
    }
    ledger.charge_fanout("inverse fan-out");
    ledger.record(LayerEvent::unitary_charge("H on phase ancillas", ell));
    ledger.record(LayerEvent::locc("Z readout of phase ancillas", ell));
    ledger.ancillas_per_site = 2 * ell - 1;
    ledger.extra_ancillas = ell;
    return ledger;
}

ParallelMeasurement measure_excitations_parallel(const StateVector &system, unsigned ell, unsigned target, Rng &rng,
                                                 bool postselect_success) {
    const std::size_t n = system.n_qubits();
    ModularMeasurementSpec::over_sites(n, ell, target).validate();
    const std::size_t total = parallel_register_size(n, ell);
    if (total > StateVector::kMaxQubits) {
        throw std::invalid_argument("parallel measurement needs " + std::to_string(total) +
                                    " qubits; use parallel_measurement_ledger for this size");
    }
    // Layout: sites, ell phase ancillas, then copies 2..ell of the sites.
    auto copy_site = [&](unsigned x, std::size_t j) -> Qubit { return x == 1 ? j : n + ell + (x - 2) * n + j; };
    auto phase_anc = [&](unsigned x) -> Qubit { return n + x - 1; };
    StateVector state = system.with_zero_qubits(total - n);

    auto fan_out = [&] {
        for (unsigned x = 2; x <= ell; ++x) {
            for (std::size_t j = 0; j < n; ++j) {
                const Qubit t[2] = {j, copy_site(x, j)};
                state.apply_unitary(t, gates::cnot());
            }
        }
    };
    fan_out();
    for (unsigned x = 1; x <= ell; ++x) {
        state.apply_single(phase_anc(x), gates::hadamard());
    }
    for (unsigned x = 1; x <= ell; ++x) {
        std::vector<Qubit> copy;
        for (std::size_t j = 0; j < n; ++j) {
            copy.push_back(copy_site(x, j));
        }
        const ExcitationCounter count(total, copy);
        const auto table = kick_phases(n, x, target, +1);
        const std::uint64_t bit = std::uint64_t{1} << phase_anc(x);
        state.apply_phases([&](std::uint64_t i) { return (i & bit) ? table[count(i)] : Complex(1); });
    }
    fan_out();
    bool success = true;
    MeasurementRecord record;
    for (unsigned x = 1; x <= ell; ++x) {
        const Qubit q = phase_anc(x);
        state.apply_single(q, gates::hadamard());
        MeasureMode m = postselect_success ? MeasureMode{Postselect{0}} : MeasureMode{Sample{&rng}};
        auto [bit, p] = state.measure(q, Basis::Z, m);
        record.push(MeasurementEntry{q, Basis::Z, bit, p});
        if (bit) {
            success = false;
            state.apply_single(q, gates::pauli_x());
        }
    }
    return ParallelMeasurement{success, record.branch_weight(), state.without_high_qubits(n),
                               parallel_measurement_ledger(n, ell)};
}

ResourceLedger partial_sign_flip_ledger(std::size_t n_sites, unsigned ell) {
    ResourceLedger ledger;
    ledger.record(LayerEvent::unitary_charge("H on phase ancillas", ell));
    for (unsigned x = 1; x <= ell; ++x) {
        ledger.append(kick_ledger(n_sites, ell, x));
    }
    ledger.charge_qft(ell);
    for (unsigned i = 0; i < ell * ell; ++i) {
        ledger.record(LayerEvent::unitary_charge("phase on all-zero ancilla string", 1));
    }
    ledger.charge_qft(ell, "QFT");
    for (unsigned x = 1; x <= ell; ++x) {
        ledger.append(kick_ledger(n_sites, ell, x));
    }
    ledger.record(LayerEvent::unitary_charge("H on phase ancillas", ell));
    ledger.ancillas_per_site = 1;
    ledger.extra_ancillas = ell;
    return ledger;
}

SignFlipRun partial_sign_flip(const StateVector &system, unsigned ell, unsigned m, double phi) {
    const std::size_t n = system.n_qubits();
    auto layout = RegisterLayout::contiguous(n, 0, ell);
    auto spec = ModularMeasurementSpec::over_sites(n, ell, m);
    spec.validate();
    auto state = system.with_zero_qubits(ell);
    Rng unused(0);
    phase_estimate(state, layout, spec, KickMode::Fast, unused);

    std::uint64_t anc_mask = 0;
    for (auto q : layout.extra_ancillas) {
        anc_mask |= std::uint64_t{1} << q;
    }
    const Complex flip = std::polar(1.0, phi);
    state.apply_phases([&](std::uint64_t i) { return (i & anc_mask) ? Complex(1) : flip; });

    state.apply_unitary(qft_targets(layout, ell), qft(ell));
    const ExcitationCounter count(state.n_qubits(), spec.sites);
    for (unsigned x = 1; x <= ell; ++x) {
        controlled_kick(state, layout, spec, count, x, -1, KickMode::Fast, unused);
    }
    for (unsigned x = 1; x <= ell; ++x) {
        state.apply_single(ancilla(layout, x), gates::hadamard());
    }
    return SignFlipRun{state.without_high_qubits(n), partial_sign_flip_ledger(n, ell)};
}

StateVector partial_sign_flip_reference(StateVector system, unsigned ell, unsigned m, double phi) {
    std::vector<Qubit> sites;
    for (Qubit q = 0; q < system.n_qubits(); ++q) {
        sites.push_back(q);
    }
    const ExcitationCounter count(system.n_qubits(), sites);
    const std::uint64_t d = pow2(ell);
    const Complex flip = std::polar(1.0, phi);
    system.apply_phases([&](std::uint64_t i) {
        return (count(i) + d * (sites.size() + 1) - m) % d == 0 ? flip : Complex(1);
    });
    return system;
}

}  // namespace lprep
