#include "lprep/resource_ledger.h"

#include <set>
#include <stdexcept>

namespace lprep {

LayerEvent LayerEvent::unitary(std::string description, std::vector<std::vector<Qubit>> gates) {
    LayerEvent e{LayerKind::UnitaryLayer, std::move(description), gates.size(), std::move(gates)};
    return e;
}

LayerEvent LayerEvent::unitary_charge(std::string description, std::size_t gate_count) {
    return LayerEvent{LayerKind::UnitaryLayer, std::move(description), gate_count, {}};
}

LayerEvent LayerEvent::locc(std::string description, std::size_t measurement_count) {
    return LayerEvent{LayerKind::LoccStep, std::move(description), measurement_count, {}};
}

void ResourceLedger::record(LayerEvent event) {
    if (event.kind == LayerKind::UnitaryLayer) {
        std::set<Qubit> touched;
        for (const auto &gate : event.gates) {
            if (gate.empty() || gate.size() > 2) {
                throw std::invalid_argument("layer '" + event.description + "' contains a gate on " +
                                            std::to_string(gate.size()) + " qubits; layers hold 1- or 2-qubit gates");
            }
            for (auto q : gate) {
                if (!touched.insert(q).second) {
                    throw std::invalid_argument(
                        "layer '" + event.description + "' has overlapping targets at qubit " + std::to_string(q));
                }
            }
        }
        if (!event.gates.empty() && event.gate_count != event.gates.size()) {
            throw std::invalid_argument("gate_count disagrees with listed gates");
        }
        ++unitary_layers_;
    } else {
        ++locc_steps_;
    }
    trace_.push_back(std::move(event));
}

void ResourceLedger::charge_qft(unsigned ell, const std::string &label) {
    if (ell < 1) {
        throw std::invalid_argument("QFT needs at least one ancilla");
    }
    for (unsigned i = 0; i < ell; ++i) {
        record(LayerEvent::unitary_charge(label + " layer " + std::to_string(i + 1) + "/" + std::to_string(ell), 0));
    }
}

void ResourceLedger::charge_fanout(const std::string &label) {
    record(LayerEvent::unitary_charge(label + ": entangle", 0));
    record(LayerEvent::locc(label + ": measure and correct"));
    record(LayerEvent::unitary_charge(label + ": copy", 0));
}

void ResourceLedger::append(const ResourceLedger &other) {
    for (const auto &e : other.trace_) {
        if (e.kind == LayerKind::UnitaryLayer) {
            ++unitary_layers_;
        } else {
            ++locc_steps_;
        }
        trace_.push_back(e);
    }
}

}  // namespace lprep
