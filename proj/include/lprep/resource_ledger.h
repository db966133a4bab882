#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lprep/state_vector.h"

namespace lprep {

enum class LayerKind { UnitaryLayer, LoccStep };

/// One unitary layer or one LOCC step. For unitary layers `gates` lists the qubits touched by each
/// gate; the recorder rejects layers whose gates overlap.
struct LayerEvent {
    LayerKind kind;
    std::string description;
    std::size_t gate_count = 0;
    std::vector<std::vector<Qubit>> gates;

    static LayerEvent unitary(std::string description, std::vector<std::vector<Qubit>> gates);
    /// A layer charged without listing its gates (e.g. accounting-only paths).
    static LayerEvent unitary_charge(std::string description, std::size_t gate_count);
    static LayerEvent locc(std::string description, std::size_t measurement_count = 0);
};

/// Depth is the number of unitary layers plus LOCC steps.
class ResourceLedger {
   public:
    ResourceLedger() = default;

    void record(LayerEvent event);
    /// Linear-depth inverse QFT on ell ancillas: exactly ell unitary layers.
    void charge_qft(unsigned ell, const std::string &label = "inverse QFT");
    /// Fan-out through LOCC: layer, LOCC step, layer.
    void charge_fanout(const std::string &label);
    /// Appends the events of a sub-protocol executed after everything recorded so far.
    void append(const ResourceLedger &other);

    std::size_t unitary_layers() const {
        return unitary_layers_;
    }
    std::size_t locc_steps() const {
        return locc_steps_;
    }
    std::size_t depth() const {
        return unitary_layers_ + locc_steps_;
    }
    const std::vector<LayerEvent> &trace() const {
        return trace_;
    }

    std::size_t ancillas_per_site = 0;
    std::size_t extra_ancillas = 0;
    std::size_t repetitions = 1;

   private:
    std::size_t unitary_layers_ = 0;
    std::size_t locc_steps_ = 0;
    std::vector<LayerEvent> trace_;
};

}  // namespace lprep
