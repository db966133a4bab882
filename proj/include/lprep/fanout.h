#pragma once

#include <cstddef>
#include <vector>

#include "lprep/resource_ledger.h"
#include "lprep/state_vector.h"

namespace lprep {

/// Source of measurement outcomes for protocols with mid-circuit measurements: either Born sampling
/// from an Rng, or a forced outcome string used to enumerate branches.
class MeasurementDriver {
   public:
    static MeasurementDriver sampling(Rng &rng);
    static MeasurementDriver forced(std::vector<int> outcomes);

    /// Measures q, collapsing `state`, and logs the outcome. Forced outcomes with zero weight throw
    /// ZeroProbabilityBranch.
    int measure(StateVector &state, Qubit q, Basis basis);

    const MeasurementRecord &record() const {
        return record_;
    }
    std::size_t consumed() const {
        return record_.entries.size();
    }
    bool exhausted() const;

   private:
    Rng *rng_ = nullptr;
    std::vector<int> forced_;
    MeasurementRecord record_;
};

/// V = |0⟩⟨0|_b ⊗ ⊗_j U_{0,j} + |1⟩⟨1|_b ⊗ ⊗_j U_{1,j}, with U_{k,j} acting on sites[j].
struct ControlledProductSpec {
    Qubit control = 0;
    std::vector<Qubit> sites;
    std::vector<Matrix> branch0;
    std::vector<Matrix> branch1;

    /// Spec over every system site of `layout`, controlled by the first ancilla of site 0.
    static ControlledProductSpec over_layout(
        const RegisterLayout &layout, std::vector<Matrix> branch0, std::vector<Matrix> branch1);
    void validate(std::size_t n_qubits) const;
};

/// Direct application: one controlled 2×2 pair per site.
StateVector apply_v_reference(StateVector state, const ControlledProductSpec &spec);

struct VProtocolRun {
    StateVector state;
    MeasurementRecord record;
    ResourceLedger ledger;
};

/// Constant-depth implementation with one ancilla per target site and two LOCC rounds: Bell pairs,
/// CNOT chain, parity-corrected Z readout, CNOT fill, controlled branch layer, X readout with a
/// Z^p fix on the control. All chain ancillas other than the control are returned to |0⟩.
///
/// The control may be the first target's own ancilla, a separate extra ancilla, or a system qubit;
/// every ancilla in the chain other than the control must start in |0⟩.
VProtocolRun apply_v_protocol(
    StateVector state, const RegisterLayout &layout, const ControlledProductSpec &spec, MeasurementDriver &driver);
/// Same ledger as apply_v_protocol without simulating anything.
ResourceLedger v_protocol_ledger(const RegisterLayout &layout, const ControlledProductSpec &spec);
/// Number of single-qubit measurements apply_v_protocol performs.
std::size_t v_protocol_measurement_count(const RegisterLayout &layout, const ControlledProductSpec &spec);

struct VBranch {
    std::vector<int> outcomes;
    double weight;
    StateVector state;
    ResourceLedger ledger;
};

/// Runs apply_v_protocol once per measurement outcome string. Capped at 8 target sites.
std::vector<VBranch> enumerate_v_branches(
    const StateVector &state, const RegisterLayout &layout, const ControlledProductSpec &spec);

}  // namespace lprep
