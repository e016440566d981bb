//! The [[4,1,2]] subsystem code: operators, circuit constructions, round
//! scheduling, and the post-selection / decode rules.
//!
//! Data qubits are 0..3, the shared ancilla is qubit 4. Bit/qubit order is
//! little-endian throughout: basis index bit `q` is the state of qubit `q`.

use thiserror::Error;

use crate::circuit::{Gate, MeasureLabel, PhysicalCircuit, PrepBasis};
use crate::pauli::PauliString;

/// Number of data qubits.
pub const N_DATA: usize = 4;
/// Total width of every encoded circuit (data block plus one ancilla).
pub const N_QUBITS: usize = 5;
/// Index of the shared syndrome ancilla.
pub const ANCILLA: usize = 4;

/// Depolarizing sites in the encoding circuit (three noisy CNOTs).
pub const PREP_NOISE_SITES: usize = 6;
/// Depolarizing sites in one full parity-check round (two five-site X-type
/// sub-circuits plus two four-site Z-type sub-circuits).
pub const ROUND_NOISE_SITES: usize = 18;

/// Errors from circuit assembly.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("round gap must be at least 1")]
    ZeroGap,
}

fn pauli(s: &str) -> PauliString {
    s.parse().expect("static operator literal")
}

/// The four measured gauge generators, in measurement order within a round:
/// XXII, IIXX, ZIZI, IZIZ (on the data block).
#[must_use]
pub fn gauge_generators() -> [PauliString; 4] {
    [pauli("XXII"), pauli("IIXX"), pauli("ZIZI"), pauli("IZIZ")]
}

/// Stabilizer generators: products of the within-basis gauge pairs.
#[must_use]
pub fn stabilizer_generators() -> [PauliString; 2] {
    [pauli("XXXX"), pauli("ZZZZ")]
}

/// The full (sign-resolved) stabilizer group.
#[must_use]
pub fn stabilizer_group() -> [PauliString; 4] {
    [pauli("IIII"), pauli("XXXX"), pauli("YYYY"), pauli("ZZZZ")]
}

/// Bare logical X representative.
#[must_use]
pub fn logical_x() -> PauliString {
    pauli("XIXI")
}

/// Bare logical Z representative.
#[must_use]
pub fn logical_z() -> PauliString {
    pauli("ZZII")
}

/// Basis-state indices (over all 5 qubits, ancilla in |0>) whose equal
/// superposition is the gauge-fixed logical zero (|0000> + |1111>)/sqrt(2).
#[must_use]
pub fn logical_zero_kets() -> [usize; 2] {
    [0b00000, 0b01111]
}

/// Basis-state indices of the gauge-flipped logical zero
/// (|1100> + |0011>)/sqrt(2): same logical state, other gauge sector.
#[must_use]
pub fn gauge_flipped_zero_kets() -> [usize; 2] {
    [0b00011, 0b01100]
}

/// Logical gates with transversal implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalGate {
    X,
    Z,
    H,
}

impl std::fmt::Display for LogicalGate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LogicalGate::X => write!(f, "X"),
            LogicalGate::Z => write!(f, "Z"),
            LogicalGate::H => write!(f, "H"),
        }
    }
}

/// Readout basis of the final destructive data measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReadoutBasis {
    Z,
    X,
}

/// Appends the physical implementation of one logical gate (all constituent
/// gates noisy; the wire relabeling in H is free).
pub fn append_logical_gate(circuit: &mut PhysicalCircuit, gate: LogicalGate) {
    match gate {
        // X_L = XIXI
        LogicalGate::X => {
            circuit.gate_noisy(Gate::X(0));
            circuit.gate_noisy(Gate::X(2));
        }
        // Z_L = ZZII
        LogicalGate::Z => {
            circuit.gate_noisy(Gate::Z(0));
            circuit.gate_noisy(Gate::Z(1));
        }
        // H on every data qubit, then swap labels 1 and 2.
        LogicalGate::H => {
            for q in 0..N_DATA {
                circuit.gate_noisy(Gate::H(q));
            }
            circuit.gate_noiseless(Gate::Relabel(vec![0, 2, 1, 3, ANCILLA]));
        }
    }
}

/// Physical circuit for a single logical gate, as a standalone fragment.
#[must_use]
pub fn compile_logical(gate: LogicalGate) -> PhysicalCircuit {
    let mut c = PhysicalCircuit::new(N_QUBITS);
    append_logical_gate(&mut c, gate);
    c
}

/// Encoding circuit for the logical zero: qubit 0 in |+>, 1..3 in |0>
/// (noiseless), then noisy CNOTs 0->2, 0->1, 2->3.
#[must_use]
pub fn prep_circuit() -> PhysicalCircuit {
    let mut c = PhysicalCircuit::new(N_QUBITS);
    c.prep(0, PrepBasis::XPlus);
    for q in 1..N_DATA {
        c.prep(q, PrepBasis::Z0);
    }
    c.gate_noisy(Gate::Cnot { control: 0, target: 2 });
    c.gate_noisy(Gate::Cnot { control: 0, target: 1 });
    c.gate_noisy(Gate::Cnot { control: 2, target: 3 });
    c
}

/// Data-qubit pairs checked by the two X-type measurements (XXII, IIXX).
pub const X_CHECK_PAIRS: [(usize, usize); 2] = [(0, 1), (2, 3)];
/// Data-qubit pairs checked by the two Z-type measurements (ZIZI, IZIZ).
pub const Z_CHECK_PAIRS: [(usize, usize); 2] = [(0, 2), (1, 3)];

/// Appends one full parity-check round with measurement labels for `round`.
///
/// Slot order is XXII, IIXX, ZIZI, IZIZ. Each X-type sub-circuit preps the
/// ancilla in |+> (noiseless), runs noisy CNOTs ancilla->a, ancilla->b, a
/// noisy H on the ancilla, and a noiseless Z measurement. Each Z-type
/// sub-circuit preps |0>, runs noisy CNOTs a->ancilla, b->ancilla, and
/// measures. Ancilla prep doubles as the reset after the previous slot's
/// measurement.
pub fn append_syndrome_round(circuit: &mut PhysicalCircuit, round: usize) {
    for (slot, &(a, b)) in X_CHECK_PAIRS.iter().enumerate() {
        circuit.prep(ANCILLA, PrepBasis::XPlus);
        circuit.gate_noisy(Gate::Cnot { control: ANCILLA, target: a });
        circuit.gate_noisy(Gate::Cnot { control: ANCILLA, target: b });
        circuit.gate_noisy(Gate::H(ANCILLA));
        circuit.measure(ANCILLA, MeasureLabel { round, slot });
    }
    for (k, &(a, b)) in Z_CHECK_PAIRS.iter().enumerate() {
        circuit.prep(ANCILLA, PrepBasis::Z0);
        circuit.gate_noisy(Gate::Cnot { control: a, target: ANCILLA });
        circuit.gate_noisy(Gate::Cnot { control: b, target: ANCILLA });
        circuit.measure(ANCILLA, MeasureLabel { round, slot: 2 + k });
    }
}

/// One parity-check round as a standalone fragment.
#[must_use]
pub fn syndrome_round_circuit(round: usize) -> PhysicalCircuit {
    let mut c = PhysicalCircuit::new(N_QUBITS);
    append_syndrome_round(&mut c, round);
    c
}

/// Where parity-check rounds are inserted into a logical gate sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    /// A round is inserted after every `gap` logical gates.
    pub gap: usize,
    /// Whether an extra round immediately follows the encoding circuit.
    pub round_after_prep: bool,
}

impl Schedule {
    /// Evenly spaced rounds, no round after prep.
    #[must_use]
    pub fn every(gap: usize) -> Self {
        Self { gap, round_after_prep: false }
    }

    /// Number of parity-check rounds a depth-`depth` circuit receives: one
    /// after every `gap` gates, a final round if the last gate did not land
    /// on a boundary, plus the optional round after prep.
    #[must_use]
    pub fn round_count(&self, depth: usize) -> usize {
        assert!(self.gap > 0, "round gap must be at least 1");
        let base = depth / self.gap + usize::from(depth % self.gap != 0);
        base.max(1) + usize::from(self.round_after_prep)
    }
}

/// Builds the complete encoded circuit for a logical gate sequence: encoding,
/// scheduled parity-check rounds (always ending with one), and — for X-basis
/// readout — a noisy transversal Hadamard so the engines' Z readout measures
/// the right observable. The final data readout itself is implicit.
pub fn assemble_encoded_circuit(
    seq: &[LogicalGate],
    schedule: Schedule,
    readout_basis: ReadoutBasis,
) -> Result<PhysicalCircuit, CodeError> {
    if schedule.gap == 0 {
        return Err(CodeError::ZeroGap);
    }
    let mut c = prep_circuit();
    let mut round = 0;
    if schedule.round_after_prep {
        append_syndrome_round(&mut c, round);
        round += 1;
    }
    let mut boundary_round_pending = true;
    for (i, &g) in seq.iter().enumerate() {
        append_logical_gate(&mut c, g);
        boundary_round_pending = true;
        if (i + 1) % schedule.gap == 0 {
            append_syndrome_round(&mut c, round);
            round += 1;
            boundary_round_pending = false;
        }
    }
    if boundary_round_pending {
        append_syndrome_round(&mut c, round);
    }
    if readout_basis == ReadoutBasis::X {
        append_logical_gate(&mut c, LogicalGate::H);
    }
    Ok(c)
}

/// Whether one round's four outcome bits pass post-selection: the two X-type
/// outcomes must agree and the two Z-type outcomes must agree (the measured
/// operators within each basis differ by a stabilizer, so their product is a
/// deterministic +1 on the code space).
#[must_use]
pub fn round_accepted(bits: [bool; 4]) -> bool {
    (bits[0] == bits[1]) && (bits[2] == bits[3])
}

/// Post-selection over a whole outcome record (four bits per round).
#[must_use]
pub fn all_rounds_accepted(bits: &[bool]) -> bool {
    debug_assert_eq!(bits.len() % 4, 0, "outcome record not a whole number of rounds");
    bits.chunks_exact(4)
        .all(|c| round_accepted([c[0], c[1], c[2], c[3]]))
}

/// Decodes the final destructive Z readout of the data block. With the final
/// parity check enabled, records with odd total parity (outside the code
/// space) are rejected (`None`); otherwise the logical bit is the parity of
/// qubits 0 and 1 (the support of the bare logical Z).
#[must_use]
pub fn decode_z_readout(bits: [bool; 4], final_parity_check: bool) -> Option<bool> {
    if final_parity_check && (bits[0] ^ bits[1] ^ bits[2] ^ bits[3]) {
        return None;
    }
    Some(bits[0] ^ bits[1])
}

/// Tracks a logical gate sequence on the initial logical zero: returns the
/// readout basis in which the final state is a basis state, and the
/// deterministic outcome bit there. (Every sequence over {X, Z, H} keeps the
/// state on the ±Z/±X axes.)
#[must_use]
pub fn true_output(seq: &[LogicalGate]) -> (ReadoutBasis, bool) {
    let mut on_x_axis = false;
    let mut bit = false;
    for g in seq {
        match g {
            LogicalGate::H => on_x_axis = !on_x_axis,
            LogicalGate::X => bit ^= !on_x_axis,
            LogicalGate::Z => bit ^= on_x_axis,
        }
    }
    let basis = if on_x_axis { ReadoutBasis::X } else { ReadoutBasis::Z };
    (basis, bit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitItem;

    #[test]
    fn noise_site_counts_match_constants() {
        assert_eq!(prep_circuit().noise_sites(), PREP_NOISE_SITES);
        assert_eq!(syndrome_round_circuit(0).noise_sites(), ROUND_NOISE_SITES);
    }

    #[test]
    fn logical_gate_noise_sites() {
        assert_eq!(compile_logical(LogicalGate::X).noise_sites(), 2);
        assert_eq!(compile_logical(LogicalGate::Z).noise_sites(), 2);
        assert_eq!(compile_logical(LogicalGate::H).noise_sites(), 4);
    }

    #[test]
    fn round_has_four_labelled_measurements() {
        let c = syndrome_round_circuit(3);
        let labels = c.measurement_labels();
        assert_eq!(labels.len(), 4);
        for (slot, label) in labels.iter().enumerate() {
            assert_eq!(label.round, 3);
            assert_eq!(label.slot, slot);
        }
    }

    #[test]
    fn gauge_pair_products_are_stabilizers() {
        let [g0, g1, g2, g3] = gauge_generators();
        let [sx, sz] = stabilizer_generators();
        assert_eq!(g0.multiply(&g1).unwrap(), sx);
        assert_eq!(g2.multiply(&g3).unwrap(), sz);
    }

    #[test]
    fn logical_operators_commute_with_gauge_group() {
        for g in gauge_generators() {
            assert!(logical_x().commutes(&g).unwrap());
            assert!(logical_z().commutes(&g).unwrap());
        }
        assert!(!logical_x().commutes(&logical_z()).unwrap());
    }

    fn assembled_rounds(depth: usize, gap: usize, after_prep: bool) -> usize {
        let seq = vec![LogicalGate::X; depth];
        let sched = Schedule { gap, round_after_prep: after_prep };
        assemble_encoded_circuit(&seq, sched, ReadoutBasis::Z)
            .unwrap()
            .round_count()
    }

    #[test]
    fn schedule_round_count_matches_assembly() {
        for &(depth, gap, ap) in &[
            (1usize, 1usize, false),
            (1, 1, true),
            (3, 2, false),
            (4, 2, false),
            (5, 5, false),
            (7, 3, true),
            (10, 20, false),
        ] {
            let sched = Schedule { gap, round_after_prep: ap };
            assert_eq!(
                assembled_rounds(depth, gap, ap),
                sched.round_count(depth),
                "depth={depth} gap={gap} after_prep={ap}"
            );
        }
        assert_eq!(assembled_rounds(3, 2, false), 2); // after gate 2, then final
        assert_eq!(assembled_rounds(4, 2, false), 2); // boundary-landing final deduplicated
        assert_eq!(assembled_rounds(1, 1, true), 2);
    }

    #[test]
    fn zero_gap_is_rejected() {
        let err = assemble_encoded_circuit(
            &[LogicalGate::X],
            Schedule { gap: 0, round_after_prep: false },
            ReadoutBasis::Z,
        )
        .unwrap_err();
        assert_eq!(err, CodeError::ZeroGap);
    }

    #[test]
    fn x_basis_readout_appends_transversal_hadamard() {
        let z = assemble_encoded_circuit(&[LogicalGate::H], Schedule::every(1), ReadoutBasis::Z)
            .unwrap();
        let x = assemble_encoded_circuit(&[LogicalGate::H], Schedule::every(1), ReadoutBasis::X)
            .unwrap();
        assert_eq!(x.items.len(), z.items.len() + 5); // 4 noisy H + relabel
        assert_eq!(x.noise_sites(), z.noise_sites() + 4);
        // The extra fragment sits after the final measurement.
        let last_measure = x
            .items
            .iter()
            .rposition(|i| matches!(i, CircuitItem::Measure { .. }))
            .unwrap();
        assert_eq!(last_measure, z.items.len() - 1);
    }

    #[test]
    fn decode_rules() {
        assert_eq!(decode_z_readout([false; 4], true), Some(false));
        assert_eq!(decode_z_readout([true, false, true, false], true), Some(true));
        assert_eq!(decode_z_readout([true, true, true, true], true), Some(false));
        // Odd overall parity: rejected with the check on, decoded without it.
        assert_eq!(decode_z_readout([true, false, false, false], true), None);
        assert_eq!(decode_z_readout([true, false, false, false], false), Some(true));
    }

    #[test]
    fn acceptance_rule() {
        assert!(round_accepted([false, false, false, false]));
        assert!(round_accepted([true, true, false, false]));
        assert!(!round_accepted([true, false, false, false]));
        assert!(!round_accepted([false, false, false, true]));
        assert!(all_rounds_accepted(&[true, true, true, true, false, false, false, false]));
        assert!(!all_rounds_accepted(&[true, true, true, true, true, false, false, false]));
    }

    #[test]
    fn true_output_tracking() {
        use LogicalGate::{H, X, Z};
        assert_eq!(true_output(&[]), (ReadoutBasis::Z, false));
        assert_eq!(true_output(&[X]), (ReadoutBasis::Z, true));
        assert_eq!(true_output(&[X, Z]), (ReadoutBasis::Z, true));
        assert_eq!(true_output(&[H]), (ReadoutBasis::X, false));
        assert_eq!(true_output(&[H, Z]), (ReadoutBasis::X, true));
        assert_eq!(true_output(&[X, H, Z]), (ReadoutBasis::X, false));
        assert_eq!(true_output(&[H, H, X]), (ReadoutBasis::Z, true));
    }
}
