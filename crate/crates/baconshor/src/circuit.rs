//! Circuit intermediate representation shared by both engines.
//!
//! A [`PhysicalCircuit`] is a flat list of items: qubit preparations, Clifford
//! gates (optionally noisy), and single-qubit Z-basis measurements. The noise
//! model is fixed by construction: every noisy gate is followed by independent
//! single-qubit depolarizing channels on each qubit it touches, so a noisy
//! CNOT contributes two noise sites and a noisy H contributes one. Preparations
//! and measurements are always noiseless here; engines reject any attempt to
//! attach noise elsewhere simply because the representation cannot express it.

use std::fmt;

/// A Clifford gate on labelled qubits.
///
/// `Relabel` is a wire renaming, not a physical operation: entry `perm[src]`
/// gives the new label of qubit `src`. It never carries noise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    Relabel(Vec<usize>),
}

impl Gate {
    /// Qubits that receive a depolarizing channel when this gate is noisy.
    #[must_use]
    pub fn noise_support(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Relabel(_) => Vec::new(),
        }
    }

    /// Largest qubit index referenced, if any.
    #[must_use]
    pub fn max_qubit(&self) -> Option<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => Some(*q),
            Gate::Cnot { control, target } => Some(*control.max(target)),
            Gate::Relabel(perm) => perm.iter().copied().max(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "h q{q}"),
            Gate::X(q) => write!(f, "x q{q}"),
            Gate::Z(q) => write!(f, "z q{q}"),
            Gate::Cnot { control, target } => write!(f, "cnot q{control} -> q{target}"),
            Gate::Relabel(perm) => write!(f, "relabel {perm:?}"),
        }
    }
}

/// Preparation basis for a qubit reset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrepBasis {
    /// Reset to |0>.
    Z0,
    /// Reset to |+>.
    XPlus,
}

/// Identifies a mid-circuit measurement: which parity-check round and which
/// of the four checks within it (0 = XXII, 1 = IIXX, 2 = ZIZI, 3 = IZIZ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeasureLabel {
    pub round: usize,
    pub slot: usize,
}

impl fmt::Display for MeasureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}.s{}", self.round, self.slot)
    }
}

/// One step of a physical circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CircuitItem {
    /// Noiseless reset of one qubit into the given basis state.
    Prep { qubit: usize, basis: PrepBasis },
    /// Clifford gate; when `noisy`, each qubit in the gate's noise support is
    /// hit by an independent depolarizing channel immediately afterwards.
    Gate { gate: Gate, noisy: bool },
    /// Noiseless Z-basis measurement, recorded under `label`. The qubit is
    /// projected, not discarded; reuse requires a later `Prep`.
    Measure { qubit: usize, label: MeasureLabel },
}

/// A fixed-width circuit: a list of items over `n_qubits` wires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalCircuit {
    pub n_qubits: usize,
    pub items: Vec<CircuitItem>,
}

impl PhysicalCircuit {
    #[must_use]
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, items: Vec::new() }
    }

    fn check_qubit(&self, q: usize) {
        assert!(q < self.n_qubits, "qubit {q} out of range for width {}", self.n_qubits);
    }

    fn check_gate(&self, gate: &Gate) {
        if let Some(m) = gate.max_qubit() {
            self.check_qubit(m);
        }
        if let Gate::Relabel(perm) = gate {
            assert_eq!(perm.len(), self.n_qubits, "relabel width mismatch");
        }
    }

    pub fn prep(&mut self, qubit: usize, basis: PrepBasis) {
        self.check_qubit(qubit);
        self.items.push(CircuitItem::Prep { qubit, basis });
    }

    pub fn gate_noisy(&mut self, gate: Gate) {
        self.check_gate(&gate);
        self.items.push(CircuitItem::Gate { gate, noisy: true });
    }

    pub fn gate_noiseless(&mut self, gate: Gate) {
        self.check_gate(&gate);
        self.items.push(CircuitItem::Gate { gate, noisy: false });
    }

    pub fn measure(&mut self, qubit: usize, label: MeasureLabel) {
        self.check_qubit(qubit);
        self.items.push(CircuitItem::Measure { qubit, label });
    }

    /// Append all items of `other` (same width required).
    pub fn extend(&mut self, other: &PhysicalCircuit) {
        assert_eq!(self.n_qubits, other.n_qubits, "circuit width mismatch");
        self.items.extend(other.items.iter().cloned());
    }

    /// Total number of single-qubit depolarizing channels in the circuit.
    #[must_use]
    pub fn noise_sites(&self) -> usize {
        self.items
            .iter()
            .map(|item| match item {
                CircuitItem::Gate { gate, noisy: true } => gate.noise_support().len(),
                _ => 0,
            })
            .sum()
    }

    /// Labels of all measurements, in circuit order.
    #[must_use]
    pub fn measurement_labels(&self) -> Vec<MeasureLabel> {
        self.items
            .iter()
            .filter_map(|item| match item {
                CircuitItem::Measure { label, .. } => Some(*label),
                _ => None,
            })
            .collect()
    }

    /// Number of complete parity-check rounds, inferred from the highest
    /// round index among measurement labels.
    #[must_use]
    pub fn round_count(&self) -> usize {
        self.measurement_labels()
            .iter()
            .map(|l| l.round + 1)
            .max()
            .unwrap_or(0)
    }

    /// Human-readable listing, one item per line.
    #[must_use]
    pub fn render(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            match item {
                CircuitItem::Prep { qubit, basis } => {
                    let b = match basis {
                        PrepBasis::Z0 => "|0>",
                        PrepBasis::XPlus => "|+>",
                    };
                    out.push_str(&format!("prep q{qubit} {b}\n"));
                }
                CircuitItem::Gate { gate, noisy } => {
                    let tag = if *noisy { "  [noisy]" } else { "" };
                    out.push_str(&format!("{gate}{tag}\n"));
                }
                CircuitItem::Measure { qubit, label } => {
                    out.push_str(&format!("measure q{qubit} -> {label}\n"));
                }
            }
        }
        out
    }
}
