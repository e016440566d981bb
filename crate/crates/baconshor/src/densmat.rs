//! Exact density-matrix engine over the five-qubit register.
//!
//! States are dense 32x32 complex matrices (row-major, basis index bit `q` =
//! qubit `q`). Gates are applied as in-place permutations/sign maps where
//! possible, and the depolarizing channel uses its closed form: coherences
//! across the affected qubit scale by `1 - 4p/3` while the two diagonal
//! blocks mix pairwise with weight `2p/3`.
//!
//! Mid-circuit measurements split the state into unnormalized projection
//! branches, so a whole run is deterministic — there is no sampling anywhere
//! in this engine. With [`MergeMode::PerRound`] the (at most sixteen) branches
//! of a parity-check round are filtered by the acceptance rule and summed as
//! soon as the round's last measurement lands, keeping the branch count
//! constant across rounds; [`MergeMode::Exhaustive`] keeps every branch apart
//! until the end and exists to validate the merged bookkeeping on small
//! circuits.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{CircuitItem, Gate, PhysicalCircuit, PrepBasis};
use crate::code::{
    self, CodeError, LogicalGate, ReadoutBasis, Schedule, N_DATA, N_QUBITS,
};

/// Hilbert-space dimension of the five-qubit register.
pub const DIM: usize = 1 << N_QUBITS;

/// Branches whose trace falls below this are dropped as numerically empty.
const TRACE_FLOOR: f64 = 1e-18;
/// A final survival probability below this is reported as full rejection.
const SURVIVAL_FLOOR: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Errors from an exact run.
#[derive(Debug, Error)]
pub enum DensmatError {
    #[error("post-selection rejected essentially all probability mass")]
    FullyRejected,
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// How measurement branches are consolidated during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeMode {
    /// Filter and sum branches at the end of every parity-check round.
    PerRound,
    /// Keep all branches separate until readout (exponential in rounds;
    /// only sensible for one- or two-round circuits).
    Exhaustive,
}

/// Options for an exact run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub merge: MergeMode,
    /// Reject final readouts with odd total parity (outside the code space).
    pub final_parity_check: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { merge: MergeMode::PerRound, final_parity_check: true }
    }
}

/// Exact result of one encoded run.
#[derive(Debug, Clone, Copy)]
pub struct ExactOutcome {
    /// Probability that every parity-check round and the final readout check
    /// accept.
    pub p_ps: f64,
    /// Distribution of the decoded logical bit, conditional on acceptance.
    pub conditional: [f64; 2],
}

impl ExactOutcome {
    /// Probability, conditional on acceptance, of decoding the wrong bit.
    #[must_use]
    pub fn logical_error(&self, expected_bit: bool) -> f64 {
        1.0 - self.conditional[usize::from(expected_bit)]
    }
}

/// Dense 32x32 density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// |00000><00000|.
    #[must_use]
    pub fn zero_state() -> Self {
        let mut data = vec![ZERO; DIM * DIM];
        data[0] = Complex64::new(1.0, 0.0);
        Self { data }
    }

    /// Pure state that is the equal (positive-amplitude) superposition of the
    /// given basis kets.
    #[must_use]
    pub fn from_equal_superposition(kets: &[usize]) -> Self {
        assert!(!kets.is_empty());
        let amp = 1.0 / kets.len() as f64;
        let mut data = vec![ZERO; DIM * DIM];
        for &a in kets {
            for &b in kets {
                data[a * DIM + b] = Complex64::new(amp, 0.0);
            }
        }
        Self { data }
    }

    #[must_use]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * DIM + j]
    }

    #[must_use]
    pub fn trace(&self) -> f64 {
        (0..DIM).map(|i| self.data[i * DIM + i].re).sum()
    }

    /// X on `qubit`: conjugate by the bit-flip permutation.
    pub fn apply_x(&mut self, qubit: usize) {
        let m = 1 << qubit;
        for i in 0..DIM {
            if i & m != 0 {
                continue;
            }
            for j in 0..DIM {
                self.data.swap(i * DIM + j, (i ^ m) * DIM + (j ^ m));
            }
        }
    }

    /// Z on `qubit`: negate coherences across the qubit.
    pub fn apply_z(&mut self, qubit: usize) {
        let m = 1 << qubit;
        for i in 0..DIM {
            for j in 0..DIM {
                if (i & m != 0) != (j & m != 0) {
                    self.data[i * DIM + j] = -self.data[i * DIM + j];
                }
            }
        }
    }

    /// CNOT: conjugate by the controlled bit-flip permutation.
    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let mc = 1 << control;
        let mt = 1 << target;
        let sigma = |i: usize| if i & mc != 0 { i ^ mt } else { i };
        for i in 0..DIM {
            let si = sigma(i);
            for j in 0..DIM {
                let sj = sigma(j);
                if (si, sj) > (i, j) {
                    self.data.swap(i * DIM + j, si * DIM + sj);
                }
            }
        }
    }

    /// Generic single-qubit unitary (used for H).
    pub fn apply_single_qubit_unitary(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) {
        let m = 1 << qubit;
        // Left action: rho <- (U x I) rho.
        for i in 0..DIM {
            if i & m != 0 {
                continue;
            }
            let i1 = i | m;
            for j in 0..DIM {
                let a = self.data[i * DIM + j];
                let b = self.data[i1 * DIM + j];
                self.data[i * DIM + j] = u[0][0] * a + u[0][1] * b;
                self.data[i1 * DIM + j] = u[1][0] * a + u[1][1] * b;
            }
        }
        // Right action: rho <- rho (U x I)^dagger.
        for j in 0..DIM {
            if j & m != 0 {
                continue;
            }
            let j1 = j | m;
            for i in 0..DIM {
                let a = self.data[i * DIM + j];
                let b = self.data[i * DIM + j1];
                self.data[i * DIM + j] = a * u[0][0].conj() + b * u[0][1].conj();
                self.data[i * DIM + j1] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    pub fn apply_h(&mut self, qubit: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single_qubit_unitary(qubit, [[s, s], [s, -s]]);
    }

    /// Wire relabeling: basis bit `src` moves to bit `perm[src]`.
    pub fn apply_relabel(&mut self, perm: &[usize]) {
        assert_eq!(perm.len(), N_QUBITS, "relabel width mismatch");
        let mut map = [0usize; DIM];
        for (i, slot) in map.iter_mut().enumerate() {
            let mut out = 0;
            for (src, &dst) in perm.iter().enumerate() {
                if i & (1 << src) != 0 {
                    out |= 1 << dst;
                }
            }
            *slot = out;
        }
        let mut out = vec![ZERO; DIM * DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                out[map[i] * DIM + map[j]] = self.data[i * DIM + j];
            }
        }
        self.data = out;
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        match gate {
            Gate::H(q) => self.apply_h(*q),
            Gate::X(q) => self.apply_x(*q),
            Gate::Z(q) => self.apply_z(*q),
            Gate::Cnot { control, target } => self.apply_cnot(*control, *target),
            Gate::Relabel(perm) => self.apply_relabel(perm),
        }
    }

    /// Single-qubit depolarizing channel with parameter `p`:
    /// `rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)`.
    pub fn depolarize(&mut self, qubit: usize, p: f64) {
        let m = 1 << qubit;
        let mix = 2.0 * p / 3.0;
        let damp = 1.0 - 4.0 * p / 3.0;
        for i in 0..DIM {
            for j in 0..DIM {
                let bi = i & m != 0;
                let bj = j & m != 0;
                if bi != bj {
                    self.data[i * DIM + j] *= damp;
                } else if !bi {
                    let lo = i * DIM + j;
                    let hi = (i | m) * DIM + (j | m);
                    let a = self.data[lo];
                    let b = self.data[hi];
                    self.data[lo] = (1.0 - mix) * a + mix * b;
                    self.data[hi] = mix * a + (1.0 - mix) * b;
                }
            }
        }
    }

    /// Trace out `qubit` and replace it with |0>.
    pub fn reset_to_zero(&mut self, qubit: usize) {
        let m = 1 << qubit;
        for i in 0..DIM {
            for j in 0..DIM {
                let bi = i & m != 0;
                let bj = j & m != 0;
                let k = i * DIM + j;
                if !bi && !bj {
                    // The source entry lives in a later row, still untouched.
                    let src = self.data[(i | m) * DIM + (j | m)];
                    self.data[k] += src;
                } else {
                    self.data[k] = ZERO;
                }
            }
        }
    }

    /// Noiseless preparation: reset to |0>, then H for a |+> prep.
    pub fn prep(&mut self, qubit: usize, basis: PrepBasis) {
        self.reset_to_zero(qubit);
        if basis == PrepBasis::XPlus {
            self.apply_h(qubit);
        }
    }

    /// Project onto `qubit` reading `bit` (unnormalized).
    pub fn project_in_place(&mut self, qubit: usize, bit: bool) {
        let m = 1 << qubit;
        for i in 0..DIM {
            for j in 0..DIM {
                if ((i & m != 0) != bit) || ((j & m != 0) != bit) {
                    self.data[i * DIM + j] = ZERO;
                }
            }
        }
    }

    /// Largest deviation from Hermiticity, for numerical sanity checks.
    #[must_use]
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..DIM {
            for j in 0..DIM {
                let d = (self.data[i * DIM + j] - self.data[j * DIM + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

struct Branch {
    rho: DensityMatrix,
    outcomes: Vec<bool>,
}

fn apply_item(branches: &mut Vec<Branch>, item: &CircuitItem, p: f64) {
    match item {
        CircuitItem::Prep { qubit, basis } => {
            for b in branches.iter_mut() {
                b.rho.prep(*qubit, *basis);
            }
        }
        CircuitItem::Gate { gate, noisy } => {
            for b in branches.iter_mut() {
                b.rho.apply_gate(gate);
                if *noisy {
                    for q in gate.noise_support() {
                        b.rho.depolarize(q, p);
                    }
                }
            }
        }
        CircuitItem::Measure { qubit, .. } => {
            let mut next = Vec::with_capacity(branches.len() * 2);
            for b in branches.drain(..) {
                let Branch { rho, outcomes } = b;
                let mut one = rho.clone();
                one.project_in_place(*qubit, true);
                let mut zero = rho;
                zero.project_in_place(*qubit, false);
                for (bit, projected) in [(false, zero), (true, one)] {
                    if projected.trace() < TRACE_FLOOR {
                        continue;
                    }
                    let mut record = outcomes.clone();
                    record.push(bit);
                    next.push(Branch { rho: projected, outcomes: record });
                }
            }
            *branches = next;
        }
    }
}

/// Sums the branches of a finished round that pass the acceptance rule.
fn merge_round(branches: Vec<Branch>) -> Result<Branch, DensmatError> {
    let mut merged: Option<DensityMatrix> = None;
    for b in branches {
        let n = b.outcomes.len();
        assert!(n >= 4, "round merge before four outcomes recorded");
        let bits = [b.outcomes[n - 4], b.outcomes[n - 3], b.outcomes[n - 2], b.outcomes[n - 1]];
        if !code::round_accepted(bits) {
            continue;
        }
        match merged.as_mut() {
            None => merged = Some(b.rho),
            Some(acc) => {
                for (dst, src) in acc.data.iter_mut().zip(&b.rho.data) {
                    *dst += src;
                }
            }
        }
    }
    match merged {
        Some(rho) => Ok(Branch { rho, outcomes: Vec::new() }),
        None => Err(DensmatError::FullyRejected),
    }
}

/// Runs items from an arbitrary initial state and returns every surviving
/// projection branch with its outcome record, with no acceptance filtering
/// (exhaustive mode). The traces of the returned branches sum to the initial
/// trace, which is what makes this useful for validating the merged runner.
#[must_use]
pub fn run_branch_details(
    initial: DensityMatrix,
    items: &[CircuitItem],
    p: f64,
) -> Vec<(Vec<bool>, DensityMatrix)> {
    let mut branches = vec![Branch { rho: initial, outcomes: Vec::new() }];
    for item in items {
        apply_item(&mut branches, item, p);
    }
    branches.into_iter().map(|b| (b.outcomes, b.rho)).collect()
}

/// Runs items from an arbitrary initial state and post-selects: acceptance
/// within every parity-check round, then the final-readout parity check, then
/// decodes the logical bit from the data qubits' Z readout (marginalizing the
/// ancilla, whatever state it was parked in).
pub fn run_items_from(
    initial: DensityMatrix,
    items: &[CircuitItem],
    p: f64,
    options: RunOptions,
) -> Result<ExactOutcome, DensmatError> {
    let mut branches = vec![Branch { rho: initial, outcomes: Vec::new() }];
    for item in items {
        apply_item(&mut branches, item, p);
        if options.merge == MergeMode::PerRound {
            if let CircuitItem::Measure { label, .. } = item {
                if label.slot == 3 {
                    branches = vec![merge_round(std::mem::take(&mut branches))?];
                }
            }
        }
    }

    let mut dist = [0.0f64; 2];
    for b in &branches {
        if !code::all_rounds_accepted(&b.outcomes) {
            continue;
        }
        for i in 0..DIM {
            let mass = b.rho.entry(i, i).re;
            let bits: Vec<bool> = (0..N_DATA).map(|q| i & (1 << q) != 0).collect();
            if let Some(bit) = code::decode_z_readout(
                [bits[0], bits[1], bits[2], bits[3]],
                options.final_parity_check,
            ) {
                dist[usize::from(bit)] += mass;
            }
        }
    }
    let p_ps = dist[0] + dist[1];
    if p_ps < SURVIVAL_FLOOR {
        return Err(DensmatError::FullyRejected);
    }
    Ok(ExactOutcome { p_ps, conditional: [dist[0] / p_ps, dist[1] / p_ps] })
}

/// Runs a complete circuit from the all-zeros state.
pub fn run_items(
    circuit: &PhysicalCircuit,
    p: f64,
    options: RunOptions,
) -> Result<ExactOutcome, DensmatError> {
    run_items_from(DensityMatrix::zero_state(), &circuit.items, p, options)
}

/// Assembles and exactly evaluates the encoded circuit for a logical gate
/// sequence.
pub fn run_encoded(
    seq: &[LogicalGate],
    schedule: Schedule,
    readout_basis: ReadoutBasis,
    p: f64,
    options: RunOptions,
) -> Result<ExactOutcome, DensmatError> {
    let circuit = code::assemble_encoded_circuit(seq, schedule, readout_basis)?;
    run_items(&circuit, p, options)
}

/// Exact unencoded reference: the same logical gate sequence applied to a
/// single physical qubit, one depolarizing site per gate (plus one for the
/// basis-change H when the sequence ends on the X axis). Returns the
/// probability of reading the wrong bit.
#[must_use]
pub fn run_bare(seq: &[LogicalGate], p: f64) -> f64 {
    let mix = 2.0 * p / 3.0;
    let damp = 1.0 - 4.0 * p / 3.0;
    // Real 2x2 density matrix [[d0, c], [c', d1]]; everything reachable here
    // stays real.
    let mut rho = [[1.0f64, 0.0], [0.0, 0.0]];
    let depolarize = |r: &mut [[f64; 2]; 2]| {
        let (d0, d1) = (r[0][0], r[1][1]);
        r[0][0] = (1.0 - mix) * d0 + mix * d1;
        r[1][1] = mix * d0 + (1.0 - mix) * d1;
        r[0][1] *= damp;
        r[1][0] *= damp;
    };
    let hadamard = |r: &mut [[f64; 2]; 2]| {
        let [[a, b], [c, d]] = *r;
        *r = [
            [(a + b + c + d) / 2.0, (a - b + c - d) / 2.0],
            [(a + b - c - d) / 2.0, (a - b - c + d) / 2.0],
        ];
    };
    for g in seq {
        match g {
            LogicalGate::X => {
                let [[a, b], [c, d]] = rho;
                rho = [[d, c], [b, a]];
            }
            LogicalGate::Z => {
                rho[0][1] = -rho[0][1];
                rho[1][0] = -rho[1][0];
            }
            LogicalGate::H => hadamard(&mut rho),
        }
        depolarize(&mut rho);
    }
    let (basis, expected) = code::true_output(seq);
    if basis == ReadoutBasis::X {
        hadamard(&mut rho);
        depolarize(&mut rho);
    }
    1.0 - rho[usize::from(expected)][usize::from(expected)]
}
