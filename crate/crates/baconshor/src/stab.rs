//! Stabilizer-tableau engine: Monte-Carlo trajectory sampling with an
//! optional self-checking mode.
//!
//! The tableau follows the standard destabilizer/stabilizer layout (rows
//! `0..n` are destabilizers, `n..2n` stabilizers, one scratch row for
//! deterministic measurements), with each row's X and Z parts packed into
//! `u64` masks. Noise is sampled per trajectory: after every noisy gate each
//! support qubit suffers X, Y, or Z with probability `p/3` each.
//!
//! The checked mode runs every trajectory twice over, in lockstep: a
//! noiseless reference tableau plus a sign-free Pauli frame carrying the
//! sampled errors, and the actual noisy tableau whose measurement outcomes
//! are *forced* to the frame's prediction (reference outcome XOR the frame's
//! X component on the measured qubit). Any disagreement — a forced outcome
//! contradicting a tableau-deterministic one, or the two runs disagreeing on
//! whether an outcome is random — is a hard error. This cross-validates the
//! tableau update rules against independent Pauli-propagation algebra on
//! every single shot.

use rand::Rng;
use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{CircuitItem, Gate, PhysicalCircuit, PrepBasis};
use crate::code::{self, N_DATA};
use crate::pauli::Letter;

/// Errors surfaced by the self-checking trajectory mode.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabError {
    #[error("forced outcome contradicts the deterministic tableau outcome on qubit {qubit}")]
    ForcedContradiction { qubit: usize },
    #[error(
        "randomness class mismatch on qubit {qubit}: reference random = {reference_random}, \
         noisy random = {noisy_random}"
    )]
    RandomnessMismatch { qubit: usize, reference_random: bool, noisy_random: bool },
}

enum RawMeasure {
    /// Outcome is random; the caller picks the bit and stores it in `row`'s
    /// phase.
    Random { row: usize },
    Deterministic(bool),
}

/// Pure stabilizer state of up to 64 qubits.
#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

fn bit(mask: u64, q: usize) -> bool {
    mask >> q & 1 != 0
}

impl Tableau {
    /// All qubits in |0>.
    #[must_use]
    pub fn new(n: usize) -> Self {
        assert!(n <= 64);
        let rows = 2 * n + 1;
        let mut t = Self { n, x: vec![0; rows], z: vec![0; rows], r: vec![false; rows] };
        for i in 0..n {
            t.x[i] = 1 << i; // destabilizer X_i
            t.z[n + i] = 1 << i; // stabilizer Z_i
        }
        t
    }

    pub fn apply_h(&mut self, a: usize) {
        let m = 1u64 << a;
        for row in 0..2 * self.n {
            let xa = self.x[row] & m;
            let za = self.z[row] & m;
            self.r[row] ^= xa != 0 && za != 0;
            self.x[row] = (self.x[row] & !m) | za;
            self.z[row] = (self.z[row] & !m) | xa;
        }
    }

    pub fn apply_x(&mut self, a: usize) {
        let m = 1u64 << a;
        for row in 0..2 * self.n {
            self.r[row] ^= self.z[row] & m != 0;
        }
    }

    pub fn apply_z(&mut self, a: usize) {
        let m = 1u64 << a;
        for row in 0..2 * self.n {
            self.r[row] ^= self.x[row] & m != 0;
        }
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        let mc = 1u64 << c;
        let mt = 1u64 << t;
        for row in 0..2 * self.n {
            let xc = self.x[row] & mc != 0;
            let xt = self.x[row] & mt != 0;
            let zc = self.z[row] & mc != 0;
            let zt = self.z[row] & mt != 0;
            self.r[row] ^= xc && zt && !(xt ^ zc);
            if xc {
                self.x[row] ^= mt;
            }
            if zt {
                self.z[row] ^= mc;
            }
        }
    }

    pub fn apply_relabel(&mut self, perm: &[usize]) {
        assert_eq!(perm.len(), self.n, "relabel width mismatch");
        for row in 0..2 * self.n {
            let (mut nx, mut nz) = (0u64, 0u64);
            for (src, &dst) in perm.iter().enumerate() {
                if bit(self.x[row], src) {
                    nx |= 1 << dst;
                }
                if bit(self.z[row], src) {
                    nz |= 1 << dst;
                }
            }
            self.x[row] = nx;
            self.z[row] = nz;
        }
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

    /// Applies a Pauli letter as an error (global phase irrelevant).
    pub fn apply_letter(&mut self, q: usize, letter: Letter) {
        match letter {
            Letter::I => {}
            Letter::X => self.apply_x(q),
            Letter::Z => self.apply_z(q),
            Letter::Y => {
                self.apply_x(q);
                self.apply_z(q);
            }
        }
    }

    /// Phase contribution of multiplying row letters: exponent of i picked up
    /// when (x1, z1) absorbs (x2, z2), as in the usual tableau row sum.
    fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => i32::from(z2) - i32::from(x2),
            (true, false) => i32::from(z2) * (2 * i32::from(x2) - 1),
            (false, true) => i32::from(x2) * (1 - 2 * i32::from(z2)),
        }
    }

    /// Row h <- row h * row i, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut phase = 2 * i32::from(self.r[h]) + 2 * i32::from(self.r[i]);
        for q in 0..self.n {
            phase += Self::g(
                bit(self.x[i], q),
                bit(self.z[i], q),
                bit(self.x[h], q),
                bit(self.z[h], q),
            );
        }
        let phase = phase.rem_euclid(4);
        debug_assert_eq!(phase % 2, 0, "row product left the +/-1 phase group");
        self.r[h] = phase == 2;
        self.x[h] ^= self.x[i];
        self.z[h] ^= self.z[i];
    }

    fn measure_raw(&mut self, a: usize) -> RawMeasure {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| bit(self.x[i], a)) {
            for i in 0..2 * n {
                if i != p && bit(self.x[i], a) {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p];
            self.z[p - n] = self.z[p];
            self.r[p - n] = self.r[p];
            self.x[p] = 0;
            self.z[p] = 1 << a;
            self.r[p] = false;
            RawMeasure::Random { row: p }
        } else {
            let s = 2 * n;
            self.x[s] = 0;
            self.z[s] = 0;
            self.r[s] = false;
            for i in 0..n {
                if bit(self.x[i], a) {
                    self.rowsum(s, i + n);
                }
            }
            RawMeasure::Deterministic(self.r[s])
        }
    }

    /// Z measurement of `a`; returns (outcome, was_random).
    pub fn measure(&mut self, a: usize, rng: &mut (impl Rng + ?Sized)) -> (bool, bool) {
        match self.measure_raw(a) {
            RawMeasure::Random { row } => {
                let outcome = rng.gen::<bool>();
                self.r[row] = outcome;
                (outcome, true)
            }
            RawMeasure::Deterministic(outcome) => (outcome, false),
        }
    }

    /// Z measurement with a prescribed outcome; returns whether the outcome
    /// was random, or an error if the tableau dictates the opposite bit.
    pub fn measure_forced(&mut self, a: usize, outcome: bool) -> Result<bool, StabError> {
        match self.measure_raw(a) {
            RawMeasure::Random { row } => {
                self.r[row] = outcome;
                Ok(true)
            }
            RawMeasure::Deterministic(b) if b == outcome => Ok(false),
            RawMeasure::Deterministic(_) => Err(StabError::ForcedContradiction { qubit: a }),
        }
    }

    /// Measurement-based reset; returns the pre-reset outcome and randomness
    /// class (the post-reset state never depends on the sampled branch's
    /// correction, but the branch itself must be sampled faithfully).
    pub fn prep(&mut self, a: usize, basis: PrepBasis, rng: &mut (impl Rng + ?Sized)) -> (bool, bool) {
        let (outcome, was_random) = self.measure(a, rng);
        if outcome {
            self.apply_x(a);
        }
        if basis == PrepBasis::XPlus {
            self.apply_h(a);
        }
        (outcome, was_random)
    }

    /// Reset with the branch dictated by the caller (checked mode).
    pub fn prep_forced(
        &mut self,
        a: usize,
        basis: PrepBasis,
        outcome: bool,
    ) -> Result<bool, StabError> {
        let was_random = self.measure_forced(a, outcome)?;
        if outcome {
            self.apply_x(a);
        }
        if basis == PrepBasis::XPlus {
            self.apply_h(a);
        }
        Ok(was_random)
    }

    #[cfg(test)]
    fn row(&self, i: usize) -> (u64, u64, bool) {
        (self.x[i], self.z[i], self.r[i])
    }

    #[cfg(test)]
    fn set_row(&mut self, i: usize, x: u64, z: u64, r: bool) {
        self.x[i] = x;
        self.z[i] = z;
        self.r[i] = r;
    }
}

/// Samples the per-site depolarizing fault: `None` with probability `1 - p`,
/// otherwise X, Y, or Z uniformly.
fn sample_fault(p: f64, rng: &mut impl Rng) -> Option<Letter> {
    if !rng.gen_bool(p) {
        return None;
    }
    Some(match rng.gen_range(0..3u8) {
        0 => Letter::X,
        1 => Letter::Y,
        _ => Letter::Z,
    })
}

/// Runs one noisy trajectory; `Some(bit)` is the decoded logical outcome of
/// an accepted shot, `None` a rejection (at any round or at final readout).
pub fn run_trajectory(
    circuit: &PhysicalCircuit,
    p: f64,
    final_parity_check: bool,
    rng: &mut impl Rng,
) -> Option<bool> {
    let mut tab = Tableau::new(circuit.n_qubits);
    let mut round_bits: Vec<bool> = Vec::with_capacity(4);
    for item in &circuit.items {
        match item {
            CircuitItem::Prep { qubit, basis } => {
                tab.prep(*qubit, *basis, rng);
            }
            CircuitItem::Gate { gate, noisy } => {
                tab.apply_gate(gate);
                if *noisy {
                    for q in gate.noise_support() {
                        if let Some(letter) = sample_fault(p, rng) {
                            tab.apply_letter(q, letter);
                        }
                    }
                }
            }
            CircuitItem::Measure { qubit, label } => {
                let (outcome, _) = tab.measure(*qubit, rng);
                round_bits.push(outcome);
                if label.slot == 3 {
                    let n = round_bits.len();
                    let bits = [round_bits[n - 4], round_bits[n - 3], round_bits[n - 2], round_bits[n - 1]];
                    if !code::round_accepted(bits) {
                        return None;
                    }
                    round_bits.clear();
                }
            }
        }
    }
    let mut readout = [false; N_DATA];
    for (q, slot) in readout.iter_mut().enumerate() {
        *slot = tab.measure(q, rng).0;
    }
    code::decode_z_readout(readout, final_parity_check)
}

/// Sign-free Pauli frame: the letters of the accumulated error, conjugated
/// through the circuit alongside the reference state.
#[derive(Debug, Clone)]
struct Frame {
    letters: Vec<Letter>,
}

impl Frame {
    fn identity(n: usize) -> Self {
        Self { letters: vec![Letter::I; n] }
    }

    fn absorb(&mut self, q: usize, letter: Letter) {
        self.letters[q] = self.letters[q].product_letter(letter);
    }

    fn conjugate(&mut self, gate: &Gate) {
        match gate {
            Gate::H(q) => {
                let l = self.letters[*q];
                self.letters[*q] = Letter::from_bits(l.z_bit(), l.x_bit());
            }
            // X and Z only flip signs, which the frame does not carry.
            Gate::X(_) | Gate::Z(_) => {}
            Gate::Cnot { control, target } => {
                let (xc, zc) = (self.letters[*control].x_bit(), self.letters[*control].z_bit());
                let (xt, zt) = (self.letters[*target].x_bit(), self.letters[*target].z_bit());
                self.letters[*target] = Letter::from_bits(xt ^ xc, zt);
                self.letters[*control] = Letter::from_bits(xc, zc ^ zt);
            }
            Gate::Relabel(perm) => {
                let mut out = vec![Letter::I; self.letters.len()];
                for (src, &dst) in perm.iter().enumerate() {
                    out[dst] = self.letters[src];
                }
                self.letters = out;
            }
        }
    }

    fn flips_z_readout(&self, q: usize) -> bool {
        self.letters[q].x_bit()
    }
}

/// Self-checking variant of [`run_trajectory`]: identical output distribution,
/// but every measurement is cross-validated against Pauli-frame propagation
/// over a noiseless reference run.
pub fn run_trajectory_checked(
    circuit: &PhysicalCircuit,
    p: f64,
    final_parity_check: bool,
    rng: &mut impl Rng,
) -> Result<Option<bool>, StabError> {
    let mut noisy = Tableau::new(circuit.n_qubits);
    let mut reference = Tableau::new(circuit.n_qubits);
    let mut frame = Frame::identity(circuit.n_qubits);

    let forced_measure = |noisy: &mut Tableau,
                              reference: &mut Tableau,
                              frame: &Frame,
                              q: usize,
                              rng: &mut dyn RngCore|
     -> Result<bool, StabError> {
        let (ref_bit, ref_random) = reference.measure(q, rng);
        let predicted = ref_bit ^ frame.flips_z_readout(q);
        let noisy_random = noisy.measure_forced(q, predicted)?;
        if noisy_random != ref_random {
            return Err(StabError::RandomnessMismatch {
                qubit: q,
                reference_random: ref_random,
                noisy_random,
            });
        }
        Ok(predicted)
    };

    let mut round_bits: Vec<bool> = Vec::with_capacity(4);
    let mut rejected = false;
    for item in &circuit.items {
        match item {
            CircuitItem::Prep { qubit, basis } => {
                let (ref_bit, ref_random) = reference.prep(*qubit, *basis, rng);
                let predicted = ref_bit ^ frame.flips_z_readout(*qubit);
                let noisy_random = noisy.prep_forced(*qubit, *basis, predicted)?;
                if noisy_random != ref_random {
                    return Err(StabError::RandomnessMismatch {
                        qubit: *qubit,
                        reference_random: ref_random,
                        noisy_random,
                    });
                }
                frame.letters[*qubit] = Letter::I;
            }
            CircuitItem::Gate { gate, noisy: is_noisy } => {
                noisy.apply_gate(gate);
                reference.apply_gate(gate);
                frame.conjugate(gate);
                if *is_noisy {
                    for q in gate.noise_support() {
                        if let Some(letter) = sample_fault(p, rng) {
                            noisy.apply_letter(q, letter);
                            frame.absorb(q, letter);
                        }
                    }
                }
            }
            CircuitItem::Measure { qubit, label } => {
                let outcome = forced_measure(&mut noisy, &mut reference, &frame, *qubit, rng)?;
                round_bits.push(outcome);
                if label.slot == 3 {
                    let n = round_bits.len();
                    let bits = [round_bits[n - 4], round_bits[n - 3], round_bits[n - 2], round_bits[n - 1]];
                    if !code::round_accepted(bits) {
                        rejected = true;
                        // Keep running: the lockstep check should hold on the
                        // whole circuit regardless of acceptance.
                    }
                    round_bits.clear();
                }
            }
        }
    }
    let mut readout = [false; N_DATA];
    for (q, slot) in readout.iter_mut().enumerate() {
        *slot = forced_measure(&mut noisy, &mut reference, &frame, q, rng)?;
    }
    if rejected {
        return Ok(None);
    }
    Ok(code::decode_z_readout(readout, final_parity_check))
}

/// Tallies from a batch of Monte-Carlo trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabEstimate {
    pub n_trajectories: u64,
    pub n_accepted: u64,
    /// Accepted-shot counts of decoded logical bit 0 / 1.
    pub n_outcome: [u64; 2],
}

impl StabEstimate {
    /// Estimated post-selection survival probability.
    #[must_use]
    pub fn p_ps(&self) -> f64 {
        self.n_accepted as f64 / self.n_trajectories as f64
    }

    /// Estimated conditional probability of decoding the wrong bit.
    /// NaN when nothing was accepted.
    #[must_use]
    pub fn logical_error(&self, expected_bit: bool) -> f64 {
        self.n_outcome[usize::from(!expected_bit)] as f64 / self.n_accepted as f64
    }
}

/// Trajectory streams: the base generator is cloned and re-streamed per
/// trajectory index, so estimates are reproducible and order-independent.
fn stream(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(index);
    rng
}

/// Monte-Carlo estimate over `n_trajectories` shots.
#[must_use]
pub fn estimate(
    circuit: &PhysicalCircuit,
    p: f64,
    final_parity_check: bool,
    base: &ChaCha8Rng,
    n_trajectories: u64,
) -> StabEstimate {
    let mut est = StabEstimate { n_trajectories, n_accepted: 0, n_outcome: [0, 0] };
    for t in 0..n_trajectories {
        let mut rng = stream(base, t);
        if let Some(bit) = run_trajectory(circuit, p, final_parity_check, &mut rng) {
            est.n_accepted += 1;
            est.n_outcome[usize::from(bit)] += 1;
        }
    }
    est
}

/// Monte-Carlo estimate with the per-shot lockstep self-check enabled.
pub fn estimate_checked(
    circuit: &PhysicalCircuit,
    p: f64,
    final_parity_check: bool,
    base: &ChaCha8Rng,
    n_trajectories: u64,
) -> Result<StabEstimate, StabError> {
    let mut est = StabEstimate { n_trajectories, n_accepted: 0, n_outcome: [0, 0] };
    for t in 0..n_trajectories {
        let mut rng = stream(base, t);
        if let Some(bit) = run_trajectory_checked(circuit, p, final_parity_check, &mut rng)? {
            est.n_accepted += 1;
            est.n_outcome[usize::from(bit)] += 1;
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::from_seed([7; 32])
    }

    #[test]
    fn fresh_tableau_measures_zero_deterministically() {
        let mut t = Tableau::new(3);
        let mut r = rng();
        for q in 0..3 {
            assert_eq!(t.measure(q, &mut r), (false, false));
        }
    }

    #[test]
    fn x_flips_the_deterministic_outcome() {
        let mut t = Tableau::new(2);
        t.apply_x(1);
        assert_eq!(t.measure(1, &mut rng()), (true, false));
        assert!(matches!(
            t.measure_forced(1, false),
            Err(StabError::ForcedContradiction { qubit: 1 })
        ));
    }

    #[test]
    fn plus_state_measures_randomly_and_collapses() {
        let mut t = Tableau::new(1);
        t.apply_h(0);
        let mut r = rng();
        let (bit, random) = t.measure(0, &mut r);
        assert!(random);
        // Repeated measurement is now deterministic and agrees.
        assert_eq!(t.measure(0, &mut r), (bit, false));
    }

    #[test]
    fn bell_pair_outcomes_are_correlated() {
        for seed in 0..20u8 {
            let mut r = ChaCha8Rng::from_seed([seed; 32]);
            let mut t = Tableau::new(2);
            t.apply_h(0);
            t.apply_cnot(0, 1);
            let (b0, random0) = t.measure(0, &mut r);
            let (b1, random1) = t.measure(1, &mut r);
            assert!(random0);
            assert!(!random1);
            assert_eq!(b0, b1);
        }
    }

    #[test]
    fn cnot_sign_rule_on_raw_rows() {
        // X (x) Z -> -Y (x) Y, and Y (x) Y -> -X (x) Z.
        let mut t = Tableau::new(2);
        t.set_row(0, 0b01, 0b10, false); // X0 Z1
        t.apply_cnot(0, 1);
        assert_eq!(t.row(0), (0b11, 0b11, true)); // -Y0 Y1
        let mut t = Tableau::new(2);
        t.set_row(0, 0b11, 0b11, false); // Y0 Y1
        t.apply_cnot(0, 1);
        assert_eq!(t.row(0), (0b01, 0b10, true)); // -X0 Z1
    }

    #[test]
    fn hadamard_sign_rule_on_raw_rows() {
        let mut t = Tableau::new(1);
        t.set_row(0, 1, 1, false); // Y
        t.apply_h(0);
        assert_eq!(t.row(0), (1, 1, true)); // -Y
    }

    #[test]
    fn relabel_moves_columns() {
        let mut t = Tableau::new(3);
        t.apply_x(0);
        t.apply_relabel(&[2, 0, 1]);
        assert_eq!(t.measure(2, &mut rng()), (true, false));
        assert_eq!(t.measure(0, &mut rng()), (false, false));
    }

    #[test]
    fn prep_resets_any_state() {
        let mut r = rng();
        let mut t = Tableau::new(2);
        t.apply_h(0);
        t.apply_cnot(0, 1);
        t.prep(0, PrepBasis::Z0, &mut r);
        assert_eq!(t.measure(0, &mut r), (false, false));
        t.prep(1, PrepBasis::XPlus, &mut r);
        t.apply_h(1);
        assert_eq!(t.measure(1, &mut r), (false, false));
    }

    #[test]
    fn noiseless_trajectories_decode_deterministically() {
        use crate::code::{assemble_encoded_circuit, true_output, LogicalGate, Schedule};
        for seq in [
            vec![],
            vec![LogicalGate::X],
            vec![LogicalGate::H],
            vec![LogicalGate::X, LogicalGate::H, LogicalGate::Z],
        ] {
            let (basis, expected) = true_output(&seq);
            let circuit = assemble_encoded_circuit(&seq, Schedule::every(1), basis).unwrap();
            for t in 0..32 {
                let mut r = stream(&rng(), t);
                assert_eq!(run_trajectory(&circuit, 0.0, true, &mut r), Some(expected));
            }
        }
    }

    #[test]
    fn checked_mode_agrees_with_plain_mode_at_zero_noise() {
        use crate::code::{assemble_encoded_circuit, LogicalGate, Schedule};
        let circuit =
            assemble_encoded_circuit(&[LogicalGate::X], Schedule::every(1), crate::code::ReadoutBasis::Z)
                .unwrap();
        for t in 0..64 {
            let plain = run_trajectory(&circuit, 0.0, true, &mut stream(&rng(), t));
            let checked =
                run_trajectory_checked(&circuit, 0.0, true, &mut stream(&rng(), t)).unwrap();
            assert_eq!(plain, checked);
        }
    }

    #[test]
    fn estimate_counts_are_consistent() {
        use crate::code::{assemble_encoded_circuit, LogicalGate, Schedule};
        let circuit = assemble_encoded_circuit(
            &[LogicalGate::X, LogicalGate::Z],
            Schedule::every(2),
            crate::code::ReadoutBasis::Z,
        )
        .unwrap();
        let est = estimate(&circuit, 0.02, true, &rng(), 2000);
        assert_eq!(est.n_trajectories, 2000);
        assert_eq!(est.n_accepted, est.n_outcome[0] + est.n_outcome[1]);
        assert!(est.p_ps() > 0.5 && est.p_ps() <= 1.0);
        // Same seed, same answer.
        assert_eq!(est, estimate(&circuit, 0.02, true, &rng(), 2000));
    }
}
