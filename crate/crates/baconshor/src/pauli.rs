//! Signed Pauli-string arithmetic and Clifford conjugation.
//!
//! Operators are fixed-length words over {I, X, Y, Z} carrying a ±1 phase.
//! Every product this crate needs is Hermitian, so phases are restricted to
//! ±1 and a product that picks up an imaginary phase is a loud error rather
//! than a silently tracked quarter phase. The raw quarter phase is still
//! available through [`PauliString::multiply_phased`] for algebraic tests.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::Gate;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    /// X component in the binary-symplectic picture (X and Y have it set).
    #[must_use]
    pub fn x_bit(self) -> bool {
        matches!(self, Letter::X | Letter::Y)
    }

    /// Z component in the binary-symplectic picture (Z and Y have it set).
    #[must_use]
    pub fn z_bit(self) -> bool {
        matches!(self, Letter::Z | Letter::Y)
    }

    /// Letter from its binary-symplectic components.
    #[must_use]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    /// Whether two letters anticommute (both non-identity and distinct).
    #[must_use]
    pub fn anticommutes(self, other: Letter) -> bool {
        self != Letter::I && other != Letter::I && self != other
    }

    /// Letterwise product, ignoring phase: returns the letter of `self·other`.
    #[must_use]
    pub fn product_letter(self, other: Letter) -> Letter {
        Letter::from_bits(self.x_bit() ^ other.x_bit(), self.z_bit() ^ other.z_bit())
    }

    /// Quarter-phase exponent k of `self·other = i^k · product_letter`.
    #[must_use]
    pub fn product_phase(self, other: Letter) -> u8 {
        use Letter::{X, Y, Z};
        match (self, other) {
            (X, Y) | (Y, Z) | (Z, X) => 1,
            (Y, X) | (Z, Y) | (X, Z) => 3,
            _ => 0,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Errors from Pauli-string operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("pauli string length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("product {0} * {1} has imaginary phase; only Hermitian products are supported")]
    NonHermitianProduct(String, String),
    #[error("gate target {target} out of range for {len}-qubit string")]
    TargetOutOfRange { target: usize, len: usize },
    #[error("relabel permutation {0:?} is not a permutation of the string indices")]
    BadPermutation(Vec<usize>),
    #[error("cannot parse {0:?} as a signed Pauli string")]
    Parse(String),
}

/// A ±1-signed Pauli word of fixed length (4 for data-only operators, 5 when
/// the ancilla is included).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    negative: bool,
    letters: Vec<Letter>,
}

impl PauliString {
    /// Positive-phase string from letters.
    #[must_use]
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self { negative: false, letters }
    }

    /// String with an explicit sign (`negative = true` for phase −1).
    #[must_use]
    pub fn with_sign(negative: bool, letters: Vec<Letter>) -> Self {
        Self { negative, letters }
    }

    /// The length-`n` identity.
    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self::from_letters(vec![Letter::I; n])
    }

    /// Weight-1 string with `letter` at `qubit`.
    ///
    /// # Panics
    /// Panics if `qubit >= n`.
    #[must_use]
    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for {n}");
        let mut letters = vec![Letter::I; n];
        letters[qubit] = letter;
        Self::from_letters(letters)
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    #[must_use]
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    #[must_use]
    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// Phase as ±1.
    #[must_use]
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    /// Number of non-identity letters.
    #[must_use]
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != Letter::I).count()
    }

    /// The same word with positive phase (for sign-insensitive comparisons).
    #[must_use]
    pub fn abs(&self) -> Self {
        Self::from_letters(self.letters.clone())
    }

    /// Full product with quarter-phase bookkeeping: returns `(k, word)` such
    /// that `self · other = i^k · word` with `word` positive-phase.
    pub fn multiply_phased(&self, other: &Self) -> Result<(u8, PauliString), PauliError> {
        if self.len() != other.len() {
            return Err(PauliError::LengthMismatch(self.len(), other.len()));
        }
        let mut phase = 0u8;
        if self.negative {
            phase += 2;
        }
        if other.negative {
            phase += 2;
        }
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                phase = (phase + a.product_phase(b)) % 4;
                a.product_letter(b)
            })
            .collect();
        Ok((phase % 4, PauliString::from_letters(letters)))
    }

    /// Signed product; errors if the product is not Hermitian (imaginary
    /// phase), which signals misuse.
    pub fn multiply(&self, other: &Self) -> Result<PauliString, PauliError> {
        let (phase, word) = self.multiply_phased(other)?;
        match phase {
            0 => Ok(word),
            2 => Ok(Self::with_sign(true, word.letters)),
            _ => Err(PauliError::NonHermitianProduct(self.to_string(), other.to_string())),
        }
    }

    /// True iff the operators commute: the number of positions with distinct
    /// non-identity letters is even.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        if self.len() != other.len() {
            return Err(PauliError::LengthMismatch(self.len(), other.len()));
        }
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|&(&a, &b)| a.anticommutes(b))
            .count();
        Ok(clashes % 2 == 0)
    }

    /// Clifford conjugation `g · self · g†`.
    pub fn conjugate_by_gate(&self, gate: &Gate) -> Result<PauliString, PauliError> {
        let n = self.len();
        let check = |q: usize| {
            if q < n {
                Ok(())
            } else {
                Err(PauliError::TargetOutOfRange { target: q, len: n })
            }
        };
        let mut out = self.clone();
        match gate {
            Gate::H(q) => {
                check(*q)?;
                let l = out.letters[*q];
                // X <-> Z, Y -> -Y
                out.letters[*q] = Letter::from_bits(l.z_bit(), l.x_bit());
                out.negative ^= l.x_bit() && l.z_bit();
            }
            Gate::X(q) => {
                check(*q)?;
                out.negative ^= out.letters[*q].z_bit();
            }
            Gate::Z(q) => {
                check(*q)?;
                out.negative ^= out.letters[*q].x_bit();
            }
            Gate::Cnot { control, target } => {
                check(*control)?;
                check(*target)?;
                let (xc, zc) = (out.letters[*control].x_bit(), out.letters[*control].z_bit());
                let (xt, zt) = (out.letters[*target].x_bit(), out.letters[*target].z_bit());
                out.negative ^= xc && zt && !(xt ^ zc);
                out.letters[*target] = Letter::from_bits(xt ^ xc, zt);
                out.letters[*control] = Letter::from_bits(xc, zc ^ zt);
            }
            Gate::Relabel(perm) => {
                if perm.len() != n {
                    return Err(PauliError::BadPermutation(perm.clone()));
                }
                let mut seen = vec![false; n];
                for &dst in perm {
                    check(dst)?;
                    if seen[dst] {
                        return Err(PauliError::BadPermutation(perm.clone()));
                    }
                    seen[dst] = true;
                }
                let mut letters = vec![Letter::I; n];
                for (src, &dst) in perm.iter().enumerate() {
                    letters[dst] = out.letters[src];
                }
                out.letters = letters;
            }
        }
        Ok(out)
    }

    /// Conjugation through a gate sequence, applied in circuit order.
    pub fn conjugate_by_gates<'a, I>(&self, gates: I) -> Result<PauliString, PauliError>
    where
        I: IntoIterator<Item = &'a Gate>,
    {
        let mut out = self.clone();
        for g in gates {
            out = out.conjugate_by_gate(g)?;
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PauliError::Parse(s.to_string());
        let (negative, rest) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if rest.is_empty() {
            return Err(bad());
        }
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { negative, letters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_disjoint_supports() {
        assert_eq!(p("XXII").multiply(&p("IIXX")).unwrap(), p("+XXXX"));
        assert_eq!(p("ZIZI").multiply(&p("IZIZ")).unwrap(), p("+ZZZZ"));
    }

    #[test]
    fn multiply_involution() {
        assert_eq!(p("XIXI").multiply(&p("XIXI")).unwrap(), p("+IIII"));
        assert_eq!(p("-ZZII").multiply(&p("-ZZII")).unwrap(), p("+IIII"));
    }

    #[test]
    fn multiply_anticommuting_overlap() {
        // XXXX * ZZZZ = (XZ)^4 = (-iY)^4 = YYYY
        assert_eq!(p("XXXX").multiply(&p("ZZZZ")).unwrap(), p("+YYYY"));
    }

    #[test]
    fn multiply_imaginary_phase_is_error() {
        let err = p("XIII").multiply(&p("YIII")).unwrap_err();
        assert!(matches!(err, PauliError::NonHermitianProduct(..)));
    }

    #[test]
    fn multiply_length_mismatch() {
        assert_eq!(
            p("XI").multiply(&p("XIX")).unwrap_err(),
            PauliError::LengthMismatch(2, 3)
        );
    }

    #[test]
    fn commutation_examples() {
        assert!(p("XXXX").commutes(&p("ZZZZ")).unwrap());
        // The logical pair anticommutes on exactly one site.
        assert!(!p("XIXI").commutes(&p("ZZII")).unwrap());
        // Gauge generators need not commute with each other.
        assert!(!p("XXII").commutes(&p("ZIZI")).unwrap());
    }

    #[test]
    fn conjugate_hadamard() {
        assert_eq!(
            p("XIII").conjugate_by_gate(&Gate::H(0)).unwrap(),
            p("ZIII")
        );
        assert_eq!(
            p("YIII").conjugate_by_gate(&Gate::H(0)).unwrap(),
            p("-YIII")
        );
    }

    #[test]
    fn conjugate_cnot_sign_cases() {
        let cx = Gate::Cnot { control: 0, target: 1 };
        assert_eq!(p("XZ").conjugate_by_gate(&cx).unwrap(), p("-YY"));
        assert_eq!(p("YY").conjugate_by_gate(&cx).unwrap(), p("-XZ"));
        assert_eq!(p("XI").conjugate_by_gate(&cx).unwrap(), p("XX"));
        assert_eq!(p("IZ").conjugate_by_gate(&cx).unwrap(), p("ZZ"));
        assert_eq!(p("IX").conjugate_by_gate(&cx).unwrap(), p("IX"));
        assert_eq!(p("ZI").conjugate_by_gate(&cx).unwrap(), p("ZI"));
    }

    #[test]
    fn transversal_hadamard_swaps_the_logical_pair() {
        // H on every qubit followed by relabeling 1<->2 (0-based).
        let seq = [
            Gate::H(0),
            Gate::H(1),
            Gate::H(2),
            Gate::H(3),
            Gate::Relabel(vec![0, 2, 1, 3]),
        ];
        assert_eq!(p("XIXI").conjugate_by_gates(&seq).unwrap(), p("ZZII"));
        assert_eq!(p("ZZII").conjugate_by_gates(&seq).unwrap(), p("XIXI"));
    }

    #[test]
    fn relabel_is_a_permutation_check() {
        let err = p("XY").conjugate_by_gate(&Gate::Relabel(vec![0, 0])).unwrap_err();
        assert!(matches!(err, PauliError::BadPermutation(_)));
    }

    #[test]
    fn display_and_parse_round_trip() {
        for s in ["+XIXI", "-ZZII", "+IIII", "-YXZI"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("XIXI").to_string(), "+XIXI");
        assert!("+XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }
}
