//! Deterministic derivation of every random stream in a sweep.
//!
//! All randomness flows from one master seed through fixed-width keys packed
//! into ChaCha seeds, so results are independent of execution order and
//! worker count. Circuit-sampling streams are keyed only by (depth, circuit
//! index): every gap and every noise level in a sweep scores the *same*
//! random circuit family, which removes circuit-sampling variance from the
//! comparisons the sweep exists to make.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(u8)]
#[derive(Debug, Clone, Copy)]
enum Domain {
    Circuit = 1,
    Trajectory = 2,
}

fn seed_bytes(
    master: u64,
    domain: Domain,
    depth: u32,
    gap: u32,
    p_idx: u32,
    circuit_idx: u32,
) -> [u8; 32] {
    let mut s = [0u8; 32];
    s[0..8].copy_from_slice(&master.to_le_bytes());
    s[8] = domain as u8;
    s[9..13].copy_from_slice(&depth.to_le_bytes());
    s[13..17].copy_from_slice(&gap.to_le_bytes());
    s[17..21].copy_from_slice(&p_idx.to_le_bytes());
    s[21..25].copy_from_slice(&circuit_idx.to_le_bytes());
    s
}

/// Stream that samples the logical gate sequence of one circuit instance.
#[must_use]
pub fn circuit_rng(master: u64, depth: u32, circuit_idx: u32) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(seed_bytes(master, Domain::Circuit, depth, 0, 0, circuit_idx))
}

/// Base generator for the Monte-Carlo trajectories of one sweep cell; the
/// engine re-streams it per trajectory index.
#[must_use]
pub fn trajectory_base(
    master: u64,
    depth: u32,
    gap: u32,
    p_idx: u32,
    circuit_idx: u32,
) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(seed_bytes(master, Domain::Trajectory, depth, gap, p_idx, circuit_idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn first_words(mut rng: ChaCha8Rng) -> [u64; 4] {
        [rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()]
    }

    #[test]
    fn streams_are_deterministic() {
        assert_eq!(first_words(circuit_rng(7, 10, 3)), first_words(circuit_rng(7, 10, 3)));
        assert_eq!(
            first_words(trajectory_base(7, 10, 2, 1, 3)),
            first_words(trajectory_base(7, 10, 2, 1, 3))
        );
    }

    #[test]
    fn distinct_keys_give_distinct_streams() {
        let base = first_words(circuit_rng(7, 10, 3));
        assert_ne!(base, first_words(circuit_rng(8, 10, 3)));
        assert_ne!(base, first_words(circuit_rng(7, 11, 3)));
        assert_ne!(base, first_words(circuit_rng(7, 10, 4)));
        // Domain separation: same key, different purpose, different stream.
        assert_ne!(base, first_words(trajectory_base(7, 10, 0, 0, 3)));
    }

    #[test]
    fn circuit_streams_ignore_gap_and_noise_level() {
        // By construction the circuit key has no gap/p slot at all; this test
        // documents the intent rather than the packing.
        let a = first_words(circuit_rng(7, 10, 3));
        let b = first_words(circuit_rng(7, 10, 3));
        assert_eq!(a, b);
    }
}
