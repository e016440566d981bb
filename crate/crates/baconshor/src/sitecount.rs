//! Closed-form site-counting bounds and the analytic threshold/optimal-gap
//! search.
//!
//! A depth-`T` logical circuit averages `8T/3` noisy physical sites from its
//! gates (X and Z cost two sites, H four). With `M` parity-check rounds the
//! gate sites split into `M + 1` segments of `N = (8/3)T/(M+1)` sites each;
//! the encoding block adds [`code::PREP_NOISE_SITES`] sites in front of the
//! first segment and every round adds [`code::ROUND_NOISE_SITES`]. Error
//! detection catches all single faults per block, so a block only fails when
//! two faults land in it — hence pair counts. All bounds clamp to [0, 1]
//! outside their small-`p` validity region; [`bounds_valid_at`] reports
//! whether any clamp was engaged.

use crate::code;

/// Noisy sites in the encoding block.
pub const N_A: f64 = code::PREP_NOISE_SITES as f64;
/// Noisy sites per parity-check round.
pub const N_B: f64 = code::ROUND_NOISE_SITES as f64;

/// Upper end of the threshold scan.
pub const DEFAULT_P_MAX: f64 = 0.1;
/// Number of coarse scan steps before bisection.
pub const COARSE_STEPS: usize = 4000;
/// Absolute tolerance of the threshold bisection.
pub const BISECT_TOL: f64 = 1e-7;

/// Thresholds of competing divisor schedules for the same depth can differ
/// by ~1e-5 purely through the fractional averaging in
/// [`sites_per_segment`] — noise, not signal, at the resolution this model
/// is meant for. Differences below this tolerance count as ties, which go to
/// the schedule with fewer measurements.
pub const GAP_TIE_TOL: f64 = 1.5e-5;

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Real-valued extension of the pair count C(x, 2) = x(x−1)/2.
#[must_use]
pub fn pairs(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Average number of noisy gate sites per segment: N = (8/3)·T/(M+1).
#[must_use]
pub fn sites_per_segment(t: usize, m: usize) -> f64 {
    (8.0 / 3.0) * t as f64 / (m as f64 + 1.0)
}

/// Lower bound on the probability that no block suffers two faults
/// (per-block pair counting, union-bounded within blocks):
/// `(1 − C(N_A+N, 2)p²)·(1 − C(N_B+N, 2)p²)^M`, factors clamped to [0, 1].
#[must_use]
pub fn logical_success_bound(t: usize, m: usize, p: f64) -> f64 {
    let n = sites_per_segment(t, m);
    let first = clamp01(1.0 - pairs(N_A + n) * p * p);
    let per_round = clamp01(1.0 - pairs(N_B + n) * p * p);
    clamp01(first * per_round.powi(m as i32))
}

/// Lower bound on the post-selection survival probability:
/// `(1 − (N_A+N)p)·(1 − (N_B+N)p)^M`, factors clamped to [0, 1].
#[must_use]
pub fn ps_bound(t: usize, m: usize, p: f64) -> f64 {
    let n = sites_per_segment(t, m);
    let first = clamp01(1.0 - (N_A + n) * p);
    let per_round = clamp01(1.0 - (N_B + n) * p);
    clamp01(first * per_round.powi(m as i32))
}

/// Linear (union-bound) lower bound on the probability that the whole run is
/// completely fault-free. Weaker than [`ps_bound`] but what the win criterion
/// conditions on.
#[must_use]
pub fn no_fault_bound(t: usize, m: usize, p: f64) -> f64 {
    let n = sites_per_segment(t, m);
    clamp01(1.0 - (N_A + n + m as f64 * (N_B + n)) * p)
}

/// Success probability of the unencoded circuit: 1 − min(Tp, 1).
#[must_use]
pub fn unencoded_success(t: usize, p: f64) -> f64 {
    1.0 - (t as f64 * p).min(1.0)
}

/// Whether the encoded bound beats the unencoded circuit at `p`: the logical
/// failure bound, conditioned on the fault-free survival bound, must not
/// exceed the unencoded failure probability min(Tp, 1).
#[must_use]
pub fn wins_at(t: usize, m: usize, p: f64) -> bool {
    let p_l = 1.0 - logical_success_bound(t, m, p);
    let no_fault = no_fault_bound(t, m, p);
    if no_fault <= 0.0 {
        return false;
    }
    p_l / no_fault <= (t as f64 * p).min(1.0)
}

/// Largest `p` in (0, p_max] such that the encoded bound wins at every rate
/// up to `p`: coarse scan from below, then bisection on the first losing
/// bracket to [`BISECT_TOL`]. Returns `p_max` if the bound wins everywhere
/// and approaches 0 if it never wins.
#[must_use]
pub fn sitecount_threshold_scanning(t: usize, m: usize, p_max: f64) -> f64 {
    let step = p_max / COARSE_STEPS as f64;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=COARSE_STEPS {
        let p = i as f64 * step;
        if wins_at(t, m, p) {
            lo = p;
        } else {
            hi = Some(p);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return p_max;
    };
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if wins_at(t, m, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// [`sitecount_threshold_scanning`] with the default scan range.
#[must_use]
pub fn sitecount_threshold(t: usize, m: usize) -> f64 {
    sitecount_threshold_scanning(t, m, DEFAULT_P_MAX)
}

/// Whether every bound factor at (T, M, p) is in its natural range, i.e. no
/// [0, 1] clamping was engaged.
#[must_use]
pub fn bounds_valid_at(t: usize, m: usize, p: f64) -> bool {
    let n = sites_per_segment(t, m);
    1.0 - pairs(N_A + n) * p * p >= 0.0
        && 1.0 - pairs(N_B + n) * p * p >= 0.0
        && 1.0 - (N_A + n) * p >= 0.0
        && 1.0 - (N_B + n) * p >= 0.0
        && no_fault_bound(t, m, p) > 0.0
}

/// A depth's preferred measurement schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapChoice {
    /// Logical gates between successive parity-check rounds.
    pub gap: usize,
    /// Number of mid-circuit measurements in the bound's convention
    /// (T/gap − 1: the segment after the last gate needs no further
    /// protection from the bound's point of view).
    pub m: usize,
    /// Site-counting threshold of the chosen schedule.
    pub threshold: f64,
}

fn divisors(t: usize) -> Vec<usize> {
    (1..=t).filter(|g| t % g == 0).collect()
}

/// Maximizes [`sitecount_threshold`] over the even schedules of depth `t`
/// (gaps = divisors of `t`), breaking near-ties (within [`GAP_TIE_TOL`])
/// toward the larger gap.
#[must_use]
pub fn optimal_gap_scanning(t: usize, p_max: f64) -> GapChoice {
    assert!(t >= 1, "depth must be at least 1");
    let rows: Vec<(usize, usize, f64)> = divisors(t)
        .into_iter()
        .map(|g| {
            let m = t / g - 1;
            (g, m, sitecount_threshold_scanning(t, m, p_max))
        })
        .collect();
    let best = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let (gap, m, threshold) = rows
        .into_iter()
        .filter(|r| r.2 >= best - GAP_TIE_TOL)
        .max_by_key(|r| r.0)
        .expect("at least one divisor");
    GapChoice { gap, m, threshold }
}

/// [`optimal_gap_scanning`] with the default scan range.
#[must_use]
pub fn optimal_gap(t: usize) -> GapChoice {
    optimal_gap_scanning(t, DEFAULT_P_MAX)
}
