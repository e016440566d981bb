//! Noise sweeps over random logical circuits and pseudo-threshold fits.
//!
//! A sweep draws `n_circuits` random logical-gate sequences per depth, runs
//! each encoded circuit at every noise rate of a grid (exact density-matrix
//! evaluation or stabilizer Monte-Carlo), and aggregates three per-point
//! statistics:
//!
//! * `mean_p_ps` — post-selection survival probability, averaged over all
//!   circuits;
//! * `mean_delta_l` — conditional logical error, averaged over the circuits
//!   that survive post-selection at all;
//! * `weighted_delta` — logical error charged for the survival cost. By
//!   default this is the ratio of the two averages above; the
//!   `mean_of_ratios` switch averages per-circuit ratios instead.
//!
//! The break-even point against running the circuit bare is then read off a
//! least-squares fit: a quadratic through `(p, weighted_delta)` versus an
//! affine line through `(p, mean_delta_s)`, where `mean_delta_s` is the
//! closed-form error of the unencoded single qubit. The quadratic only uses
//! points whose weighted error is at most [`WEIGHTED_FIT_CAP`] — larger
//! values lie past any possible crossing (the unencoded error is a TVD,
//! bounded by 1) and diverge as survival collapses. The pseudo-threshold is
//! the smallest positive noise rate within the swept range at which the
//! quadratic overtakes the line from below.
//!
//! Circuit sampling is keyed by `(seed, depth, circuit index)` only — the
//! same circuit family is reused across gaps and noise rates so those
//! comparisons are not confounded by resampling.

use rand::Rng;

use crate::code::{self, LogicalGate, Schedule};
use crate::densmat::{self, DensmatError, RunOptions};
use crate::{exec, seeds, stab};

/// Which evaluation backend a sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Exact 5-qubit density-matrix evaluation with per-round branch merging.
    Densmat,
    /// Stabilizer-tableau Monte-Carlo sampling.
    Stab,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Engine::Densmat => write!(f, "densmat"),
            Engine::Stab => write!(f, "stab"),
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "densmat" => Ok(Engine::Densmat),
            "stab" => Ok(Engine::Stab),
            other => Err(ExperimentError::Config(format!(
                "unknown engine {other:?} (expected \"densmat\" or \"stab\")"
            ))),
        }
    }
}

/// Full description of a sweep.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Master seed for circuit sampling and trajectory noise.
    pub seed: u64,
    pub engine: Engine,
    /// Logical circuit depths to sweep.
    pub depths: Vec<usize>,
    /// Parity-check spacings (logical gates per round) to sweep.
    pub gaps: Vec<usize>,
    /// Noise rates; `None` picks a grid per (depth, gap) automatically.
    pub p_grid: Option<Vec<f64>>,
    /// Random logical circuits per sweep point.
    pub n_circuits: usize,
    /// Monte-Carlo shots per circuit (stabilizer engine only).
    pub n_trajectories: u64,
    /// Insert a parity-check round directly after encoding.
    pub round_after_prep: bool,
    /// Reject final readouts with odd total parity.
    pub final_parity_check: bool,
    /// Average per-circuit ratios instead of taking the ratio of averages.
    pub mean_of_ratios: bool,
}

impl ExperimentConfig {
    /// A sweep over the given depths and gaps with default settings: exact
    /// engine, 200 circuits per point, automatic noise grid.
    #[must_use]
    pub fn new(depths: Vec<usize>, gaps: Vec<usize>) -> Self {
        Self {
            seed: 0,
            engine: Engine::Densmat,
            depths,
            gaps,
            p_grid: None,
            n_circuits: 200,
            n_trajectories: 100_000,
            round_after_prep: false,
            final_parity_check: true,
            mean_of_ratios: false,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: String| Err(ExperimentError::Config(msg));
        if self.depths.is_empty() {
            return fail("depths must not be empty".into());
        }
        if let Some(&d) = self.depths.iter().find(|&&d| d == 0) {
            return fail(format!("depths must be at least 1, got {d}"));
        }
        if self.gaps.is_empty() {
            return fail("gaps must not be empty".into());
        }
        if let Some(&g) = self.gaps.iter().find(|&&g| g == 0) {
            return fail(format!("gaps must be at least 1, got {g}"));
        }
        if self.n_circuits < 2 {
            return fail(format!("n_circuits must be at least 2, got {}", self.n_circuits));
        }
        if self.n_trajectories == 0 {
            return fail("n_trajectories must be at least 1".into());
        }
        if let Some(grid) = &self.p_grid {
            if grid.is_empty() {
                return fail("p_grid must not be empty".into());
            }
            if grid.iter().any(|&p| !(0.0..=0.75).contains(&p)) {
                return fail("p_grid entries must lie in [0, 0.75]".into());
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return fail("p_grid must be strictly increasing".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
}

/// Draws a uniformly random logical-gate sequence of the given depth.
pub fn sample_sequence(rng: &mut impl Rng, depth: usize) -> Vec<LogicalGate> {
    (0..depth)
        .map(|_| match rng.gen_range(0..3u8) {
            0 => LogicalGate::X,
            1 => LogicalGate::Z,
            _ => LogicalGate::H,
        })
        .collect()
}

/// Aggregate statistics of one (depth, gap, p) sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub depth: usize,
    pub gap: usize,
    pub p: f64,
    /// Conditional logical error averaged over surviving circuits; NaN when
    /// every circuit was fully rejected.
    pub mean_delta_l: f64,
    /// Survival probability averaged over all circuits.
    pub mean_p_ps: f64,
    /// Closed-form unencoded error averaged over all circuits.
    pub mean_delta_s: f64,
    /// Survival-weighted logical error (see module docs).
    pub weighted_delta: f64,
    pub n_circuits: usize,
}

/// Per-circuit evaluation result.
#[derive(Debug, Clone, Copy)]
struct CircuitOutcome {
    p_ps: f64,
    /// Conditional logical error; `None` when post-selection rejected
    /// everything.
    delta_l: Option<f64>,
    delta_s: f64,
}

fn eval_circuit(
    cfg: &ExperimentConfig,
    engine: Engine,
    depth: usize,
    gap: usize,
    p_idx: usize,
    p: f64,
    circuit_idx: usize,
) -> CircuitOutcome {
    let mut rng = seeds::circuit_rng(cfg.seed, depth as u32, circuit_idx as u32);
    let seq = sample_sequence(&mut rng, depth);
    let (basis, expected) = code::true_output(&seq);
    let schedule = Schedule { gap, round_after_prep: cfg.round_after_prep };
    let circuit = code::assemble_encoded_circuit(&seq, schedule, basis)
        .expect("validated configuration assembles");
    let delta_s = densmat::run_bare(&seq, p);
    let options = RunOptions {
        merge: densmat::MergeMode::PerRound,
        final_parity_check: cfg.final_parity_check,
    };
    let (p_ps, delta_l) = match engine {
        Engine::Densmat => match densmat::run_items(&circuit, p, options) {
            Ok(outcome) => (outcome.p_ps, Some(outcome.logical_error(expected))),
            Err(DensmatError::FullyRejected) => (0.0, None),
            Err(DensmatError::Code(e)) => unreachable!("assembled circuit is well-formed: {e}"),
        },
        Engine::Stab => {
            let base = seeds::trajectory_base(
                cfg.seed,
                depth as u32,
                gap as u32,
                p_idx as u32,
                circuit_idx as u32,
            );
            let est =
                stab::estimate(&circuit, p, cfg.final_parity_check, &base, cfg.n_trajectories);
            let delta = (est.n_accepted > 0).then(|| est.logical_error(expected));
            (est.p_ps(), delta)
        }
    };
    CircuitOutcome { p_ps, delta_l, delta_s }
}

fn aggregate(
    cfg: &ExperimentConfig,
    depth: usize,
    gap: usize,
    p: f64,
    outcomes: &[CircuitOutcome],
) -> SweepPoint {
    let n = outcomes.len() as f64;
    let mean_p_ps = outcomes.iter().map(|o| o.p_ps).sum::<f64>() / n;
    let mean_delta_s = outcomes.iter().map(|o| o.delta_s).sum::<f64>() / n;
    let survivors: Vec<&CircuitOutcome> =
        outcomes.iter().filter(|o| o.delta_l.is_some()).collect();
    let (mean_delta_l, weighted_delta) = if survivors.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let k = survivors.len() as f64;
        let mean_delta_l =
            survivors.iter().map(|o| o.delta_l.unwrap()).sum::<f64>() / k;
        let weighted = if cfg.mean_of_ratios {
            survivors.iter().map(|o| o.delta_l.unwrap() / o.p_ps).sum::<f64>() / k
        } else {
            mean_delta_l / mean_p_ps
        };
        (mean_delta_l, weighted)
    };
    SweepPoint {
        depth,
        gap,
        p,
        mean_delta_l,
        mean_p_ps,
        mean_delta_s,
        weighted_delta,
        n_circuits: outcomes.len(),
    }
}

fn sweep_point(
    cfg: &ExperimentConfig,
    engine: Engine,
    depth: usize,
    gap: usize,
    p_idx: usize,
    p: f64,
    n_circuits: usize,
) -> SweepPoint {
    let idxs: Vec<usize> = (0..n_circuits).collect();
    let outcomes =
        exec::map_auto(&idxs, |&i| eval_circuit(cfg, engine, depth, gap, p_idx, p, i));
    aggregate(cfg, depth, gap, p, &outcomes)
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
#[must_use]
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo, "need n >= 2 and 0 < lo < hi");
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}

const PILOT_LO: f64 = 1e-3;
const PILOT_HI: f64 = 0.1;
const PILOT_POINTS: usize = 5;
const PILOT_MAX_CIRCUITS: usize = 32;
const GRID_POINTS: usize = 12;
const GRID_MIN_P: f64 = 1e-4;
const GRID_MAX_P: f64 = 0.15;
const GRID_SPAN: f64 = 4.0;

/// Picks a noise grid for one (depth, gap) cell: a coarse exact pilot scan
/// locates where the weighted logical error first overtakes the unencoded
/// error (or post-selection collapses entirely), and the final grid covers a
/// factor of [`GRID_SPAN`] around that crossing with [`GRID_POINTS`]
/// geometric points.
#[must_use]
pub fn auto_grid(cfg: &ExperimentConfig, depth: usize, gap: usize) -> Vec<f64> {
    let n_pilot = cfg.n_circuits.min(PILOT_MAX_CIRCUITS);
    let pilot = geometric_grid(PILOT_LO, PILOT_HI, PILOT_POINTS);
    let mut crossing = None;
    for (i, &p) in pilot.iter().enumerate() {
        let point = sweep_point(cfg, Engine::Densmat, depth, gap, i, p, n_pilot);
        let crossed =
            !point.weighted_delta.is_finite() || point.weighted_delta >= point.mean_delta_s;
        if crossed {
            crossing = Some(i);
            break;
        }
    }
    let p_star = match crossing {
        Some(0) => PILOT_LO,
        Some(i) => (pilot[i - 1] * pilot[i]).sqrt(),
        None => PILOT_HI,
    };
    geometric_grid(
        (p_star / GRID_SPAN).max(GRID_MIN_P),
        (p_star * GRID_SPAN).min(GRID_MAX_P),
        GRID_POINTS,
    )
}

/// Least-squares polynomial fit of the given degree; coefficients in
/// ascending order. `None` when the system is underdetermined or singular.
#[must_use]
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Option<Vec<f64>> {
    assert_eq!(xs.len(), ys.len());
    let k = degree + 1;
    if xs.len() < k {
        return None;
    }
    let mut moments = vec![0.0; 2 * degree + 1];
    for &x in xs {
        let mut pw = 1.0;
        for m in moments.iter_mut() {
            *m += pw;
            pw *= x;
        }
    }
    let mut rhs = vec![0.0; k];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut pw = 1.0;
        for r in rhs.iter_mut() {
            *r += y * pw;
            pw *= x;
        }
    }
    let mut normal: Vec<Vec<f64>> =
        (0..k).map(|i| (0..k).map(|j| moments[i + j]).collect()).collect();
    solve_linear(&mut normal, &mut rhs)
}

/// Gaussian elimination with partial pivoting.
fn solve_linear(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut v = b[row];
        for c in row + 1..n {
            v -= a[row][c] * x[c];
        }
        x[row] = v / a[row][row];
    }
    Some(x)
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn residual_rms(xs: &[f64], ys: &[f64], coeffs: &[f64]) -> f64 {
    let sum: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - eval_poly(coeffs, x);
            r * r
        })
        .sum();
    (sum / xs.len() as f64).sqrt()
}

/// Smallest root of `d(x) = a2 x^2 + a1 x + a0` in `(0, x_max]` at which `d`
/// crosses zero upward (`d' > 0`), solved stably; falls back to the linear
/// case when the quadratic coefficient vanishes. The upward requirement is
/// what makes this a break-even point — the curve overtaking the line from
/// below — and it discards the noise-scale root near the origin that free
/// fitted intercepts otherwise produce whenever `a0` lands a hair above zero.
fn smallest_upward_crossing(a0: f64, a1: f64, a2: f64, x_max: f64) -> Option<f64> {
    let mut roots: Vec<f64> = Vec::new();
    if a2.abs() < 1e-30 * (a1.abs() + a0.abs()).max(1.0) {
        if a1 != 0.0 {
            roots.push(-a0 / a1);
        }
    } else {
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc < 0.0 {
            return None;
        }
        let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
        roots.push(q / a2);
        if q != 0.0 {
            roots.push(a0 / q);
        } else {
            roots.push(0.0);
        }
    }
    roots
        .into_iter()
        .filter(|r| r.is_finite() && *r > 0.0 && *r <= x_max * (1.0 + 1e-9))
        .filter(|r| 2.0 * a2 * r + a1 > 0.0)
        .min_by(f64::total_cmp)
}

/// How a pseudo-threshold fit concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Ok,
    /// Fits never cross within the swept range.
    NoCrossing,
    /// Fewer than four usable sweep points.
    InsufficientPoints,
}

impl std::fmt::Display for FitStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitStatus::Ok => write!(f, "ok"),
            FitStatus::NoCrossing => write!(f, "no-crossing"),
            FitStatus::InsufficientPoints => write!(f, "insufficient-points"),
        }
    }
}

/// Pseudo-threshold fit for one (depth, gap) cell. The quadratic
/// `q(p) = q2 p^2 + q1 p + q0` approximates the weighted logical error, the
/// line `l(p) = l1 p + l0` the unencoded error; `threshold` is their
/// smallest positive crossing (NaN unless `status` is [`FitStatus::Ok`]).
/// Residuals are the RMS misfit of each curve.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdFit {
    pub depth: usize,
    pub gap: usize,
    pub threshold: f64,
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
    pub l1: f64,
    pub l0: f64,
    pub residual_q: f64,
    pub residual_l: f64,
    pub status: FitStatus,
}

impl ThresholdFit {
    fn degenerate(depth: usize, gap: usize, status: FitStatus) -> Self {
        Self {
            depth,
            gap,
            threshold: f64::NAN,
            q2: f64::NAN,
            q1: f64::NAN,
            q0: f64::NAN,
            l1: f64::NAN,
            l0: f64::NAN,
            residual_q: f64::NAN,
            residual_l: f64::NAN,
            status,
        }
    }
}

/// Weighted errors above this bound cannot contain the break-even point: the
/// unencoded error is a total-variation distance and never exceeds 1, so a
/// sweep point whose weighted error is larger lies strictly past any
/// crossing. Near total rejection the weighted error grows without bound and
/// such points would dominate the least-squares quadratic while carrying no
/// information about where the curves meet, so they are excluded from its
/// support.
pub const WEIGHTED_FIT_CAP: f64 = 1.0;

/// Fits the pseudo-threshold from one cell's sweep points. Points whose
/// weighted error is undefined (fully rejected) or above [`WEIGHTED_FIT_CAP`]
/// are excluded from the quadratic; the unencoded line uses every point.
/// Fitting happens on noise rates rescaled by the largest usable `p` for
/// conditioning; the reported coefficients are unscaled, and the crossing is
/// searched over the full swept range.
#[must_use]
pub fn fit_threshold(depth: usize, gap: usize, points: &[SweepPoint]) -> ThresholdFit {
    let usable: Vec<&SweepPoint> = points
        .iter()
        .filter(|pt| pt.weighted_delta.is_finite() && pt.weighted_delta <= WEIGHTED_FIT_CAP)
        .collect();
    if usable.len() < 4 {
        return ThresholdFit::degenerate(depth, gap, FitStatus::InsufficientPoints);
    }
    let scale = usable.iter().map(|pt| pt.p).fold(0.0, f64::max);
    if scale <= 0.0 {
        return ThresholdFit::degenerate(depth, gap, FitStatus::InsufficientPoints);
    }
    let us: Vec<f64> = usable.iter().map(|pt| pt.p / scale).collect();
    let ws: Vec<f64> = usable.iter().map(|pt| pt.weighted_delta).collect();
    let all_us: Vec<f64> = points.iter().map(|pt| pt.p / scale).collect();
    let all_ds: Vec<f64> = points.iter().map(|pt| pt.mean_delta_s).collect();
    let (Some(qc), Some(lc)) = (polyfit(&us, &ws, 2), polyfit(&all_us, &all_ds, 1)) else {
        return ThresholdFit::degenerate(depth, gap, FitStatus::InsufficientPoints);
    };
    let u_max = points.iter().map(|pt| pt.p).fold(0.0, f64::max) / scale;
    let root = smallest_upward_crossing(qc[0] - lc[0], qc[1] - lc[1], qc[2], u_max);
    let (threshold, status) = match root {
        Some(u) => (u * scale, FitStatus::Ok),
        None => (f64::NAN, FitStatus::NoCrossing),
    };
    ThresholdFit {
        depth,
        gap,
        threshold,
        q2: qc[2] / (scale * scale),
        q1: qc[1] / scale,
        q0: qc[0],
        l1: lc[1] / scale,
        l0: lc[0],
        residual_q: residual_rms(&us, &ws, &qc),
        residual_l: residual_rms(&all_us, &all_ds, &lc),
        status,
    }
}

/// Everything a sweep produced: one point per (depth, gap, p) and one fit
/// per (depth, gap).
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub fits: Vec<ThresholdFit>,
}

/// Runs the full sweep described by `config`. Cells are processed in the
/// (depth, gap) order given; circuits within a point run in parallel when
/// the `parallel` feature is enabled, with output independent of the
/// execution strategy.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let mut points = Vec::new();
    let mut fits = Vec::new();
    for &depth in &config.depths {
        for &gap in &config.gaps {
            let grid = match &config.p_grid {
                Some(grid) => grid.clone(),
                None => auto_grid(config, depth, gap),
            };
            let cell: Vec<SweepPoint> = grid
                .iter()
                .enumerate()
                .map(|(p_idx, &p)| {
                    sweep_point(config, config.engine, depth, gap, p_idx, p, config.n_circuits)
                })
                .collect();
            fits.push(fit_threshold(depth, gap, &cell));
            points.extend(cell);
        }
    }
    Ok(SweepResult { points, fits })
}
