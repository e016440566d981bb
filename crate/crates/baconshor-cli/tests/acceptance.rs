//! Acceptance gate: the seven end-to-end claims this project is built to
//! reproduce, one test per claim, each printing a single PASS/FAIL verdict
//! (visible with `--nocapture`). The deep-circuit sweep is shared between
//! the criteria that consume it.
//!
//! Expected total runtime is a few minutes on one core, dominated by the
//! depth-100 sweep.

use std::sync::OnceLock;
use std::time::Instant;

use baconshor::checks::{self, CheckOptions};
use baconshor::code::Schedule;
use baconshor::experiment::{run_sweep, ExperimentConfig, FitStatus, SweepResult, ThresholdFit};
use baconshor::sitecount;

fn verdict(n: u32, desc: &str, ok: bool) {
    println!("ACCEPTANCE C{n} ({desc}): {}", if ok { "PASS" } else { "FAIL" });
}

fn fit_for(result: &SweepResult, depth: usize, gap: usize) -> &ThresholdFit {
    result
        .fits
        .iter()
        .find(|f| f.depth == depth && f.gap == gap)
        .expect("fit present")
}

/// Log-log interpolation of the mean survival probability at `p` from a
/// cell's sweep points.
fn survival_at(result: &SweepResult, depth: usize, gap: usize, p: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = result
        .points
        .iter()
        .filter(|pt| pt.depth == depth && pt.gap == gap)
        .map(|pt| (pt.p, pt.mean_p_ps))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pair = pts
        .windows(2)
        .find(|w| w[0].0 <= p && p <= w[1].0)
        .expect("threshold lies inside the swept grid");
    let ((p0, s0), (p1, s1)) = (pair[0], pair[1]);
    let f = (p.ln() - p0.ln()) / (p1.ln() - p0.ln());
    (s0.ln() * (1.0 - f) + s1.ln() * f).exp()
}

/// Depth-100 sweep at the end-of-circuit-only, interior, and per-gate
/// schedules, with the library defaults (exact engine, 200 circuits,
/// automatic grid). Computed once, shared by criteria 4-6.
fn deep_sweep() -> &'static (SweepResult, f64) {
    static DEEP: OnceLock<(SweepResult, f64)> = OnceLock::new();
    DEEP.get_or_init(|| {
        let started = Instant::now();
        let cfg = ExperimentConfig::new(vec![100], vec![1, 15, 100]);
        let result = run_sweep(&cfg).expect("valid configuration");
        (result, started.elapsed().as_secs_f64())
    })
}

#[test]
fn c1_sitecount_command_reproduces_the_optimal_gap_table() {
    const DEPTHS: [usize; 11] = [1, 2, 5, 10, 20, 30, 40, 48, 60, 84, 100];
    const EXPECTED_GAPS: [usize; 11] = [1, 2, 5, 10, 20, 15, 20, 16, 20, 28, 25];

    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.json");
    std::fs::write(
        &cfg_path,
        serde_json::json!({ "depths": DEPTHS }).to_string(),
    )
    .unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_baconshor"))
        .arg("sitecount")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    let table = std::fs::read_to_string(dir.path().join("out/optimal_gaps.csv")).unwrap();
    let gaps: Vec<usize> = table
        .lines()
        .skip(1)
        .map(|row| row.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let elapsed = started.elapsed().as_secs_f64();

    let ok = out.status.success() && gaps == EXPECTED_GAPS && elapsed < 60.0;
    verdict(1, "optimal measurement gaps across 11 depths", ok);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(gaps, EXPECTED_GAPS);
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
}

#[test]
fn c2_depth_100_analytic_threshold_is_a_few_tenths_of_a_percent() {
    let started = Instant::now();
    let best = sitecount::optimal_gap(100);
    let elapsed = started.elapsed().as_secs_f64();

    let in_range = (0.001..=0.004).contains(&best.threshold);
    let ok = in_range && elapsed < 60.0;
    verdict(2, "depth-100 site-counting threshold in [0.1%, 0.4%]", ok);
    assert!(in_range, "{best:?}");
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
}

#[test]
fn c3_short_circuits_break_even_at_a_few_percent() {
    let started = Instant::now();
    let cfg = ExperimentConfig::new(vec![5], vec![5]);
    let result = run_sweep(&cfg).expect("valid configuration");
    let fit = fit_for(&result, 5, 5);
    let elapsed = started.elapsed().as_secs_f64();

    let in_range = fit.status == FitStatus::Ok && (0.02..=0.04).contains(&fit.threshold);
    let ok = in_range && elapsed < 600.0;
    verdict(3, "depth-5 best-gap threshold in [2%, 4%]", ok);
    assert!(in_range, "{fit:?}");
    assert!(elapsed < 600.0, "took {elapsed:.1}s");
}

#[test]
fn c4_deep_circuits_break_even_around_half_a_percent() {
    let (result, elapsed) = deep_sweep();
    let fit = fit_for(result, 100, 15);

    let in_range = fit.status == FitStatus::Ok && (0.004..=0.008).contains(&fit.threshold);
    let ok = in_range && *elapsed < 7200.0;
    verdict(4, "depth-100 gap-15 threshold in [0.4%, 0.8%]", ok);
    assert!(in_range, "{fit:?}");
    assert!(*elapsed < 7200.0, "took {elapsed:.1}s");
}

#[test]
fn c5_threshold_peaks_at_an_interior_gap() {
    let (result, _) = deep_sweep();
    let t1 = fit_for(result, 100, 1).threshold;
    let t15 = fit_for(result, 100, 15).threshold;
    let t100 = fit_for(result, 100, 100).threshold;

    let ok = t15 > t1 && t15 > t100;
    verdict(5, "depth-100 threshold higher at gap 15 than at gaps 1 and 100", ok);
    assert!(ok, "gap 1: {t1:.3e}, gap 15: {t15:.3e}, gap 100: {t100:.3e}");
}

#[test]
fn c6_survival_trends_with_gap_and_dominates_the_analytic_bound() {
    let (result, _) = deep_sweep();

    // Survival at each gap's own break-even point grows with the gap:
    // measuring less often rejects less.
    let survivals: Vec<f64> = [1, 15, 100]
        .iter()
        .map(|&gap| {
            let fit = fit_for(result, 100, gap);
            survival_at(result, 100, gap, fit.threshold)
        })
        .collect();
    let increasing = survivals.windows(2).all(|w| w[0] < w[1]);

    // The closed-form survival bound with the matching measurement count
    // stays below the measured survival everywhere it was measured.
    let mut bound_below = true;
    for pt in &result.points {
        let m = Schedule::every(pt.gap).round_count(pt.depth) - 1;
        if sitecount::ps_bound(pt.depth, m, pt.p) > pt.mean_p_ps {
            bound_below = false;
        }
    }

    let ok = increasing && bound_below;
    verdict(6, "survival at threshold rises with gap; analytic bound stays below", ok);
    assert!(increasing, "survival at threshold by gap: {survivals:?}");
    assert!(bound_below);
}

#[test]
fn c7_consistency_suite_passes_quickly() {
    let started = Instant::now();
    let reports = checks::run_all_checks(&CheckOptions::default());
    let elapsed = started.elapsed().as_secs_f64();

    let all = checks::all_passed(&reports);
    let ok = all && elapsed < 60.0;
    verdict(7, "all internal consistency checks pass in seconds", ok);
    for report in &reports {
        assert!(report.passed, "{}: {}", report.name, report.details);
    }
    assert!(all);
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
}
