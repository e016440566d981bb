//! End-to-end engine tests against pinned reference values (computed with an
//! independent implementation of the same protocol) and cross-validation
//! between the exact and Monte-Carlo engines through the public API.

use baconshor::code::{self, LogicalGate, Schedule};
use baconshor::densmat::{self, MergeMode, RunOptions};
use baconshor::experiment::{Engine, ExperimentConfig};
use baconshor::{experiment, seeds, sitecount, stab};

use LogicalGate::{H, X, Z};

struct RefCase {
    seq: &'static [LogicalGate],
    schedule: Schedule,
    p: f64,
    p_ps: f64,
    delta_l: f64,
}

const REPRODUCIBILITY_TOL: f64 = 1e-11;

fn reference_cases() -> [RefCase; 4] {
    [
        RefCase {
            seq: &[X],
            schedule: Schedule { gap: 1, round_after_prep: false },
            p: 0.01,
            p_ps: 8.216533359217246e-01,
            delta_l: 1.147560256795344e-03,
        },
        RefCase {
            seq: &[H],
            schedule: Schedule { gap: 1, round_after_prep: false },
            p: 0.005,
            p_ps: 8.764409527614087e-01,
            delta_l: 4.702882129717934e-04,
        },
        RefCase {
            seq: &[X, Z],
            schedule: Schedule { gap: 1, round_after_prep: true },
            p: 0.02,
            p_ps: 3.500592123463655e-01,
            delta_l: 9.863349490625591e-03,
        },
        RefCase {
            seq: &[X, H, Z],
            schedule: Schedule { gap: 2, round_after_prep: false },
            p: 0.008,
            p_ps: 6.919488893599873e-01,
            delta_l: 1.777582977477019e-03,
        },
    ]
}

fn run_exact(case: &RefCase, options: RunOptions) -> (f64, f64) {
    let (basis, expected) = code::true_output(case.seq);
    let out = densmat::run_encoded(case.seq, case.schedule, basis, case.p, options)
        .expect("reference cases survive post-selection");
    (out.p_ps, out.logical_error(expected))
}

#[test]
fn exact_engine_reproduces_reference_values() {
    for case in reference_cases() {
        let (p_ps, delta_l) = run_exact(&case, RunOptions::default());
        assert!(
            (p_ps - case.p_ps).abs() < REPRODUCIBILITY_TOL,
            "{:?}: p_ps {p_ps:.16e} vs reference {:.16e}",
            case.seq,
            case.p_ps
        );
        assert!(
            (delta_l - case.delta_l).abs() < REPRODUCIBILITY_TOL,
            "{:?}: delta_L {delta_l:.16e} vs reference {:.16e}",
            case.seq,
            case.delta_l
        );
    }
}

#[test]
fn per_round_merging_is_exact_on_reference_cases() {
    let exhaustive = RunOptions { merge: MergeMode::Exhaustive, final_parity_check: true };
    for case in reference_cases() {
        let (merged_ps, merged_delta) = run_exact(&case, RunOptions::default());
        let (full_ps, full_delta) = run_exact(&case, exhaustive);
        assert!((merged_ps - full_ps).abs() < 1e-12, "{:?}", case.seq);
        assert!((merged_delta - full_delta).abs() < 1e-12, "{:?}", case.seq);
    }
}

#[test]
fn noiseless_runs_accept_and_decode_exactly() {
    for seq in [&[X, Z][..], &[H][..], &[X, H, Z, X][..]] {
        let (basis, expected) = code::true_output(seq);
        let schedule = Schedule { gap: 1, round_after_prep: true };
        let out = densmat::run_encoded(seq, schedule, basis, 0.0, RunOptions::default())
            .expect("noiseless runs always accept");
        assert!((out.p_ps - 1.0).abs() < 1e-12, "{seq:?}");
        assert!(out.logical_error(expected) < 1e-12, "{seq:?}");
    }
}

#[test]
fn survival_falls_and_error_rises_with_noise() {
    let seq = [X];
    let (basis, expected) = code::true_output(&seq);
    let mut last_ps = f64::INFINITY;
    let mut last_delta = -1.0;
    for p in [0.0, 0.001, 0.01, 0.05] {
        let out = densmat::run_encoded(&seq, Schedule::every(1), basis, p, RunOptions::default())
            .expect("survives at these rates");
        let delta = out.logical_error(expected);
        assert!(out.p_ps < last_ps, "survival must fall: {p}");
        assert!(delta > last_delta || (p == 0.0 && delta == 0.0), "error must rise: {p}");
        last_ps = out.p_ps;
        last_delta = delta;
    }
}

#[test]
fn tableau_estimates_match_the_exact_engine() {
    let n: u64 = 100_000;
    for (i, case) in reference_cases().iter().enumerate() {
        let (basis, expected) = code::true_output(case.seq);
        let circuit = code::assemble_encoded_circuit(case.seq, case.schedule, basis).unwrap();
        let base = seeds::trajectory_base(42, case.seq.len() as u32, case.schedule.gap as u32, i as u32, 0);
        let est = stab::estimate(&circuit, case.p, true, &base, n);

        let sigma_ps = (case.p_ps * (1.0 - case.p_ps) / n as f64).sqrt();
        assert!(
            (est.p_ps() - case.p_ps).abs() < 4.0 * sigma_ps + 2.0 / n as f64,
            "case {i}: p_ps {:.5} vs exact {:.5}",
            est.p_ps(),
            case.p_ps
        );

        let n_acc = est.n_accepted as f64;
        let sigma_d = (case.delta_l * (1.0 - case.delta_l) / n_acc).sqrt();
        assert!(
            (est.logical_error(expected) - case.delta_l).abs() < 4.0 * sigma_d + 2.0 / n_acc,
            "case {i}: delta {:.6} vs exact {:.6}",
            est.logical_error(expected),
            case.delta_l
        );
    }
}

#[test]
fn lockstep_checked_estimate_agrees_with_exact() {
    let case = &reference_cases()[0];
    let (basis, _) = code::true_output(case.seq);
    let circuit = code::assemble_encoded_circuit(case.seq, case.schedule, basis).unwrap();
    let base = seeds::trajectory_base(7, 1, 1, 0, 0);
    let n: u64 = 50_000;
    let est = stab::estimate_checked(&circuit, case.p, true, &base, n)
        .expect("lockstep self-check must hold");
    let sigma = (case.p_ps * (1.0 - case.p_ps) / n as f64).sqrt();
    assert!((est.p_ps() - case.p_ps).abs() < 4.0 * sigma + 2.0 / n as f64);
}

#[test]
fn monte_carlo_sweep_is_deterministic_and_sane() {
    let mut cfg = ExperimentConfig::new(vec![1], vec![1]);
    cfg.engine = Engine::Stab;
    cfg.seed = 11;
    cfg.n_circuits = 4;
    cfg.n_trajectories = 2_000;
    cfg.p_grid = Some(vec![0.004, 0.02]);
    let one = experiment::run_sweep(&cfg).unwrap();
    let two = experiment::run_sweep(&cfg).unwrap();
    assert_eq!(one.points, two.points);
    for pt in &one.points {
        assert!(pt.mean_p_ps > 0.0 && pt.mean_p_ps < 1.0);
        assert!(pt.weighted_delta >= pt.mean_delta_l);
        assert!(pt.mean_delta_s > 0.0);
    }
}

#[test]
fn analytic_threshold_bisection_matches_fine_grid() {
    for (t, m) in [(3usize, 0usize), (40, 3)] {
        let mut last_win = 0.0;
        let mut p = 1e-6;
        while p <= sitecount::DEFAULT_P_MAX && sitecount::wins_at(t, m, p) {
            last_win = p;
            p += 1e-6;
        }
        let fast = sitecount::sitecount_threshold(t, m);
        assert!(
            (fast - last_win).abs() < 2e-6,
            "(T={t}, M={m}): bisection {fast} vs grid {last_win}"
        );
    }
}
