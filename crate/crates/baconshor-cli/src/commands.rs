//! Subcommand implementations: run the requested computation and write the
//! output tables next to a manifest describing the run.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use baconshor::checks::{self, CheckOptions};
use baconshor::exec;
use baconshor::experiment::{self, FitStatus, SweepResult, WEIGHTED_FIT_CAP};
use baconshor::sitecount;

use crate::config::{CliError, RunConfig};
use crate::manifest;

/// Format a float for the CSV outputs: full round-trip precision, with NaN
/// spelled out so the tables stay parseable.
fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

pub fn cmd_sweep(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let raw = RunConfig::load(config_path)?;
    let cfg = raw.to_experiment()?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();

    let result = exec::with_pool(raw.workers, || experiment::run_sweep(&cfg))
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut sweep_csv = String::from(
        "depth,gap,p,mean_delta_L,mean_p_ps,mean_delta_s,weighted_delta,n_circuits,engine,seed\n",
    );
    for pt in &result.points {
        let _ = writeln!(
            sweep_csv,
            "{},{},{},{},{},{},{},{},{},{}",
            pt.depth,
            pt.gap,
            fmt_f64(pt.p),
            fmt_f64(pt.mean_delta_l),
            fmt_f64(pt.mean_p_ps),
            fmt_f64(pt.mean_delta_s),
            fmt_f64(pt.weighted_delta),
            pt.n_circuits,
            cfg.engine,
            cfg.seed,
        );
    }
    write_file(out_dir, "sweep.csv", &sweep_csv)?;

    let mut thresholds_csv =
        String::from("depth,gap,threshold,q2,q1,q0,l1,l0,residual_q,residual_l,status\n");
    for fit in &result.fits {
        let _ = writeln!(
            thresholds_csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fit.depth,
            fit.gap,
            fmt_f64(fit.threshold),
            fmt_f64(fit.q2),
            fmt_f64(fit.q1),
            fmt_f64(fit.q0),
            fmt_f64(fit.l1),
            fmt_f64(fit.l0),
            fmt_f64(fit.residual_q),
            fmt_f64(fit.residual_l),
            fit.status,
        );
    }
    write_file(out_dir, "thresholds.csv", &thresholds_csv)?;

    report_fit_quality(&result);

    manifest::write_manifest(
        out_dir,
        "sweep",
        &raw,
        started.elapsed().as_secs_f64(),
        &["sweep.csv", "thresholds.csv"],
    )
}

/// Flag noisy fits on stderr.  A quadratic whose RMS residual exceeds 10% of
/// the scale of its supporting points usually means the point budget was too
/// small for the noise level; the fit is still reported as-is.
fn report_fit_quality(result: &SweepResult) {
    for fit in &result.fits {
        if fit.status != FitStatus::Ok {
            continue;
        }
        let scale = result
            .points
            .iter()
            .filter(|pt| {
                pt.depth == fit.depth
                    && pt.gap == fit.gap
                    && pt.weighted_delta.is_finite()
                    && pt.weighted_delta <= WEIGHTED_FIT_CAP
            })
            .map(|pt| pt.weighted_delta.abs())
            .fold(0.0_f64, f64::max);
        if scale > 0.0 && fit.residual_q > 0.1 * scale {
            eprintln!(
                "note: depth {} gap {}: quadratic fit residual {:.2e} exceeds 10% of \
                 the curve scale {:.2e}; consider more circuits or trajectories",
                fit.depth, fit.gap, fit.residual_q, scale
            );
        }
    }
}

pub fn cmd_sitecount(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let raw = RunConfig::load(config_path)?;
    raw.check_sitecount()?;
    let depths = raw.require_depths()?.to_vec();
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();

    let mut table_csv = String::from("T,M,gap,threshold,ps_at_threshold,validity\n");
    let mut optimal_csv = String::from("T,gap,M,threshold\n");
    for &t in &depths {
        for gap in (1..=t).filter(|g| t % g == 0) {
            let m = t / gap - 1;
            let threshold = sitecount::sitecount_threshold_scanning(t, m, raw.p_max);
            let ps = sitecount::ps_bound(t, m, threshold);
            let validity = if sitecount::bounds_valid_at(t, m, threshold) {
                "ok"
            } else {
                "clamped"
            };
            let _ = writeln!(
                table_csv,
                "{t},{m},{gap},{},{},{validity}",
                fmt_f64(threshold),
                fmt_f64(ps),
            );
        }
        let best = sitecount::optimal_gap_scanning(t, raw.p_max);
        let _ = writeln!(
            optimal_csv,
            "{t},{},{},{}",
            best.gap,
            best.m,
            fmt_f64(best.threshold),
        );
    }
    write_file(out_dir, "sitecount.csv", &table_csv)?;
    write_file(out_dir, "optimal_gaps.csv", &optimal_csv)?;

    manifest::write_manifest(
        out_dir,
        "sitecount",
        &raw,
        started.elapsed().as_secs_f64(),
        &["sitecount.csv", "optimal_gaps.csv"],
    )
}

pub fn cmd_validate(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let raw = RunConfig::load(config_path)?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();

    let opts = CheckOptions {
        seed: raw.seed,
        cross_check_configs: raw.cross_check_configs,
        cross_check_trajectories: raw.cross_check_trajectories,
    };
    let reports = exec::with_pool(raw.workers, || checks::run_all_checks(&opts));
    let passed = checks::all_passed(&reports);
    let first_failure = reports.iter().find(|r| !r.passed);

    let summary = serde_json::json!({
        "passed": passed,
        "first_failure": first_failure.map(|r| r.name),
        "checks": reports
            .iter()
            .map(|r| serde_json::json!({
                "name": r.name,
                "passed": r.passed,
                "details": r.details,
            }))
            .collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_file(out_dir, "validate.json", &text)?;

    manifest::write_manifest(
        out_dir,
        "validate",
        &raw,
        started.elapsed().as_secs_f64(),
        &["validate.json"],
    )?;

    match first_failure {
        None => Ok(()),
        Some(first) => Err(CliError::Failure(format!(
            "check \"{}\" failed: {}",
            first.name, first.details
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_and_nan_is_spelled_out() {
        assert_eq!(fmt_f64(f64::NAN), "nan");
        let v = 5.5555489098746361e-3;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}
