//! Run manifest: version, timing, configuration echo, the statistical
//! conventions the outputs were produced under, and sha256 digests of every
//! produced file.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{CliError, RunConfig};

fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

pub fn write_manifest(
    out_dir: &Path,
    command: &str,
    config: &RunConfig,
    elapsed_seconds: f64,
    outputs: &[&str],
) -> Result<(), CliError> {
    let mut digests = BTreeMap::new();
    for name in outputs {
        digests.insert((*name).to_string(), sha256_hex(&out_dir.join(name))?);
    }
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "created_utc": Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        "elapsed_seconds": elapsed_seconds,
        "seed": config.seed,
        "engine": config.engine,
        "schedule": {
            "round_after_prep": config.round_after_prep,
            "final_parity_check": config.final_parity_check,
        },
        "conventions": {
            "fit_intercepts": "free",
            "weighted_average": if config.mean_of_ratios { "mean-of-ratios" } else { "ratio-of-means" },
            "quadratic_fit_support": format!(
                "weighted error at most {}",
                baconshor::experiment::WEIGHTED_FIT_CAP
            ),
            "threshold_rule": "smallest-upward-crossing",
            "circuit_sampling": "keyed by (seed, depth, index); shared across gaps and noise rates",
        },
        "config": config,
        "outputs": digests,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(out_dir.join("manifest.json"), text)?;
    Ok(())
}
