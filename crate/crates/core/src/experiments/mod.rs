//! Scripted, reproducible runs with CSV/JSON artifacts.
//!
//! Every run is a pure function of its parameter record. Artifacts land in
//! `<outdir>/<experiment>/<params-hash>/{data.csv, manifest.json}`, where the
//! hash is taken over the canonical JSON of the parameters.

mod runs;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::CouplingProfile;
use crate::series::ObservableSeries;

pub use runs::{
    run_concurrence_timing, run_delta_heatmap, run_gaussian_heatmap, run_open_chain_concurrence,
    run_truncation_scan, ConcurrenceTimingParams, DeltaHeatmapParams, GaussianHeatmapParams,
    OpenChainParams, TruncationScanParams,
};
pub use spec::{simulate, Dynamics, ExperimentSpec, InitialState, Observable, TimeGrid};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One pass/fail comparison of a measured value against its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub measured: f64,
    pub pass: bool,
}

/// Short human-readable number: six significant figures, scientific below 1e-3.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-3 || x.abs() >= 1e6 {
        format!("{x:.3e}")
    } else {
        let s = format!("{x:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Check {
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            expected: format!(">= {}", num(bound)),
            measured,
            pass: measured >= bound,
        }
    }

    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            expected: format!("< {}", num(bound)),
            measured,
            pass: measured < bound,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            expected: format!("<= {}", num(bound)),
            measured,
            pass: measured <= bound,
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected: format!("{} ± {}", num(target), num(tolerance)),
            measured,
            pass: (measured - target).abs() <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {} (expected {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            num(self.measured),
            self.expected
        )
    }
}

/// Output of one run: the table, the parameters that produced it, and the
/// checks evaluated on it.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub spec: Value,
    pub profiles: Vec<CouplingProfile>,
    pub data: ObservableSeries,
    pub extra: Vec<(String, ObservableSeries)>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: Value,
    pub profile: Vec<CouplingProfile>,
    pub tool_version: String,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn params_hash(&self) -> String {
        params_hash(&self.spec)
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            spec: self.spec.clone(),
            profile: self.profiles.clone(),
            tool_version: TOOL_VERSION.to_string(),
            checks: self.checks.clone(),
        }
    }

    /// Writes `data.csv` (or `data.json`), any extra tables, and
    /// `manifest.json`; returns the run directory.
    pub fn write(&self, outdir: &Path, format: OutputFormat) -> Result<PathBuf> {
        let dir = outdir.join(&self.name).join(self.params_hash());
        fs::create_dir_all(&dir)?;
        let tables = std::iter::once(("data".to_string(), &self.data))
            .chain(self.extra.iter().map(|(n, s)| (format!("data-{n}"), s)));
        for (stem, table) in tables {
            match format {
                OutputFormat::Csv => fs::write(dir.join(format!("{stem}.csv")), table.to_csv_string())?,
                OutputFormat::Json => fs::write(
                    dir.join(format!("{stem}.json")),
                    serde_json::to_string_pretty(&table.to_json())?,
                )?,
            }
        }
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest())?,
        )?;
        Ok(dir)
    }
}

/// First 16 hex digits of the SHA-256 of the canonical parameter JSON.
pub fn params_hash(spec: &Value) -> String {
    let canonical = serde_json::to_string(spec).expect("json values always serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(digest)[..16].to_string()
}

/// Bounded worker pool; `0` means one worker per available core.
pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_lines() {
        let c = Check::at_least("A_max(r0=90)", 0.995, 0.99);
        assert!(c.pass);
        assert!(c.line().starts_with("PASS A_max(r0=90)"));
        assert!(!Check::within("x", 0.6, 0.5, 0.03).pass);
        assert!(Check::below("y", 0.01, 0.05).pass);
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(2.5e-9), "2.500e-9");
        assert_eq!(Check::within("z", 0.2, 0.2026423672846756, 0.02).expected, "0.202642 ± 0.02");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = serde_json::json!({"sites": 100, "r0": "full"});
        let b = serde_json::json!({"sites": 102, "r0": "full"});
        assert_eq!(params_hash(&a), params_hash(&a.clone()));
        assert_ne!(params_hash(&a), params_hash(&b));
        assert_eq!(params_hash(&a).len(), 16);
    }
}
