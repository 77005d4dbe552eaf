//! CSV output, run manifests and console summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::plan::ExperimentPlan;
use super::stats::ber_interval_95;
use super::sweep::{BerPoint, SweepOutput};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "detector,N,M,ebn0_db,bits,errors,ber,ber_upper_95,replicas,iterations,seed";

pub const SOFTWARE: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV row per point, in the given order. Floats use Rust's shortest
/// round-trip formatting, so identical results give identical bytes.
pub fn format_csv(points: &[BerPoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.detector,
            p.n,
            p.order,
            p.ebn0_db,
            p.bits,
            p.errors,
            p.ber,
            p.ber_upper_95,
            p.replicas,
            p.iterations,
            p.seed
        );
    }
    s
}

/// Everything needed to reproduce (and re-render) a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub plan: ExperimentPlan,
    /// CSV file name, relative to the manifest's directory.
    pub csv: String,
    pub points: Vec<BerPoint>,
    pub ml_violations: u64,
}

impl RunManifest {
    pub fn new(plan: &ExperimentPlan, output: &SweepOutput) -> Self {
        Self {
            software: SOFTWARE.into(),
            version: VERSION.into(),
            plan: plan.clone(),
            csv: format!("{}.csv", file_stem(plan)),
            points: output.points.clone(),
            ml_violations: output.ml_violations,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// `ber_n<N>_m<M>`.
pub fn file_stem(plan: &ExperimentPlan) -> String {
    format!("ber_n{}_m{}", plan.n, plan.order)
}

/// Creates `dir` if needed and checks that files can be created in it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(format!(".{SOFTWARE}-write-check-{}", std::process::id()));
    fs::write(&probe, b"").map_err(|e| Error::Io(format!("{} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.manifest.json` into `dir`.
pub fn write_run(dir: &Path, plan: &ExperimentPlan, output: &SweepOutput) -> Result<(PathBuf, PathBuf)> {
    let manifest = RunManifest::new(plan, output);
    let csv_path = dir.join(&manifest.csv);
    let manifest_path = dir.join(format!("{}.manifest.json", file_stem(plan)));
    fs::write(&csv_path, format_csv(&output.points))?;
    fs::write(&manifest_path, manifest.to_json())?;
    Ok((csv_path, manifest_path))
}

/// Human-readable table with 95% intervals.
pub fn summary_table(points: &[BerPoint]) -> String {
    let mut s = format!(
        "{:<6} {:>4} {:>4} {:>8} {:>10} {:>8} {:>11} {:>23}\n",
        "det", "N", "M", "Eb/N0", "bits", "errors", "BER", "95% interval"
    );
    for p in points {
        let (lo, hi) = ber_interval_95(p.errors, p.bits);
        let _ = writeln!(
            s,
            "{:<6} {:>4} {:>4} {:>8.2} {:>10} {:>8} {:>11.4e} [{:>9.3e}, {:>9.3e}]{}",
            p.detector.name(),
            p.n,
            p.order,
            p.ebn0_db,
            p.bits,
            p.errors,
            p.ber,
            lo,
            hi,
            if p.failures > 0 {
                format!("  ({} failed)", p.failures)
            } else {
                String::new()
            }
        );
    }
    s
}
