//! Experiment-plan files (TOML) mirroring the command-line flags.
//!
//! ```toml
//! n = [8, 16]            # or a single integer
//! mod = "4qam"           # or a list: ["bpsk", "16qam"]
//! ebn0 = [6.0, 9.0, 12.0]
//! bits = 100352
//! detectors = ["mmse", "ml", "dpim"]
//! replicas = 64
//! iters = 100
//! seed = 1
//! out = "results"
//! threads = 4
//! beta-grid = [0.05, 0.1, 0.2]
//! ```
//!
//! Every key is optional; command-line values take precedence.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::detection::Detector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PlanFile {
    pub n: Option<OneOrMany<usize>>,
    #[serde(rename = "mod")]
    pub modulation: Option<OneOrMany<String>>,
    pub ebn0: Option<Vec<f64>>,
    pub bits: Option<u64>,
    pub detectors: Option<Vec<String>>,
    pub replicas: Option<usize>,
    pub iters: Option<usize>,
    pub beta_max: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub beta_grid: Option<Vec<f64>>,
    pub noiseless: Option<bool>,
    pub ml_budget: Option<u64>,
}

impl PlanFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("plan file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Modulation order from `bpsk`, `qpsk`, `4qam`, `16-qam`, `qam64`, `256`, ...
pub fn parse_modulation(s: &str) -> Result<usize> {
    let t = s.trim().to_ascii_lowercase();
    let order = match t.as_str() {
        "bpsk" => 2,
        "qpsk" => 4,
        _ => {
            let digits = t.trim_start_matches("qam").trim_end_matches("qam").trim_matches('-');
            digits
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("unknown modulation '{s}'")))?
        }
    };
    crate::Constellation::new(order)?;
    Ok(order)
}

/// Comma-separated values.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| Error::Parse(format!("'{t}': {e}"))))
        .collect()
}

pub fn parse_detectors(names: &[String]) -> Result<Vec<Detector>> {
    names.iter().map(|n| n.parse()).collect()
}

/// Either a comma list of values or `lo:hi:count` (log-spaced).
pub fn parse_beta_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, count] => {
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("grid start '{lo}'")))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("grid end '{hi}'")))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("grid count '{count}'")))?;
            if !(lo > 0.0 && hi > lo && count >= 2) {
                return Err(Error::Parse(format!("grid '{s}' needs 0 < lo < hi and count >= 2")));
            }
            super::beta::log_grid(lo, hi, count)
        }
        [_] => parse_list(s)?,
        _ => return Err(Error::Parse(format!("beta grid '{s}'"))),
    };
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulation_names() {
        for (s, m) in [
            ("bpsk", 2),
            ("QPSK", 4),
            ("4qam", 4),
            ("16-qam", 16),
            ("qam64", 64),
            ("256", 256),
            ("2", 2),
        ] {
            assert_eq!(parse_modulation(s).unwrap(), m, "{s}");
        }
        assert!(parse_modulation("8psk").is_err());
        assert!(parse_modulation("8").is_err());
    }

    #[test]
    fn plan_file_parses() {
        let f = PlanFile::parse(
            "n = 16\nmod = [\"bpsk\", \"4qam\"]\nebn0 = [4.0, 8]\ndetectors = [\"ml\"]\nbeta-grid = [0.1]\nseed = 18446744073709551615\n",
        )
        .unwrap();
        assert_eq!(f.n.unwrap().to_vec(), vec![16]);
        assert_eq!(f.modulation.unwrap().to_vec(), vec!["bpsk", "4qam"]);
        assert_eq!(f.ebn0.unwrap(), vec![4.0, 8.0]);
        assert_eq!(f.seed, Some(u64::MAX));
        assert!(PlanFile::parse("unknown = 1").is_err());
    }

    #[test]
    fn grids_and_lists() {
        assert_eq!(parse_list::<f64>("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_list::<usize>("1,x").is_err());
        let g = parse_beta_grid("0.01:1:3").unwrap();
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert_eq!(parse_beta_grid("0.2,0.4").unwrap(), vec![0.2, 0.4]);
        assert!(parse_beta_grid("1:0.5:3").is_err());
    }
}
