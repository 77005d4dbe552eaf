//! Experiment planning: how many channels and messages make up a BER point.

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::detection::{Detector, DetectorOptions};
use crate::error::{Error, Result};

/// Bits per BER point in the reference experiments.
pub const REFERENCE_TOTAL_BITS: u64 = 86016;
/// Messages sent over every channel realization.
pub const MESSAGES_PER_CHANNEL: usize = 14;

/// A fully specified, seed-reproducible BER experiment on an `N x N` system.
///
/// Every BER point sends `n_channels * messages_per_channel` messages of
/// `bits_per_message = N log2 M` bits. The same channels, messages and unit
/// noise draws are reused at every Eb/N0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n: usize,
    pub order: usize,
    pub ebn0_db: Vec<f64>,
    pub n_channels: usize,
    pub messages_per_channel: usize,
    pub bits_per_message: usize,
    pub total_bits: u64,
    pub detectors: Vec<Detector>,
    #[serde(default)]
    pub options: DetectorOptions,
    pub seed: u64,
    /// Force `sigma^2 = 0` regardless of Eb/N0.
    #[serde(default)]
    pub noiseless: bool,
}

/// Splits `total_bits` into channels x 14 messages x `N log2 M` bits.
///
/// The detector set defaults to MMSE plus the natural heuristic for the
/// modulation (bPIM for BPSK, dPIM otherwise).
pub fn plan_experiment(n: usize, order: usize, ebn0_db: &[f64], total_bits: u64, seed: u64) -> Result<ExperimentPlan> {
    let con = Constellation::new(order)?;
    if n == 0 {
        return Err(Error::Plan("N must be at least 1".into()));
    }
    if ebn0_db.is_empty() {
        return Err(Error::Plan("at least one Eb/N0 value is required".into()));
    }
    if let Some(bad) = ebn0_db.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(*bad));
    }
    let bits_per_message = n * con.bits_per_symbol();
    let granule = (bits_per_message * MESSAGES_PER_CHANNEL) as u64;
    if total_bits == 0 || !total_bits.is_multiple_of(granule) {
        let below = total_bits / granule * granule;
        let above = below + granule;
        let hint = if below == 0 {
            format!("{above}")
        } else {
            format!("{below} or {above}")
        };
        return Err(Error::Plan(format!(
            "{total_bits} bits cannot be split into channels x {MESSAGES_PER_CHANNEL} messages x {bits_per_message} bits; \
             nearest valid totals: {hint}"
        )));
    }
    let default_heuristic = if order == 2 { Detector::Bpim } else { Detector::Dpim };
    let plan = ExperimentPlan {
        n,
        order,
        ebn0_db: ebn0_db.to_vec(),
        n_channels: (total_bits / granule) as usize,
        messages_per_channel: MESSAGES_PER_CHANNEL,
        bits_per_message,
        total_bits,
        detectors: vec![Detector::Mmse, default_heuristic],
        options: DetectorOptions::default(),
        seed,
        noiseless: false,
    };
    plan.validate()?;
    Ok(plan)
}

impl ExperimentPlan {
    /// Replaces the detector set (duplicates are dropped, order kept).
    pub fn with_detectors(mut self, detectors: &[Detector]) -> Result<Self> {
        let mut set = Vec::new();
        for &d in detectors {
            if !set.contains(&d) {
                set.push(d);
            }
        }
        self.detectors = set;
        self.validate()?;
        Ok(self)
    }

    pub fn with_options(mut self, options: DetectorOptions) -> Result<Self> {
        self.options = options;
        self.validate()?;
        Ok(self)
    }

    pub fn n_messages(&self) -> usize {
        self.n_channels * self.messages_per_channel
    }

    /// Checks the bookkeeping identity and detector compatibility.
    pub fn validate(&self) -> Result<()> {
        let con = Constellation::new(self.order)?;
        if self.n == 0 || self.bits_per_message != self.n * con.bits_per_symbol() {
            return Err(Error::Plan(format!(
                "bits_per_message {} does not equal N log2 M = {}",
                self.bits_per_message,
                self.n * con.bits_per_symbol()
            )));
        }
        let product = self.n_channels as u64 * self.messages_per_channel as u64 * self.bits_per_message as u64;
        if product != self.total_bits || self.total_bits == 0 {
            return Err(Error::Plan(format!(
                "total_bits {} != {} channels x {} messages x {} bits",
                self.total_bits, self.n_channels, self.messages_per_channel, self.bits_per_message
            )));
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::Plan("Eb/N0 list must be non-empty and finite".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Plan("no detectors selected".into()));
        }
        for d in &self.detectors {
            if !d.supports(self.order) {
                return Err(Error::Unsupported(format!(
                    "{d} does not support {}-ary symbols",
                    self.order
                )));
            }
            if let Some(p) = d.paradigm() {
                self.options.solver_config(p, self.n, self.order, 0)?;
            }
        }
        if self.detectors.contains(&Detector::Ml) {
            let log_space = self.n as f64 * con.bits_per_symbol() as f64;
            if log_space > (self.options.ml_budget as f64).log2() + 1e-9 {
                return Err(Error::SearchBudget {
                    order: self.order,
                    n: self.n,
                    budget: self.options.ml_budget,
                });
            }
        }
        Ok(())
    }
}
