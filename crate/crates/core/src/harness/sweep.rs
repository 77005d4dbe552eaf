//! Monte-Carlo BER sweep over an [`ExperimentPlan`].
//!
//! Work is split per (channel, message); each task loops over Eb/N0 and
//! detectors and returns integer error counts, so the aggregate does not depend
//! on scheduling or thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::ExperimentPlan;
use super::stats::ber_upper_bound;
use crate::channel::{derive_seed, role, InstanceSeeds, MimoInstance};
use crate::constellation::Constellation;
use crate::detection::{detect, DetectionResult, Detector};
use crate::error::{Error, Result};

/// Aggregated errors of one detector at one Eb/N0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub detector: Detector,
    pub n: usize,
    pub order: usize,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Zero-error 95% bound `-ln(0.05) / bits`; only meaningful when `errors == 0`.
    pub ber_upper_95: f64,
    /// Replicas and iterations per solve (0 for non-iterative detectors).
    pub replicas: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Messages on which the detector returned an error; their bits count as wrong.
    #[serde(default)]
    pub failures: u64,
}

/// Sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    /// Ordered by detector (plan order), then Eb/N0 (plan order).
    pub points: Vec<BerPoint>,
    /// Solves where some detector beat the exact ML residual (should be 0).
    pub ml_violations: u64,
}

impl SweepOutput {
    pub fn point(&self, detector: Detector, ebn0_db: f64) -> Option<&BerPoint> {
        self.points
            .iter()
            .find(|p| p.detector == detector && p.ebn0_db == ebn0_db)
    }
}

#[derive(Clone)]
struct Tally {
    errors: Vec<u64>,
    failures: Vec<u64>,
    ml_violations: u64,
}

impl Tally {
    fn zeros(len: usize) -> Self {
        Self {
            errors: vec![0; len],
            failures: vec![0; len],
            ml_violations: 0,
        }
    }

    fn add(mut self, other: Tally) -> Tally {
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
        for (a, b) in self.failures.iter_mut().zip(&other.failures) {
            *a += b;
        }
        self.ml_violations += other.ml_violations;
        self
    }
}

/// Seed of a stochastic detector run.
pub fn solver_seed(master: u64, channel: usize, message: usize, ebn0_index: usize, detector: Detector) -> u64 {
    derive_seed(
        master,
        &[
            role::SOLVER,
            channel as u64,
            message as u64,
            ebn0_index as u64,
            detector as u64,
        ],
    )
}

fn hamming(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

fn run_message(plan: &ExperimentPlan, con: &Constellation, channel: usize, message: usize) -> Tally {
    let n_det = plan.detectors.len();
    let mut tally = Tally::zeros(n_det * plan.ebn0_db.len());
    let seeds = InstanceSeeds::derive(plan.seed, channel as u64, message as u64);
    for (e, &ebn0) in plan.ebn0_db.iter().enumerate() {
        let inst = if plan.noiseless {
            MimoInstance::with_sigma_sq(con, plan.n, plan.n, ebn0, 0.0, seeds)
        } else {
            MimoInstance::generate(con, plan.n, plan.n, ebn0, seeds)
        }
        .expect("validated plan yields valid instances");
        let mut results: Vec<Option<DetectionResult>> = Vec::with_capacity(n_det);
        for (d, &det) in plan.detectors.iter().enumerate() {
            let slot = d * plan.ebn0_db.len() + e;
            let seed = solver_seed(plan.seed, channel, message, e, det);
            match detect(&inst, con, det, &plan.options, seed) {
                Ok(r) => {
                    tally.errors[slot] += hamming(&r.bits, &inst.tx_bits);
                    results.push(Some(r));
                }
                Err(err) => {
                    eprintln!(
                        "warning: {det} failed on channel {channel} message {message} at {ebn0} dB: {err}; \
                         counting {} bit errors",
                        plan.bits_per_message
                    );
                    tally.errors[slot] += plan.bits_per_message as u64;
                    tally.failures[slot] += 1;
                    results.push(None);
                }
            }
        }
        if let Some(Some(ml)) = plan
            .detectors
            .iter()
            .position(|&d| d == Detector::Ml)
            .map(|i| &results[i])
        {
            let tol = 1e-9 * ml.residual_energy.max(1.0);
            tally.ml_violations += results
                .iter()
                .flatten()
                .filter(|r| r.residual_energy < ml.residual_energy - tol)
                .count() as u64;
        }
    }
    tally
}

/// Runs the plan on the current rayon pool.
pub fn run_ber_sweep(plan: &ExperimentPlan) -> Result<SweepOutput> {
    plan.validate()?;
    let con = Constellation::new(plan.order)?;
    let len = plan.detectors.len() * plan.ebn0_db.len();
    let per_channel = plan.messages_per_channel;
    let tally = (0..plan.n_messages())
        .into_par_iter()
        .map(|k| run_message(plan, &con, k / per_channel, k % per_channel))
        .reduce(|| Tally::zeros(len), Tally::add);

    let bits = plan.n_messages() as u64 * plan.bits_per_message as u64;
    let mut points = Vec::with_capacity(len);
    for (d, &det) in plan.detectors.iter().enumerate() {
        let (replicas, iterations) = match det.paradigm() {
            Some(p) => {
                let cfg = plan.options.solver_config(p, plan.n, plan.order, plan.seed)?;
                (cfg.replicas, cfg.schedule.n_iterations)
            }
            None => (0, 0),
        };
        for (e, &ebn0) in plan.ebn0_db.iter().enumerate() {
            let slot = d * plan.ebn0_db.len() + e;
            let errors = tally.errors[slot];
            points.push(BerPoint {
                detector: det,
                n: plan.n,
                order: plan.order,
                ebn0_db: ebn0,
                bits,
                errors,
                ber: errors as f64 / bits as f64,
                ber_upper_95: ber_upper_bound(bits, 0.95),
                replicas,
                iterations,
                seed: plan.seed,
                failures: tally.failures[slot],
            });
        }
    }
    Ok(SweepOutput {
        points,
        ml_violations: tally.ml_violations,
    })
}

/// Runs the plan on a dedicated pool of `threads` workers (0 = rayon default).
pub fn run_ber_sweep_with_threads(plan: &ExperimentPlan, threads: usize) -> Result<SweepOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_ber_sweep(plan))
}
