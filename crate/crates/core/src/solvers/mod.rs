//! Heuristic Ising-machine detectors.
//!
//! * [`bpim`]: p-bit Gibbs sweeps on the binary model, `beta` ramped up.
//! * [`dpim`]: p-dit Gibbs sweeps where each symbol samples directly among all
//!   `M` alphabet points.
//! * [`oim`]: Kuramoto-type phase oscillators integrated with Heun's method,
//!   noise amplitude ramped down.
//!
//! Every solver runs `R` independent replicas from seeds derived off the
//! configured master seed and reports the lowest energy seen in any iteration
//! of any replica.

pub mod bpim;
pub mod dpim;
mod kernels;
pub mod oim;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{derive_seed, role};
use crate::error::{Error, Result};

pub use bpim::{bpim_solve, BpimChain};
pub use dpim::{dpim_solve, DpimChain};
pub use oim::{oim_solve, OimChain};

/// Default iteration count per replica.
pub const DEFAULT_ITERATIONS: usize = 100;
/// Default replica count.
pub const DEFAULT_REPLICAS: usize = 64;
/// OIM integration step.
pub const OIM_DT: f64 = 0.01;
/// OIM peak noise amplitude.
pub const OIM_T_MAX: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// Inverse temperature increasing towards `peak`.
    BetaRamp,
    /// Noise amplitude decreasing from `peak` to zero.
    TemperatureRamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampShape {
    Linear,
    /// Fixed at `peak` for every iteration (sampling at fixed temperature).
    Constant,
}

/// Annealing schedule over iterations `k = 1..=n_iterations`.
///
/// Linear beta ramp: `beta(k) = peak * k / N`. Linear temperature ramp:
/// `T(k) = peak * (1 - k / N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub kind: ScheduleKind,
    pub peak: f64,
    pub n_iterations: usize,
    pub shape: RampShape,
}

impl AnnealSchedule {
    pub fn beta_ramp(beta_max: f64, n_iterations: usize) -> Result<Self> {
        Self::checked(ScheduleKind::BetaRamp, beta_max, n_iterations, RampShape::Linear)
    }

    pub fn temperature_ramp(t_max: f64, n_iterations: usize) -> Result<Self> {
        Self::checked(ScheduleKind::TemperatureRamp, t_max, n_iterations, RampShape::Linear)
    }

    /// Fixed parameter value; zero is allowed.
    pub fn constant(kind: ScheduleKind, value: f64, n_iterations: usize) -> Result<Self> {
        Self::checked(kind, value, n_iterations, RampShape::Constant)
    }

    fn checked(kind: ScheduleKind, peak: f64, n_iterations: usize, shape: RampShape) -> Result<Self> {
        let ok_peak = match shape {
            RampShape::Linear => peak > 0.0 && peak.is_finite(),
            RampShape::Constant => peak >= 0.0 && peak.is_finite(),
        };
        if !ok_peak {
            return Err(Error::InvalidParameter(format!("schedule peak {peak}")));
        }
        if n_iterations == 0 {
            return Err(Error::InvalidParameter("schedule needs at least one iteration".into()));
        }
        Ok(Self {
            kind,
            peak,
            n_iterations,
            shape,
        })
    }

    /// Parameter value at iteration `k` (1-based).
    pub fn value(&self, k: usize) -> f64 {
        match self.shape {
            RampShape::Constant => self.peak,
            RampShape::Linear => {
                let frac = k as f64 / self.n_iterations as f64;
                match self.kind {
                    ScheduleKind::BetaRamp => self.peak * frac,
                    ScheduleKind::TemperatureRamp => self.peak * (1.0 - frac),
                }
            }
        }
    }
}

/// Oscillator constants: coupling `K`, binarization `S` and step `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OimParams {
    pub coupling: f64,
    pub binarization: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub replicas: usize,
    pub schedule: AnnealSchedule,
    pub seed: u64,
    pub oim: Option<OimParams>,
    /// Visit units in a fresh random order each sweep instead of index order.
    #[serde(default)]
    pub random_scan: bool,
    /// Run replicas on the rayon pool. Results do not depend on this flag.
    #[serde(default)]
    pub parallel: bool,
}

impl SolverConfig {
    pub fn new(replicas: usize, schedule: AnnealSchedule, seed: u64) -> Result<Self> {
        if replicas == 0 {
            return Err(Error::InvalidParameter("replica count must be at least 1".into()));
        }
        Ok(Self {
            replicas,
            schedule,
            seed,
            oim: None,
            random_scan: false,
            parallel: false,
        })
    }

    pub fn with_oim(mut self, params: OimParams) -> Self {
        self.oim = Some(params);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::InvalidParameter("replica count must be at least 1".into()));
        }
        if let Some(p) = self.oim {
            if !(p.dt > 0.0) {
                return Err(Error::InvalidParameter(format!("time step {}", p.dt)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Paradigm {
    Bpim,
    Dpim,
    Oim,
}

/// Parameter scaling laws for `N x N` instances with `M`-ary symbols.
///
/// | paradigm | parameter | value |
/// |---|---|---|
/// | bPIM, BPSK | `beta_max` | `sqrt(3) N^(-2/3)` |
/// | bPIM, M-QAM | `beta_max` | `13 / (N sqrt(M))` |
/// | dPIM | `beta_max` | `sqrt(2) N^(-4/5)` |
/// | OIM, BPSK | `K`, `S`, `T_max` | `3.5 N^(-2/3)`, `1.3 N^(-2/3)`, `30` |
///
/// Replicas default to 64 and iterations to 100; the returned seed is 0.
pub fn default_parameters(paradigm: Paradigm, n: usize, order: usize) -> Result<SolverConfig> {
    crate::constellation::Constellation::new(order)?;
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let nf = n as f64;
    let iters = DEFAULT_ITERATIONS;
    let cfg = match paradigm {
        Paradigm::Bpim => {
            let beta = if order == 2 {
                3f64.sqrt() * nf.powf(-2.0 / 3.0)
            } else {
                13.0 / (nf * (order as f64).sqrt())
            };
            SolverConfig::new(DEFAULT_REPLICAS, AnnealSchedule::beta_ramp(beta, iters)?, 0)?
        }
        Paradigm::Dpim => {
            let beta = 2f64.sqrt() * nf.powf(-0.8);
            SolverConfig::new(DEFAULT_REPLICAS, AnnealSchedule::beta_ramp(beta, iters)?, 0)?
        }
        Paradigm::Oim => {
            if order != 2 {
                return Err(Error::Unsupported(format!(
                    "oscillator machine is only configured for BPSK, not {order}-QAM"
                )));
            }
            let scale = nf.powf(-2.0 / 3.0);
            SolverConfig::new(DEFAULT_REPLICAS, AnnealSchedule::temperature_ramp(OIM_T_MAX, iters)?, 0)?.with_oim(
                OimParams {
                    coupling: 3.5 * scale,
                    binarization: 1.3 * scale,
                    dt: OIM_DT,
                },
            )
        }
    };
    Ok(cfg)
}

/// Result of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaResult<S> {
    pub best_state: S,
    pub best_energy: f64,
    /// Iteration (0 = initial state) at which the best state was reached.
    pub best_iteration: usize,
    pub final_energy: f64,
}

/// Best-of-replicas outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<S> {
    pub best_state: S,
    pub best_energy: f64,
    pub replica_final_energies: Vec<f64>,
    pub best_replica: usize,
    pub best_iteration: usize,
    pub iterations: usize,
}

/// Seed of replica `index` under master seed `seed`.
pub fn replica_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, &[role::REPLICA, index as u64])
}

/// Runs `replicas` independent copies of `kernel` and keeps the lowest
/// best-energy (ties go to the lowest replica index).
pub fn run_replicated<S, F>(replicas: usize, seed: u64, parallel: bool, iterations: usize, kernel: F) -> SolveOutcome<S>
where
    S: Send,
    F: Fn(u64) -> ReplicaResult<S> + Sync,
{
    assert!(replicas >= 1, "at least one replica");
    let results: Vec<ReplicaResult<S>> = if parallel {
        (0..replicas)
            .into_par_iter()
            .map(|r| kernel(replica_seed(seed, r)))
            .collect()
    } else {
        (0..replicas).map(|r| kernel(replica_seed(seed, r))).collect()
    };
    let mut best = 0;
    for (r, res) in results.iter().enumerate() {
        if res.best_energy < results[best].best_energy {
            best = r;
        }
    }
    let replica_final_energies = results.iter().map(|r| r.final_energy).collect();
    let winner = results.into_iter().nth(best).expect("non-empty");
    SolveOutcome {
        best_state: winner.best_state,
        best_energy: winner.best_energy,
        replica_final_energies,
        best_replica: best,
        best_iteration: winner.best_iteration,
        iterations,
    }
}

/// Visiting order for one sweep.
pub(crate) fn sweep_order<R: rand::Rng>(n: usize, random_scan: bool, rng: &mut R, buf: &mut Vec<usize>) {
    buf.clear();
    buf.extend(0..n);
    if random_scan {
        use rand::seq::SliceRandom;
        buf.shuffle(rng);
    }
}
