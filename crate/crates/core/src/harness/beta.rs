//! Annealing-parameter calibration: mean final energy versus `beta_max`, and
//! power-law fits of the optimal `beta_max` against system size.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{derive_seed, role, InstanceSeeds, MimoInstance};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::ising_map::{build_binary_model, build_pdit_model, BinaryIsingModel, PditModel, SpinEncoding};
use crate::solvers::bpim::bpim_replica;
use crate::solvers::dpim::dpim_replica;
use crate::solvers::{AnnealSchedule, Paradigm, SolverConfig, DEFAULT_ITERATIONS};

/// Inputs of [`beta_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSweepConfig {
    pub n: usize,
    pub order: usize,
    pub paradigm: Paradigm,
    /// Positive, strictly increasing.
    pub beta_grid: Vec<f64>,
    pub ebn0_db: Vec<f64>,
    pub instances_per_ebn0: usize,
    /// Independent single-replica runs per instance and grid point.
    pub trials: usize,
    pub iterations: usize,
    /// Random configurations used for the per-instance normalization.
    pub random_samples: usize,
    pub seed: u64,
}

impl BetaSweepConfig {
    /// Eb/N0 in {3, 6, 9} dB, 20 instances each, 100 trials, 100 iterations.
    pub fn new(n: usize, order: usize, paradigm: Paradigm, beta_grid: Vec<f64>, seed: u64) -> Self {
        Self {
            n,
            order,
            paradigm,
            beta_grid,
            ebn0_db: vec![3.0, 6.0, 9.0],
            instances_per_ebn0: 20,
            trials: 100,
            iterations: DEFAULT_ITERATIONS,
            random_samples: 1000,
            seed,
        }
    }
}

/// `count` points log-spaced over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Normalized mean final energy per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCurve {
    pub n: usize,
    pub order: usize,
    pub paradigm: Paradigm,
    pub betas: Vec<f64>,
    /// Mean over instances and trials of `E_final / <E_random>`, with `E` the
    /// residual `||y - Hx||^2` of the final state.
    pub mean_energy: Vec<f64>,
    /// Standard error of each mean.
    pub std_error: Vec<f64>,
    /// Index of the grid minimum.
    pub argmin: usize,
    /// Grid minimizer.
    pub beta_min: f64,
    /// Vertex of a least-squares parabola in `ln beta` around the minimum;
    /// equals `beta_min` at the grid edges.
    pub beta_refined: f64,
}

enum Problem {
    Binary(BinaryIsingModel),
    Pdit(PditModel, f64),
}

impl Problem {
    /// Residual of the final state of one replica.
    fn final_residual(&self, cfg: &SolverConfig, seed: u64) -> f64 {
        match self {
            Problem::Binary(m) => bpim_replica(m, cfg, seed).final_energy + m.offset(),
            Problem::Pdit(m, y2) => dpim_replica(m, cfg, seed).final_energy + y2,
        }
    }

    fn random_residual_mean(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total = 0.0;
        match self {
            Problem::Binary(m) => {
                let mut s = vec![0.0; m.n()];
                for _ in 0..samples {
                    for v in s.iter_mut() {
                        *v = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    }
                    total += m.residual(&s);
                }
            }
            Problem::Pdit(m, y2) => {
                let states = m.states();
                let mut d = vec![[0.0; 2]; m.n()];
                for _ in 0..samples {
                    for v in d.iter_mut() {
                        *v = states[rng.random_range(0..states.len())];
                    }
                    total += m.energy_trusted(&d) + y2;
                }
            }
        }
        total / samples as f64
    }
}

fn validate(cfg: &BetaSweepConfig) -> Result<()> {
    if cfg.paradigm == Paradigm::Oim {
        return Err(Error::Unsupported("beta sweep applies to bpim and dpim only".into()));
    }
    if cfg.beta_grid.is_empty() || cfg.beta_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(Error::InvalidParameter(
            "beta grid must be non-empty and positive".into(),
        ));
    }
    if cfg.beta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("beta grid must be strictly increasing".into()));
    }
    if cfg.n == 0 || cfg.ebn0_db.is_empty() || cfg.instances_per_ebn0 == 0 || cfg.trials == 0 || cfg.iterations == 0 {
        return Err(Error::InvalidParameter(
            "beta sweep needs N, instances, trials and iterations >= 1".into(),
        ));
    }
    if cfg.random_samples == 0 {
        return Err(Error::InvalidParameter("need at least one random sample".into()));
    }
    Ok(())
}

/// Runs single-replica annealing for every grid value over a fixed instance
/// pool and reports the normalized mean final energy.
///
/// Each instance's final energies are divided by the mean residual of
/// `random_samples` uniformly random configurations of that instance, so a
/// curve value of 1 means "no better than guessing". Trial seeds are shared
/// across grid points.
pub fn beta_sweep(cfg: &BetaSweepConfig) -> Result<BetaCurve> {
    validate(cfg)?;
    let con = Constellation::new(cfg.order)?;
    let mut problems = Vec::new();
    for (e, &ebn0) in cfg.ebn0_db.iter().enumerate() {
        let master = derive_seed(cfg.seed, &[e as u64]);
        for i in 0..cfg.instances_per_ebn0 {
            let inst = MimoInstance::generate(&con, cfg.n, cfg.n, ebn0, InstanceSeeds::derive(master, i as u64, 0))?;
            let problem = match cfg.paradigm {
                Paradigm::Bpim => {
                    let enc = SpinEncoding::new(cfg.n, cfg.order)?;
                    Problem::Binary(build_binary_model(&inst.realify(), &enc)?)
                }
                _ => Problem::Pdit(
                    build_pdit_model(&inst.channel, &inst.rx_vector, &con)?,
                    inst.rx_vector.norm_squared(),
                ),
            };
            let scale = problem.random_residual_mean(cfg.random_samples, derive_seed(master, &[i as u64, 1]));
            problems.push((problem, scale));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let mut mean_energy = Vec::with_capacity(cfg.beta_grid.len());
    let mut std_error = Vec::with_capacity(cfg.beta_grid.len());
    for &beta in &cfg.beta_grid {
        let solver = SolverConfig::new(1, AnnealSchedule::beta_ramp(beta, cfg.iterations)?, 0)?;
        let values: Vec<f64> = jobs
            .par_iter()
            .map(|&(p, t)| {
                let (problem, scale) = &problems[p];
                let seed = derive_seed(cfg.seed, &[role::SOLVER, p as u64, t as u64]);
                problem.final_residual(&solver, seed) / scale
            })
            .collect();
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0).max(1.0);
        mean_energy.push(mean);
        std_error.push((var / count).sqrt());
    }

    let argmin = (0..mean_energy.len())
        .min_by(|&a, &b| mean_energy[a].total_cmp(&mean_energy[b]))
        .expect("non-empty grid");
    let beta_min = cfg.beta_grid[argmin];
    let beta_refined = refine_minimum(&cfg.beta_grid, &mean_energy, argmin);
    Ok(BetaCurve {
        n: cfg.n,
        order: cfg.order,
        paradigm: cfg.paradigm,
        betas: cfg.beta_grid.clone(),
        mean_energy,
        std_error,
        argmin,
        beta_min,
        beta_refined,
    })
}

/// Half-width (in grid points) of the window used to refine the minimum.
const REFINE_HALF_WIDTH: usize = 3;

/// Vertex of a least-squares parabola in `ln beta` over the grid points
/// within [`REFINE_HALF_WIDTH`] of the minimum, clamped to that window. Falls
/// back to the grid value at the edges or for a non-convex fit.
fn refine_minimum(betas: &[f64], values: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= betas.len() {
        return betas[k];
    }
    let lo = k.saturating_sub(REFINE_HALF_WIDTH);
    let hi = (k + REFINE_HALF_WIDTH).min(betas.len() - 1);
    let centre = betas[k].ln();
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for i in lo..=hi {
        let x = betas[i].ln() - centre;
        let row = Vector3::new(1.0, x, x * x);
        normal += row * row.transpose();
        rhs += row * values[i];
    }
    let Some(c) = normal.lu().solve(&rhs) else {
        return betas[k];
    };
    if !(c[2] > 0.0) {
        return betas[k];
    }
    let vertex = -c[1] / (2.0 * c[2]);
    (centre + vertex).clamp(betas[lo].ln(), betas[hi].ln()).exp()
}

/// Which regressor a family is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingFamily {
    /// `beta_0 = c N^a`.
    Bpsk,
    /// `beta_0 = c (N sqrt(M))^a`.
    Qam,
}

/// One measured (or synthetic) optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaMinimum {
    pub n: usize,
    pub order: usize,
    pub beta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub family: ScalingFamily,
    pub constant: f64,
    pub exponent: f64,
    /// `ln beta_0 - fitted` per input point, in input order.
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `ln beta_0 = ln c + a ln x` per family, where `x = N`
/// for BPSK and `x = N sqrt(M)` for QAM. Families are returned BPSK first.
pub fn fit_scaling_law(minima: &[BetaMinimum]) -> Result<Vec<ScalingFit>> {
    if minima.is_empty() {
        return Err(Error::InvalidParameter("no minima to fit".into()));
    }
    let mut fits = Vec::new();
    for family in [ScalingFamily::Bpsk, ScalingFamily::Qam] {
        let pts: Vec<&BetaMinimum> = minima
            .iter()
            .filter(|m| (m.order == 2) == (family == ScalingFamily::Bpsk))
            .collect();
        if pts.is_empty() {
            continue;
        }
        if pts.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "{family:?} family has {} points, need at least 3",
                pts.len()
            )));
        }
        let mut xs = Vec::with_capacity(pts.len());
        let mut ys = Vec::with_capacity(pts.len());
        for m in &pts {
            if !(m.beta0 > 0.0) || m.n == 0 {
                return Err(Error::InvalidParameter(format!("invalid minimum {m:?}")));
            }
            let x = match family {
                ScalingFamily::Bpsk => (m.n as f64).ln(),
                ScalingFamily::Qam => (m.n as f64).ln() + 0.5 * (m.order as f64).ln(),
            };
            xs.push(x);
            ys.push(m.beta0.ln());
        }
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx <= 1e-12 * (1.0 + mx * mx) * k {
            return Err(Error::InvalidParameter(format!(
                "degenerate design: all {family:?} points share one size"
            )));
        }
        let exponent = sxy / sxx;
        let intercept = my - exponent * mx;
        let residuals = xs.iter().zip(&ys).map(|(x, y)| y - intercept - exponent * x).collect();
        fits.push(ScalingFit {
            family,
            constant: intercept.exp(),
            exponent,
            residuals,
        });
    }
    Ok(fits)
}
