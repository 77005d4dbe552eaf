//! Oscillator Ising machine.
//!
//! Phases follow
//!
//! ```text
//! dphi_i/dt = -K C_i - S sin(2 phi_i) + T(t) xi_i
//! C_i       = sum_j J_ij tanh(10 sin(phi_i - phi_j)) + h_i sin(phi_i)
//! ```
//!
//! integrated with Heun's method. The Gaussian noise increment
//! `T(k) eta sqrt(dt)` is drawn once per oscillator per step and added in both
//! the predictor and corrector. Spins are read out as `sign(cos phi_i)`, ties
//! to `+1`; the bias term is signed so that `h_i > 0` pulls `phi_i` towards 0,
//! i.e. towards `s_i = +1`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::kernels::{cos_nonnegative, coupled_tanh, sin_cos_slice};
use super::{run_replicated, OimParams, ReplicaResult, SolveOutcome, SolverConfig};
use crate::ising_map::BinaryIsingModel;

/// Sharpness of the coupling nonlinearity.
const COUPLING_GAIN: f64 = 10.0;

/// Phase state of one oscillator network.
#[derive(Debug, Clone)]
pub struct OimChain<'m> {
    model: &'m BinaryIsingModel,
    phases: Vec<f64>,
    drift0: Vec<f64>,
    drift1: Vec<f64>,
    predicted: Vec<f64>,
    noise: Vec<f64>,
    sin: Vec<f64>,
    cos: Vec<f64>,
    pair: Vec<f64>,
    j_upper: Vec<f64>,
}

impl<'m> OimChain<'m> {
    /// Phases uniform in `[0, 2 pi)`.
    pub fn random<R: Rng>(model: &'m BinaryIsingModel, rng: &mut R) -> Self {
        let phases = (0..model.n()).map(|_| rng.random::<f64>() * TAU).collect();
        Self::from_phases(model, phases)
    }

    pub fn from_phases(model: &'m BinaryIsingModel, phases: Vec<f64>) -> Self {
        let n = model.n();
        assert_eq!(phases.len(), n, "phase vector length");
        Self {
            model,
            phases,
            drift0: vec![0.0; n],
            drift1: vec![0.0; n],
            predicted: vec![0.0; n],
            noise: vec![0.0; n],
            sin: vec![0.0; n],
            cos: vec![0.0; n],
            pair: vec![0.0; n * n.saturating_sub(1) / 2],
            j_upper: packed_upper(model),
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `sign(cos phi_i)` with ties to `+1`.
    pub fn readout(&self, spins: &mut [f64]) {
        for (s, &p) in spins.iter_mut().zip(&self.phases) {
            *s = if cos_nonnegative(p) { 1.0 } else { -1.0 };
        }
    }

    /// One Heun step with noise amplitude `temperature`.
    pub fn step<R: Rng>(&mut self, params: &OimParams, temperature: f64, rng: &mut R) {
        let amp = temperature * params.dt.sqrt();
        for eta in self.noise.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *eta = amp * g;
        }
        let dt = params.dt;
        drift(
            self.model.bias(),
            &self.j_upper,
            params,
            &self.phases,
            &mut self.sin,
            &mut self.cos,
            &mut self.pair,
            &mut self.drift0,
        );
        for i in 0..self.phases.len() {
            self.predicted[i] = self.phases[i] + dt * self.drift0[i] + self.noise[i];
        }
        drift(
            self.model.bias(),
            &self.j_upper,
            params,
            &self.predicted,
            &mut self.sin,
            &mut self.cos,
            &mut self.pair,
            &mut self.drift1,
        );
        for i in 0..self.phases.len() {
            let p = self.phases[i] + 0.5 * dt * (self.drift0[i] + self.drift1[i]) + self.noise[i];
            self.phases[i] = p.rem_euclid(TAU);
        }
    }
}

/// Strict upper triangle of `J`, row-major.
fn packed_upper(model: &BinaryIsingModel) -> Vec<f64> {
    let n = model.n();
    let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        v.extend_from_slice(&model.row(i)[i + 1..]);
    }
    v
}

/// Deterministic part of the phase velocity. `pair` is scratch of the same
/// length as `j_upper`.
#[allow(clippy::too_many_arguments)]
fn drift(
    bias: &[f64],
    j_upper: &[f64],
    params: &OimParams,
    phases: &[f64],
    sin: &mut [f64],
    cos: &mut [f64],
    pair: &mut [f64],
    out: &mut [f64],
) {
    let n = phases.len();
    sin_cos_slice(phases, sin, cos);
    // tanh(g sin(a - b)) is odd in (a - b): evaluate each pair once
    let mut idx = 0;
    for i in 0..n {
        let (si, ci) = (sin[i], cos[i]);
        let len = n - i - 1;
        let dst = &mut pair[idx..idx + len];
        for ((d, &sj), &cj) in dst.iter_mut().zip(&sin[i + 1..]).zip(&cos[i + 1..]) {
            *d = COUPLING_GAIN * (si * cj - ci * sj);
        }
        idx += len;
    }
    coupled_tanh(pair, j_upper);
    for i in 0..n {
        out[i] = bias[i] * sin[i];
    }
    let mut idx = 0;
    for i in 0..n {
        let len = n - i - 1;
        let src = &pair[idx..idx + len];
        let (head, tail) = out.split_at_mut(i + 1);
        let mut acc = 0.0;
        for (d, &t) in tail.iter_mut().zip(src) {
            *d -= t;
            acc += t;
        }
        head[i] += acc;
        idx += len;
    }
    for i in 0..n {
        out[i] = -params.coupling * out[i] - params.binarization * 2.0 * sin[i] * cos[i];
    }
}

pub fn oim_replica(model: &BinaryIsingModel, cfg: &SolverConfig, seed: u64) -> ReplicaResult<Vec<f64>> {
    let params = cfg
        .oim
        .expect("oscillator parameters missing from solver configuration");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = OimChain::random(model, &mut rng);
    let mut spins = vec![0.0; model.n()];
    chain.readout(&mut spins);
    let mut prev = spins.clone();
    let mut best_state = spins.clone();
    let mut best_energy = model.energy(&spins);
    let mut best_iteration = 0;
    let mut last = best_energy;
    for k in 1..=cfg.schedule.n_iterations {
        chain.step(&params, cfg.schedule.value(k), &mut rng);
        chain.readout(&mut spins);
        if spins == prev {
            continue;
        }
        prev.copy_from_slice(&spins);
        last = model.energy(&spins);
        if last < best_energy {
            best_energy = last;
            best_state.copy_from_slice(&spins);
            best_iteration = k;
        }
    }
    ReplicaResult {
        best_state,
        best_energy,
        best_iteration,
        final_energy: last,
    }
}

/// Best-of-R oscillator search; requires `cfg.oim`.
pub fn oim_solve(model: &BinaryIsingModel, cfg: &SolverConfig) -> SolveOutcome<Vec<f64>> {
    cfg.validate().expect("invalid solver configuration");
    run_replicated(
        cfg.replicas,
        cfg.seed,
        cfg.parallel,
        cfg.schedule.n_iterations,
        |seed| oim_replica(model, cfg, seed),
    )
}
