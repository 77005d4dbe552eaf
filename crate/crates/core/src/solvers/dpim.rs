//! p-dit probabilistic Ising machine.
//!
//! A p-dit holds one complete symbol. On update it evaluates the energy change
//! to every alphabet point from a single local-field computation and draws the
//! new value from `p_c = exp(-beta dE_c) / sum_k exp(-beta dE_k)`, which does
//! not depend on the current value beyond a common shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_replicated, sweep_order, ReplicaResult, SolveOutcome, SolverConfig};
use crate::ising_map::PditModel;

/// Single p-dit chain. States are stored as indices into [`PditModel::states`].
#[derive(Debug, Clone)]
pub struct DpimChain<'m> {
    model: &'m PditModel,
    index: Vec<usize>,
    values: Vec<[f64; 2]>,
    energy: f64,
    deltas: Vec<f64>,
    weights: Vec<f64>,
    order: Vec<usize>,
}

impl<'m> DpimChain<'m> {
    /// Uniform random alphabet point per p-dit.
    pub fn random<R: Rng>(model: &'m PditModel, rng: &mut R) -> Self {
        let m = model.states().len();
        let index = (0..model.n()).map(|_| rng.random_range(0..m)).collect();
        Self::from_indices(model, index)
    }

    pub fn from_indices(model: &'m PditModel, index: Vec<usize>) -> Self {
        assert_eq!(index.len(), model.n(), "p-dit vector length");
        let values: Vec<[f64; 2]> = index.iter().map(|&k| model.states()[k]).collect();
        let energy = model.energy_trusted(&values);
        let m = model.states().len();
        Self {
            model,
            index,
            values,
            energy,
            deltas: vec![0.0; m],
            weights: vec![0.0; m],
            order: Vec::with_capacity(model.n()),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.index
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn sweep<R: Rng>(&mut self, beta: f64, random_scan: bool, rng: &mut R) {
        let mut order = std::mem::take(&mut self.order);
        sweep_order(self.index.len(), random_scan, rng, &mut order);
        for &i in &order {
            self.update(i, beta, rng);
        }
        self.order = order;
    }

    /// Gibbs update of p-dit `i` at inverse temperature `beta`.
    pub fn update<R: Rng>(&mut self, i: usize, beta: f64, rng: &mut R) {
        let field = self.model.local_field(i, &self.values);
        let d0 = self.values[i];
        let mut max_logit = f64::NEG_INFINITY;
        for (c, d1) in self.model.states().iter().enumerate() {
            let de = self.model.delta_with_field(i, d0, *d1, field);
            self.deltas[c] = de;
            max_logit = max_logit.max(-beta * de);
        }
        let mut total = 0.0;
        for (w, &de) in self.weights.iter_mut().zip(&self.deltas) {
            *w = (-beta * de - max_logit).exp();
            total += *w;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = self.weights.len() - 1;
        for (c, &w) in self.weights.iter().enumerate() {
            if u < w {
                pick = c;
                break;
            }
            u -= w;
        }
        if pick != self.index[i] {
            self.energy += self.deltas[pick];
            self.index[i] = pick;
            self.values[i] = self.model.states()[pick];
        }
    }
}

pub fn dpim_replica(model: &PditModel, cfg: &SolverConfig, seed: u64) -> ReplicaResult<Vec<[f64; 2]>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = DpimChain::random(model, &mut rng);
    let mut best_state = chain.values().to_vec();
    let mut best_energy = chain.energy();
    let mut best_iteration = 0;
    for k in 1..=cfg.schedule.n_iterations {
        chain.sweep(cfg.schedule.value(k), cfg.random_scan, &mut rng);
        if chain.energy() < best_energy {
            best_energy = chain.energy();
            best_state.copy_from_slice(chain.values());
            best_iteration = k;
        }
    }
    ReplicaResult {
        best_energy: model.energy_trusted(&best_state),
        best_state,
        best_iteration,
        final_energy: model.energy_trusted(chain.values()),
    }
}

/// Best-of-R annealed p-dit search. States are `(Re, Im)` pairs per symbol;
/// energies are p-dit Hamiltonian values (`||y - Hx||^2 - ||y||^2`).
pub fn dpim_solve(model: &PditModel, cfg: &SolverConfig) -> SolveOutcome<Vec<[f64; 2]>> {
    cfg.validate().expect("invalid solver configuration");
    run_replicated(
        cfg.replicas,
        cfg.seed,
        cfg.parallel,
        cfg.schedule.n_iterations,
        |seed| dpim_replica(model, cfg, seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, CMatrix, CVector};
    use crate::ising_map::{build_pdit_model, pdit_energy};
    use crate::Constellation;
    use num_complex::Complex64;

    #[test]
    fn zero_beta_is_uniform() {
        let con = Constellation::new(16).unwrap();
        let h = generate_channel(1, 1, 0);
        let y = CVector::from_element(1, Complex64::new(2.0, -1.0));
        let model = build_pdit_model(&h, &y, &con).unwrap();
        let mut chain = DpimChain::from_indices(&model, vec![0]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 160_000;
        let mut counts = [0usize; 16];
        for _ in 0..n {
            chain.update(0, 0.0, &mut rng);
            counts[chain.indices()[0]] += 1;
        }
        let p = 1.0 / 16.0;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - p).abs() < 3.5 * sd, "{counts:?}");
        }
    }

    #[test]
    fn single_dit_conditional_is_exact_boltzmann() {
        // With one p-dit, its conditional is the full Boltzmann law.
        let con = Constellation::new(4).unwrap();
        let h = CMatrix::from_element(1, 1, Complex64::new(0.8, -0.3));
        let y = CVector::from_element(1, Complex64::new(0.5, 0.9));
        let model = build_pdit_model(&h, &y, &con).unwrap();
        let beta = 0.9;
        let energies: Vec<f64> = model
            .states()
            .iter()
            .map(|d| pdit_energy(&[*d], &model).unwrap())
            .collect();
        let z: f64 = energies.iter().map(|e| (-beta * e).exp()).sum();
        for start in 0..4 {
            let mut chain = DpimChain::from_indices(&model, vec![start]);
            chain.update(0, beta, &mut ChaCha8Rng::seed_from_u64(0));
            let total: f64 = chain.weights.iter().sum();
            for (c, &w) in chain.weights.iter().enumerate() {
                let exact = (-beta * energies[c]).exp() / z;
                assert!((w / total - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tracked_energy_stays_exact() {
        let con = Constellation::new(64).unwrap();
        let h = generate_channel(6, 6, 3);
        let y = CVector::from_element(6, Complex64::new(3.0, -5.0));
        let model = build_pdit_model(&h, &y, &con).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut chain = DpimChain::random(&model, &mut rng);
        for k in 0..300 {
            chain.sweep(0.05, k % 3 == 0, &mut rng);
            let exact = pdit_energy(chain.values(), &model).unwrap();
            assert!((chain.energy() - exact).abs() < 1e-8 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn softmax_survives_huge_beta() {
        let con = Constellation::new(256).unwrap();
        let h = generate_channel(2, 2, 1);
        let y = CVector::from_element(2, Complex64::new(100.0, -80.0));
        let model = build_pdit_model(&h, &y, &con).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut chain = DpimChain::random(&model, &mut rng);
        for _ in 0..5 {
            chain.sweep(1e6, false, &mut rng);
            assert!(chain.energy().is_finite());
        }
    }
}
