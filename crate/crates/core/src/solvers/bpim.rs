//! p-bit probabilistic Ising machine.
//!
//! Each p-bit is resampled as `s_i <- sgn(u + tanh(beta I_i))` with
//! `u ~ U(-1, 1)`, which is the heat-bath kernel
//! `P(s_i = +1) = (1 + tanh(beta I_i)) / 2` of `exp(-beta E)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_replicated, sweep_order, ReplicaResult, SolveOutcome, SolverConfig};
use crate::ising_map::BinaryIsingModel;

/// A single p-bit Markov chain. Local fields and the energy are maintained
/// incrementally across flips.
#[derive(Debug, Clone)]
pub struct BpimChain<'m> {
    model: &'m BinaryIsingModel,
    spins: Vec<f64>,
    field: Vec<f64>,
    energy: f64,
    order: Vec<usize>,
}

impl<'m> BpimChain<'m> {
    /// Chain started from uniformly random spins.
    pub fn random<R: Rng>(model: &'m BinaryIsingModel, rng: &mut R) -> Self {
        let spins = (0..model.n())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Self::from_spins(model, spins)
    }

    pub fn from_spins(model: &'m BinaryIsingModel, spins: Vec<f64>) -> Self {
        assert_eq!(spins.len(), model.n(), "spin vector length");
        let field = (0..model.n()).map(|a| model.local_field(&spins, a)).collect();
        let energy = model.energy(&spins);
        Self {
            model,
            spins,
            field,
            energy,
            order: Vec::with_capacity(model.n()),
        }
    }

    pub fn spins(&self) -> &[f64] {
        &self.spins
    }

    /// Energy tracked incrementally; see [`BinaryIsingModel::energy`] for the exact value.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// One sequential update of every p-bit at inverse temperature `beta`.
    pub fn sweep<R: Rng>(&mut self, beta: f64, random_scan: bool, rng: &mut R) {
        let mut order = std::mem::take(&mut self.order);
        sweep_order(self.spins.len(), random_scan, rng, &mut order);
        for &a in &order {
            self.update(a, beta, rng);
        }
        self.order = order;
    }

    /// Resamples p-bit `a`.
    pub fn update<R: Rng>(&mut self, a: usize, beta: f64, rng: &mut R) {
        let u: f64 = rng.random::<f64>() * 2.0 - 1.0;
        let field = self.field[a];
        let new = if u + (beta * field).tanh() >= 0.0 { 1.0 } else { -1.0 };
        if new != self.spins[a] {
            self.energy -= 2.0 * new * field;
            self.spins[a] = new;
            let step = 2.0 * new;
            for (f, &j) in self.field.iter_mut().zip(self.model.row(a)) {
                *f += j * step;
            }
        }
    }
}

/// One annealed replica with best-ever tracking.
pub fn bpim_replica(model: &BinaryIsingModel, cfg: &SolverConfig, seed: u64) -> ReplicaResult<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = BpimChain::random(model, &mut rng);
    let mut best_state = chain.spins().to_vec();
    let mut best_energy = chain.energy();
    let mut best_iteration = 0;
    for k in 1..=cfg.schedule.n_iterations {
        chain.sweep(cfg.schedule.value(k), cfg.random_scan, &mut rng);
        if chain.energy() < best_energy {
            best_energy = chain.energy();
            best_state.copy_from_slice(chain.spins());
            best_iteration = k;
        }
    }
    ReplicaResult {
        best_energy: model.energy(&best_state),
        best_state,
        best_iteration,
        final_energy: model.energy(chain.spins()),
    }
}

/// Best-of-R annealed p-bit search. States are spin vectors; energies are
/// binary Ising energies (without the model offset).
pub fn bpim_solve(model: &BinaryIsingModel, cfg: &SolverConfig) -> SolveOutcome<Vec<f64>> {
    cfg.validate().expect("invalid solver configuration");
    run_replicated(
        cfg.replicas,
        cfg.seed,
        cfg.parallel,
        cfg.schedule.n_iterations,
        |seed| bpim_replica(model, cfg, seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::AnnealSchedule;

    fn ferro_pair() -> BinaryIsingModel {
        BinaryIsingModel::from_parts(vec![0.0, 1.0, 1.0, 0.0], vec![0.0, 0.0], 0.0).unwrap()
    }

    #[test]
    fn zero_beta_is_a_fair_coin() {
        let m = BinaryIsingModel::from_parts(vec![0.0], vec![3.0], 0.0).unwrap();
        let mut chain = BpimChain::from_spins(&m, vec![1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut ups = 0;
        for _ in 0..n {
            chain.update(0, 0.0, &mut rng);
            ups += (chain.spins()[0] > 0.0) as usize;
        }
        let p = ups as f64 / n as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "p = {p}");
    }

    #[test]
    fn large_beta_follows_field() {
        let m = BinaryIsingModel::from_parts(vec![0.0], vec![0.5], 0.0).unwrap();
        let mut chain = BpimChain::from_spins(&m, vec![-1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            chain.update(0, 200.0, &mut rng);
            assert_eq!(chain.spins()[0], 1.0);
        }
    }

    #[test]
    fn single_site_ratio_matches_boltzmann() {
        // P(+1)/P(-1) = exp(2 beta I)
        let h = 0.3;
        let beta = 1.7;
        let m = BinaryIsingModel::from_parts(vec![0.0], vec![h], 0.0).unwrap();
        let p_up = (1.0 + (beta * h).tanh()) / 2.0;
        assert!((p_up / (1.0 - p_up) - (2.0 * beta * h).exp()).abs() < 1e-12);
        let mut chain = BpimChain::from_spins(&m, vec![1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut ups = 0;
        for _ in 0..n {
            chain.update(0, beta, &mut rng);
            ups += (chain.spins()[0] > 0.0) as usize;
        }
        let p = ups as f64 / n as f64;
        assert!((p - p_up).abs() < 3.0 * (p_up * (1.0 - p_up) / n as f64).sqrt());
    }

    #[test]
    fn tracked_energy_stays_exact() {
        let j = vec![0.0, 1.5, -0.5, 1.5, 0.0, 2.0, -0.5, 2.0, 0.0];
        let m = BinaryIsingModel::from_parts(j, vec![0.1, -0.4, 0.9], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut chain = BpimChain::random(&m, &mut rng);
        for k in 0..1000 {
            chain.sweep(0.3, k % 2 == 0, &mut rng);
            assert!((chain.energy() - m.energy(chain.spins())).abs() < 1e-9);
        }
    }

    #[test]
    fn ferromagnet_pair_aligns() {
        let m = ferro_pair();
        let mut aligned = 0;
        for seed in 0..200u64 {
            let cfg = SolverConfig::new(1, AnnealSchedule::beta_ramp(5.0, 100).unwrap(), seed).unwrap();
            let out = bpim_solve(&m, &cfg);
            aligned += (out.best_state[0] == out.best_state[1]) as usize;
            assert!((out.best_energy - m.energy(&out.best_state)).abs() < 1e-12);
            assert!(out.replica_final_energies.iter().all(|&e| out.best_energy <= e));
        }
        assert!(aligned >= 198, "{aligned}/200");
    }

    #[test]
    fn replicas_nest_and_are_deterministic() {
        let j: Vec<f64> = (0..36)
            .map(|k| {
                let (a, b) = (k / 6, k % 6);
                if a == b {
                    0.0
                } else {
                    ((a * 7 + b * 7 + a * b) % 5) as f64 - 2.0
                }
            })
            .collect();
        let m = BinaryIsingModel::from_parts(j, vec![0.3, -0.2, 0.1, 0.0, 0.5, -0.7], 0.0).unwrap();
        let sched = AnnealSchedule::beta_ramp(0.4, 20).unwrap();
        let mut prev = f64::INFINITY;
        for r in 1..8 {
            let cfg = SolverConfig::new(r, sched, 42).unwrap();
            let out = bpim_solve(&m, &cfg);
            assert!(out.best_energy <= prev);
            prev = out.best_energy;
            let mut par = cfg;
            par.parallel = true;
            assert_eq!(bpim_solve(&m, &par), out);
        }
        let one = SolverConfig::new(1, sched, 42).unwrap();
        let direct = bpim_replica(&m, &one, crate::solvers::replica_seed(42, 0));
        assert_eq!(bpim_solve(&m, &one).best_state, direct.best_state);
    }
}
