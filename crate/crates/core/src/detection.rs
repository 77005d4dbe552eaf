//! Detector tags, detection results and a single entry point that runs any
//! detector on a [`MimoInstance`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baselines::{ml_exact_with_budget, mmse_detect, zf_detect, DEFAULT_NODE_BUDGET};
use crate::channel::{residual_energy, CMatrix, CVector, MimoInstance};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::ising_map::{build_binary_model, build_pdit_model, pdits_to_symbols, SpinEncoding};
use crate::solvers::{bpim_solve, default_parameters, dpim_solve, oim_solve, AnnealSchedule, Paradigm, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Zf,
    Mmse,
    /// Exact maximum likelihood (sphere decoder).
    Ml,
    Bpim,
    Dpim,
    Oim,
}

impl Detector {
    pub const ALL: [Detector; 6] = [
        Detector::Zf,
        Detector::Mmse,
        Detector::Ml,
        Detector::Bpim,
        Detector::Dpim,
        Detector::Oim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Zf => "zf",
            Detector::Mmse => "mmse",
            Detector::Ml => "ml",
            Detector::Bpim => "bpim",
            Detector::Dpim => "dpim",
            Detector::Oim => "oim",
        }
    }

    pub fn paradigm(self) -> Option<Paradigm> {
        match self {
            Detector::Bpim => Some(Paradigm::Bpim),
            Detector::Dpim => Some(Paradigm::Dpim),
            Detector::Oim => Some(Paradigm::Oim),
            _ => None,
        }
    }

    /// Whether this detector can handle `order`-ary symbols.
    pub fn supports(self, order: usize) -> bool {
        self != Detector::Oim || order == 2
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zf" => Ok(Detector::Zf),
            "mmse" => Ok(Detector::Mmse),
            "ml" | "sd" => Ok(Detector::Ml),
            "bpim" => Ok(Detector::Bpim),
            "dpim" => Ok(Detector::Dpim),
            "oim" => Ok(Detector::Oim),
            other => Err(Error::Parse(format!(
                "unknown detector '{other}' (expected zf, mmse, ml, sd, bpim, dpim or oim)"
            ))),
        }
    }
}

/// Output of any detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub symbols: Vec<Complex64>,
    pub bits: Vec<u8>,
    /// `||y - H symbols||^2`.
    pub residual_energy: f64,
    pub method: Detector,
}

impl DetectionResult {
    /// Demodulates `symbols` and evaluates their residual.
    pub fn from_symbols(
        h: &CMatrix,
        y: &CVector,
        con: &Constellation,
        symbols: Vec<Complex64>,
        method: Detector,
    ) -> Result<Self> {
        let bits = con.demodulate(&symbols)?;
        let residual_energy = residual_energy(h, y, &symbols);
        Ok(Self {
            symbols,
            bits,
            residual_energy,
            method,
        })
    }
}

/// Overrides applied on top of the default heuristic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorOptions {
    pub replicas: Option<usize>,
    pub iterations: Option<usize>,
    /// Peak of the annealing schedule (`beta_max`, or `T_max` for the OIM).
    pub schedule_peak: Option<f64>,
    /// Node budget of the sphere decoder.
    pub ml_budget: u64,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        Self {
            replicas: None,
            iterations: None,
            schedule_peak: None,
            ml_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl DetectorOptions {
    /// Solver configuration for `paradigm` on an `n`-symbol, `order`-ary problem.
    pub fn solver_config(&self, paradigm: Paradigm, n: usize, order: usize, seed: u64) -> Result<SolverConfig> {
        let mut cfg = default_parameters(paradigm, n, order)?.with_seed(seed);
        if let Some(r) = self.replicas {
            if r == 0 {
                return Err(Error::InvalidParameter("replica count must be at least 1".into()));
            }
            cfg.replicas = r;
        }
        let iters = self.iterations.unwrap_or(cfg.schedule.n_iterations);
        let peak = self.schedule_peak.unwrap_or(cfg.schedule.peak);
        cfg.schedule = match cfg.schedule.kind {
            crate::solvers::ScheduleKind::BetaRamp => AnnealSchedule::beta_ramp(peak, iters)?,
            crate::solvers::ScheduleKind::TemperatureRamp => AnnealSchedule::temperature_ramp(peak, iters)?,
        };
        Ok(cfg)
    }
}

/// Runs `detector` on `inst`. `seed` drives the stochastic detectors; replicas
/// are run serially.
pub fn detect(
    inst: &MimoInstance,
    con: &Constellation,
    detector: Detector,
    options: &DetectorOptions,
    seed: u64,
) -> Result<DetectionResult> {
    if con.order() != inst.order {
        return Err(Error::InvalidParameter(format!(
            "constellation order {} does not match instance order {}",
            con.order(),
            inst.order
        )));
    }
    let (h, y) = (&inst.channel, &inst.rx_vector);
    let n = inst.n_tx;
    match detector {
        Detector::Zf => zf_detect(h, y, con),
        Detector::Mmse => mmse_detect(h, y, inst.sigma_sq, con),
        Detector::Ml => ml_exact_with_budget(h, y, con, options.ml_budget),
        Detector::Bpim | Detector::Oim => {
            let paradigm = detector.paradigm().expect("heuristic");
            let cfg = options.solver_config(paradigm, n, con.order(), seed)?;
            let encoding = SpinEncoding::new(n, con.order())?;
            let model = build_binary_model(&inst.realify(), &encoding)?;
            let spins = if detector == Detector::Bpim {
                bpim_solve(&model, &cfg).best_state
            } else {
                oim_solve(&model, &cfg).best_state
            };
            let symbols = encoding.spins_to_symbols(&spins)?;
            DetectionResult::from_symbols(h, y, con, symbols, detector)
        }
        Detector::Dpim => {
            let cfg = options.solver_config(Paradigm::Dpim, n, con.order(), seed)?;
            let model = build_pdit_model(h, y, con)?;
            let out = dpim_solve(&model, &cfg);
            DetectionResult::from_symbols(h, y, con, pdits_to_symbols(&out.best_state), detector)
        }
    }
}
