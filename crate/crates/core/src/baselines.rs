//! Classical detectors: zero forcing, MMSE and exact maximum likelihood.
//!
//! The ML detector is a depth-first sphere decoder on the real-valued model
//! with Schnorr-Euchner (closest-first) child ordering and an initially
//! infinite radius that shrinks at every leaf. The only pruning is against the
//! best complete candidate found so far, so the result is the exact argmin of
//! `||y - Hx||^2`. Exponential searches are refused above a node budget.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{realify, residual_energy, CMatrix, CVector};
use crate::constellation::Constellation;
use crate::detection::{DetectionResult, Detector};
use crate::error::{Error, Result};

/// Default node budget of the exact searches (`2^48`).
pub const DEFAULT_NODE_BUDGET: u64 = 1 << 48;

fn finish(
    h: &CMatrix,
    y: &CVector,
    con: &Constellation,
    symbols: Vec<Complex64>,
    method: Detector,
) -> Result<DetectionResult> {
    DetectionResult::from_symbols(h, y, con, symbols, method)
}

fn quantize_all(soft: &CVector, con: &Constellation) -> Result<Vec<Complex64>> {
    soft.iter().map(|&z| con.quantize(z)).collect()
}

fn check_shapes(h: &CMatrix, y: &CVector) -> Result<()> {
    if h.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "channel has {} rows, received vector has {} entries",
            h.nrows(),
            y.len()
        )));
    }
    if h.ncols() == 0 || h.nrows() < h.ncols() {
        return Err(Error::Dimension(format!(
            "need n_rx >= n_tx >= 1, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(())
}

/// Least-squares (pseudo-inverse) estimate followed by per-entry quantization.
pub fn zf_detect(h: &CMatrix, y: &CVector, con: &Constellation) -> Result<DetectionResult> {
    check_shapes(h, y)?;
    let svd = h.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10 * h.nrows().max(h.ncols()) as f64;
    let rank = svd.rank(eps);
    if smax == 0.0 || rank < h.ncols() {
        return Err(Error::SingularChannel { rank, cols: h.ncols() });
    }
    let soft = svd.solve(y, eps).map_err(|e| Error::Dimension(e.to_string()))?;
    finish(h, y, con, quantize_all(&soft, con)?, Detector::Zf)
}

/// `(H'H + I sigma^2/Es)^-1 H'y` followed by per-entry quantization.
pub fn mmse_detect(h: &CMatrix, y: &CVector, sigma_sq: f64, con: &Constellation) -> Result<DetectionResult> {
    check_shapes(h, y)?;
    if !(sigma_sq >= 0.0) || !sigma_sq.is_finite() {
        return Err(Error::InvalidParameter(format!("noise variance {sigma_sq}")));
    }
    let n = h.ncols();
    let reg = Complex64::new(sigma_sq / con.symbol_energy(), 0.0);
    let mut gram = h.adjoint() * h;
    for i in 0..n {
        gram[(i, i)] += reg;
    }
    let rhs = h.adjoint() * y;
    let soft = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularChannel { rank: 0, cols: n })?,
    };
    finish(h, y, con, quantize_all(&soft, con)?, Detector::Mmse)
}

fn check_budget(con: &Constellation, n: usize, budget: u64) -> Result<()> {
    let log_space = n as f64 * (con.order() as f64).log2();
    if log_space > (budget as f64).log2() + 1e-9 {
        return Err(Error::SearchBudget {
            order: con.order(),
            n,
            budget,
        });
    }
    Ok(())
}

/// Exact ML detection with the default node budget.
pub fn ml_exact(h: &CMatrix, y: &CVector, con: &Constellation) -> Result<DetectionResult> {
    ml_exact_with_budget(h, y, con, DEFAULT_NODE_BUDGET)
}

/// Exact ML detection; fails if `M^N` or the number of visited tree nodes
/// exceeds `budget`.
pub fn ml_exact_with_budget(h: &CMatrix, y: &CVector, con: &Constellation, budget: u64) -> Result<DetectionResult> {
    check_shapes(h, y)?;
    check_budget(con, h.ncols(), budget)?;
    sphere_decode(h, y, con, budget)
}

fn sphere_decode(h: &CMatrix, y: &CVector, con: &Constellation, budget: u64) -> Result<DetectionResult> {
    let rc = realify(h, y, con.is_bpsk());
    let dims = rc.h_real.ncols();
    let qr = rc.h_real.clone().qr();
    let r = qr.r();
    let z = qr.q().tr_mul(&rc.y_real);

    let mut search = SphereSearch {
        r: &r,
        z: z.as_slice(),
        levels: con.pam_levels(),
        x: vec![0.0; dims],
        best: vec![0.0; dims],
        radius: f64::INFINITY,
        nodes: 0,
        budget,
        scratch: vec![Vec::with_capacity(con.side()); dims],
    };
    search.descend(dims - 1, 0.0)?;
    if !search.radius.is_finite() {
        return Err(Error::Dimension("sphere decoder found no candidate".into()));
    }
    let symbols = unstack(&search.best, h.ncols(), con.is_bpsk());
    finish(h, y, con, symbols, Detector::Ml)
}

fn unstack(x: &[f64], n: usize, bpsk: bool) -> Vec<Complex64> {
    if bpsk {
        x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    } else {
        (0..n).map(|k| Complex64::new(x[k], x[k + n])).collect()
    }
}

struct SphereSearch<'a> {
    r: &'a DMatrix<f64>,
    z: &'a [f64],
    levels: &'a [f64],
    x: Vec<f64>,
    best: Vec<f64>,
    radius: f64,
    nodes: u64,
    budget: u64,
    /// Per-depth candidate buffers.
    scratch: Vec<Vec<(f64, f64)>>,
}

impl SphereSearch<'_> {
    fn descend(&mut self, k: usize, partial: f64) -> Result<()> {
        let dims = self.x.len();
        let mut interference = 0.0;
        for j in (k + 1)..dims {
            interference += self.r[(k, j)] * self.x[j];
        }
        let rkk = self.r[(k, k)];
        let residual = self.z[k] - interference;

        // closest-first order: (cost increment, level)
        let mut cands = std::mem::take(&mut self.scratch[k]);
        cands.clear();
        for &lvl in self.levels {
            let e = residual - rkk * lvl;
            cands.push((e * e, lvl));
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));

        let mut result = Ok(());
        for &(cost, lvl) in &cands {
            self.nodes += 1;
            if self.nodes > self.budget {
                result = Err(Error::NodeBudget(self.budget));
                break;
            }
            let d = partial + cost;
            if d >= self.radius {
                break;
            }
            self.x[k] = lvl;
            if k == 0 {
                self.radius = d;
                self.best.copy_from_slice(&self.x);
            } else if let Err(e) = self.descend(k - 1, d) {
                result = Err(e);
                break;
            }
        }
        self.scratch[k] = cands;
        result
    }
}

/// Brute-force ML over all `M^N` symbol vectors. Ties keep the first vector in
/// lexicographic label order. Meant as a test oracle for small instances.
pub fn ml_exhaustive(h: &CMatrix, y: &CVector, con: &Constellation, budget: u64) -> Result<DetectionResult> {
    check_shapes(h, y)?;
    let n = h.ncols();
    check_budget(con, n, budget)?;
    let m = con.order();
    let alphabet = con.alphabet();
    let mut labels = vec![0usize; n];
    let mut best = (f64::INFINITY, labels.clone());
    let mut x: Vec<Complex64> = vec![alphabet[0]; n];
    loop {
        for (xi, &l) in x.iter_mut().zip(&labels) {
            *xi = alphabet[l];
        }
        let r = residual_energy(h, y, &x);
        if r < best.0 {
            best = (r, labels.clone());
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                let symbols = best.1.iter().map(|&l| alphabet[l]).collect();
                return finish(h, y, con, symbols, Detector::Ml);
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < m {
                break;
            }
            labels[pos] = 0;
        }
    }
}
