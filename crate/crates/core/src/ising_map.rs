//! Ising encodings of the ML detection energy `||y - Hx||^2`.
//!
//! Two encodings are provided:
//!
//! * [`BinaryIsingModel`]: `E(s) = -1/2 sum_ij J_ij s_i s_j - sum_i h_i s_i` over
//!   `s in {-1,+1}^n`. QAM symbols are expanded into spins through the
//!   transformation matrix `T = sqrt(M) v (x) I` with `v = [2^-1, ..., 2^-B]`,
//!   so that the stacked real symbol vector is `T s`. The constant part of the
//!   expansion, including the diagonal of `T' H' H T`, is kept in `offset`, so
//!   `E(s) + offset == ||y_r - H_r T s||^2` exactly.
//! * [`PditModel`]: each symbol is one two-dimensional variable `d_i = (Re, Im)`
//!   ranging over the alphabet, with
//!   `E(d) = -(sum h_i . d_i + 1/2 sum_ij d_i' J_ij d_j)` and
//!   `J_ij = [[A_ij, B_ij], [-B_ij, A_ij]]`. Only `A` (`j11`) and `B` (`j12`)
//!   are stored; both depend on `H` alone. `E(d) == ||y - Hx||^2 - ||y||^2`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{CMatrix, CVector, RealizedChannel};
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// The `x_r = T s` expansion of QAM symbols into spins.
///
/// Spin `b * 2N + k` carries bit-plane `b` (most significant first) of real
/// coordinate `k`, where coordinates `0..N` are real parts and `N..2N`
/// imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    n: usize,
    order: usize,
    /// `sqrt(M) * 2^-(b+1)` for `b = 0..B`.
    weights: Vec<f64>,
}

impl TransformSpec {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        let con = Constellation::new(order)?;
        if con.is_bpsk() {
            return Err(Error::Unsupported(
                "BPSK maps spins to symbols directly and has no transformation matrix".into(),
            ));
        }
        let b = con.bits_per_symbol() / 2;
        let sqrt_m = con.side() as f64;
        let weights = (1..=b).map(|i| sqrt_m * 0.5f64.powi(i as i32)).collect();
        Ok(Self { n, order, weights })
    }

    /// `B = log2 sqrt(M)`.
    pub fn bits_per_axis(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_symbols(&self) -> usize {
        self.n
    }

    pub fn n_spins(&self) -> usize {
        2 * self.n * self.weights.len()
    }

    /// The dense `2N x 2NB` matrix `T`.
    pub fn t_matrix(&self) -> DMatrix<f64> {
        let rows = 2 * self.n;
        let mut t = DMatrix::zeros(rows, self.n_spins());
        for (b, &w) in self.weights.iter().enumerate() {
            for k in 0..rows {
                t[(k, b * rows + k)] = w;
            }
        }
        t
    }

    /// Real coordinates `T s`.
    pub fn apply(&self, spins: &[f64]) -> Vec<f64> {
        let rows = 2 * self.n;
        (0..rows)
            .map(|k| {
                self.weights
                    .iter()
                    .enumerate()
                    .map(|(b, &w)| w * spins[b * rows + k])
                    .sum()
            })
            .collect()
    }
}

/// How symbols are represented as spins.
#[derive(Debug, Clone, PartialEq)]
pub enum SpinEncoding {
    /// One spin per symbol, `x = s`.
    Bpsk {
        n: usize,
    },
    Qam(TransformSpec),
}

impl SpinEncoding {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if order == 2 {
            Ok(SpinEncoding::Bpsk { n })
        } else {
            Ok(SpinEncoding::Qam(TransformSpec::new(n, order)?))
        }
    }

    pub fn n_symbols(&self) -> usize {
        match self {
            SpinEncoding::Bpsk { n } => *n,
            SpinEncoding::Qam(t) => t.n_symbols(),
        }
    }

    pub fn n_spins(&self) -> usize {
        match self {
            SpinEncoding::Bpsk { n } => *n,
            SpinEncoding::Qam(t) => t.n_spins(),
        }
    }

    /// Matrix form of the expansion (identity for BPSK).
    pub fn matrix(&self) -> DMatrix<f64> {
        match self {
            SpinEncoding::Bpsk { n } => DMatrix::identity(*n, *n),
            SpinEncoding::Qam(t) => t.t_matrix(),
        }
    }

    /// Binarizes symbols: for each axis level `L`, `s_1 = sign(L)` and the
    /// remainder `L - w_1 s_1` is binarized with the next (halved) weight.
    pub fn symbols_to_spins(&self, x: &[Complex64], con: &Constellation) -> Result<Vec<f64>> {
        if x.len() != self.n_symbols() {
            return Err(Error::Dimension(format!(
                "expected {} symbols, got {}",
                self.n_symbols(),
                x.len()
            )));
        }
        for &sym in x {
            con.label_of(sym)?;
        }
        match self {
            SpinEncoding::Bpsk { .. } => Ok(x.iter().map(|v| v.re).collect()),
            SpinEncoding::Qam(t) => {
                let n = t.n_symbols();
                let rows = 2 * n;
                let mut spins = vec![0.0; t.n_spins()];
                for k in 0..rows {
                    let mut level = if k < n { x[k].re } else { x[k - n].im };
                    for (b, &w) in t.weights().iter().enumerate() {
                        let s = if level >= 0.0 { 1.0 } else { -1.0 };
                        spins[b * rows + k] = s;
                        level -= w * s;
                    }
                }
                Ok(spins)
            }
        }
    }

    /// `x_r = T s`, recombined as `x_k = x_r[k] + i x_r[k + N]`.
    pub fn spins_to_symbols(&self, spins: &[f64]) -> Result<Vec<Complex64>> {
        if spins.len() != self.n_spins() {
            return Err(Error::Dimension(format!(
                "expected {} spins, got {}",
                self.n_spins(),
                spins.len()
            )));
        }
        match self {
            SpinEncoding::Bpsk { .. } => Ok(spins.iter().map(|&s| Complex64::new(s, 0.0)).collect()),
            SpinEncoding::Qam(t) => {
                let n = t.n_symbols();
                let xr = t.apply(spins);
                Ok((0..n).map(|k| Complex64::new(xr[k], xr[k + n])).collect())
            }
        }
    }
}

/// Dense binary Ising model with symmetric, zero-diagonal couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryIsingModel {
    n: usize,
    j: Vec<f64>,
    h: Vec<f64>,
    offset: f64,
}

impl BinaryIsingModel {
    /// Builds a model from a row-major coupling matrix.
    pub fn from_parts(j: Vec<f64>, h: Vec<f64>, offset: f64) -> Result<Self> {
        let n = h.len();
        if j.len() != n * n {
            return Err(Error::Dimension(format!(
                "coupling matrix has {} entries, expected {}",
                j.len(),
                n * n
            )));
        }
        for a in 0..n {
            if j[a * n + a] != 0.0 {
                return Err(Error::InvalidParameter(format!("J[{a},{a}] must be zero")));
            }
            for b in 0..a {
                if j[a * n + b] != j[b * n + a] {
                    return Err(Error::InvalidParameter(format!("J is not symmetric at ({a},{b})")));
                }
            }
        }
        Ok(Self { n, j, h, offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.j[a * self.n + b]
    }

    /// Row `a` of `J`.
    pub fn row(&self, a: usize) -> &[f64] {
        &self.j[a * self.n..(a + 1) * self.n]
    }

    pub fn bias(&self) -> &[f64] {
        &self.h
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `I_a(s) = sum_b J_ab s_b + h_a`.
    pub fn local_field(&self, spins: &[f64], a: usize) -> f64 {
        dot(self.row(a), spins) + self.h[a]
    }

    /// `-1/2 sum_ab J_ab s_a s_b - sum_a h_a s_a`.
    pub fn energy(&self, spins: &[f64]) -> f64 {
        assert_eq!(spins.len(), self.n, "spin vector length");
        let mut quad = 0.0;
        for a in 0..self.n {
            quad += spins[a] * dot(self.row(a), spins);
        }
        -0.5 * quad - dot(&self.h, spins)
    }

    /// `energy(s) + offset`, i.e. the residual norm of the encoded symbols.
    pub fn residual(&self, spins: &[f64]) -> f64 {
        self.energy(spins) + self.offset
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expands `||y_r - H_r T s||^2 = s'Qs - 2 y_r' H_r T s + y_r'y_r` with
/// `Q = T'H_r'H_r T`, giving `J = -2 Q o (1 - I)`, `h = 2 T'H_r'y_r` and
/// `offset = tr(Q) + y_r'y_r`.
pub fn build_binary_model(rc: &RealizedChannel, encoding: &SpinEncoding) -> Result<BinaryIsingModel> {
    let bpsk = matches!(encoding, SpinEncoding::Bpsk { .. });
    if bpsk != rc.bpsk_mode {
        return Err(Error::Dimension(
            "realized channel and spin encoding disagree on BPSK mode".into(),
        ));
    }
    let expected_cols = match encoding {
        SpinEncoding::Bpsk { n } => *n,
        SpinEncoding::Qam(t) => 2 * t.n_symbols(),
    };
    if rc.h_real.ncols() != expected_cols || rc.y_real.len() != rc.h_real.nrows() {
        return Err(Error::Dimension(format!(
            "real channel is {}x{}, expected {} columns",
            rc.h_real.nrows(),
            rc.h_real.ncols(),
            expected_cols
        )));
    }
    let a = match encoding {
        SpinEncoding::Bpsk { .. } => rc.h_real.clone(),
        SpinEncoding::Qam(t) => &rc.h_real * t.t_matrix(),
    };
    let q = a.tr_mul(&a);
    let lin = a.tr_mul(&rc.y_real);
    let n = q.nrows();
    let mut j = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            if r != c {
                j[r * n + c] = -2.0 * q[(r, c)];
            }
        }
    }
    // exact symmetry regardless of rounding in the product
    for r in 0..n {
        for c in 0..r {
            j[c * n + r] = j[r * n + c];
        }
    }
    let h = lin.iter().map(|v| 2.0 * v).collect();
    let offset = q.trace() + rc.y_real.norm_squared();
    Ok(BinaryIsingModel { n, j, h, offset })
}

/// Two-dimensional p-dit encoding of one MIMO instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PditModel {
    n: usize,
    j11: Vec<f64>,
    j12: Vec<f64>,
    h: Vec<[f64; 2]>,
    states: Vec<[f64; 2]>,
}

impl PditModel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `J^11 = J^22` (row-major, symmetric).
    pub fn j11(&self) -> &[f64] {
        &self.j11
    }

    /// `J^12 = -J^21` (row-major, antisymmetric).
    pub fn j12(&self) -> &[f64] {
        &self.j12
    }

    pub fn bias(&self) -> &[[f64; 2]] {
        &self.h
    }

    /// Allowed values of one p-dit, in alphabet label order.
    pub fn states(&self) -> &[[f64; 2]] {
        &self.states
    }

    /// Index of `d` in [`PditModel::states`].
    pub fn state_index(&self, d: [f64; 2]) -> Option<usize> {
        self.states
            .iter()
            .position(|s| (s[0] - d[0]).abs() < 1e-9 && (s[1] - d[1]).abs() < 1e-9)
    }

    /// `I_i^a = h_i^a + sum_j sum_b J_ij^ab d_j^b`, including `j = i`.
    pub fn local_field(&self, i: usize, state: &[[f64; 2]]) -> [f64; 2] {
        let row11 = &self.j11[i * self.n..(i + 1) * self.n];
        let row12 = &self.j12[i * self.n..(i + 1) * self.n];
        let mut f = self.h[i];
        for ((&a, &b), d) in row11.iter().zip(row12).zip(state) {
            f[0] += a * d[0] + b * d[1];
            f[1] += -b * d[0] + a * d[1];
        }
        f
    }

    /// Energy change of moving p-dit `i` from `d0` to `d1` given its local field:
    ///
    /// `sum_a [(d0^a - d1^a) I^a - 1/2 sum_b J_ii^ab (d1^a d1^b - 2 d1^a d0^b + d0^a d0^b)]`.
    pub fn delta_with_field(&self, i: usize, d0: [f64; 2], d1: [f64; 2], field: [f64; 2]) -> f64 {
        let a = self.j11[i * self.n + i];
        let b = self.j12[i * self.n + i];
        let jii = [[a, b], [-b, a]];
        let mut delta = 0.0;
        for p in 0..2 {
            delta += (d0[p] - d1[p]) * field[p];
            for q in 0..2 {
                delta -= 0.5 * jii[p][q] * (d1[p] * d1[q] - 2.0 * d1[p] * d0[q] + d0[p] * d0[q]);
            }
        }
        delta
    }

    fn energy_unchecked(&self, state: &[[f64; 2]]) -> f64 {
        let mut lin = 0.0;
        let mut quad = 0.0;
        for i in 0..self.n {
            let di = state[i];
            lin += self.h[i][0] * di[0] + self.h[i][1] * di[1];
            let row11 = &self.j11[i * self.n..(i + 1) * self.n];
            let row12 = &self.j12[i * self.n..(i + 1) * self.n];
            for ((&a, &b), dj) in row11.iter().zip(row12).zip(state) {
                quad += a * (di[0] * dj[0] + di[1] * dj[1]) + b * (di[0] * dj[1] - di[1] * dj[0]);
            }
        }
        -(lin + 0.5 * quad)
    }

    pub(crate) fn energy_trusted(&self, state: &[[f64; 2]]) -> f64 {
        self.energy_unchecked(state)
    }

    fn check_state(&self, state: &[[f64; 2]]) -> Result<()> {
        if state.len() != self.n {
            return Err(Error::Dimension(format!(
                "expected {} p-dits, got {}",
                self.n,
                state.len()
            )));
        }
        for d in state {
            if self.state_index(*d).is_none() {
                return Err(Error::OffAlphabet {
                    re: d[0],
                    im: d[1],
                    order: self.states.len(),
                });
            }
        }
        Ok(())
    }
}

/// Builds the p-dit model from the complex channel:
///
/// ```text
/// h_i^1  = 2 sum_k (H1_ki y1_k + H2_ki y2_k)
/// h_i^2  = 2 sum_k (H1_ki y2_k - H2_ki y1_k)
/// J11_ij = -2 sum_k (H1_ki H1_kj + H2_ki H2_kj)
/// J12_ij = -2 sum_k (-H1_ki H2_kj + H2_ki H1_kj)
/// ```
///
/// with superscripts 1/2 the real/imaginary parts.
pub fn build_pdit_model(h: &CMatrix, y: &CVector, con: &Constellation) -> Result<PditModel> {
    let (nr, n) = h.shape();
    if y.len() != nr {
        return Err(Error::Dimension(format!(
            "received vector has {} entries, channel has {} rows",
            y.len(),
            nr
        )));
    }
    let mut hd = vec![[0.0; 2]; n];
    for (i, hi) in hd.iter_mut().enumerate() {
        for k in 0..nr {
            let hk = h[(k, i)];
            let yk = y[k];
            hi[0] += hk.re * yk.re + hk.im * yk.im;
            hi[1] += hk.re * yk.im - hk.im * yk.re;
        }
        hi[0] *= 2.0;
        hi[1] *= 2.0;
    }
    let mut j11 = vec![0.0; n * n];
    let mut j12 = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut a = 0.0;
            let mut b = 0.0;
            for k in 0..nr {
                let hi = h[(k, i)];
                let hj = h[(k, j)];
                a += hi.re * hj.re + hi.im * hj.im;
                b += -hi.re * hj.im + hi.im * hj.re;
            }
            j11[i * n + j] = -2.0 * a;
            j12[i * n + j] = -2.0 * b;
        }
    }
    let states = con.alphabet().iter().map(|p| [p.re, p.im]).collect();
    Ok(PditModel {
        n,
        j11,
        j12,
        h: hd,
        states,
    })
}

/// Evaluates the p-dit Hamiltonian; every `d_i` must be an allowed state.
pub fn pdit_energy(state: &[[f64; 2]], model: &PditModel) -> Result<f64> {
    model.check_state(state)?;
    Ok(model.energy_unchecked(state))
}

/// `pdit_energy(state with d1 at i) - pdit_energy(state)`, in O(N) via the local field.
pub fn pdit_delta_energy(i: usize, d0: [f64; 2], d1: [f64; 2], state: &[[f64; 2]], model: &PditModel) -> f64 {
    let field = model.local_field(i, state);
    model.delta_with_field(i, d0, d1, field)
}

/// Symbols as p-dit values.
pub fn symbols_to_pdits(x: &[Complex64]) -> Vec<[f64; 2]> {
    x.iter().map(|v| [v.re, v.im]).collect()
}

pub fn pdits_to_symbols(d: &[[f64; 2]]) -> Vec<Complex64> {
    d.iter().map(|v| Complex64::new(v[0], v[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, realify, residual_energy, stack_symbols};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_symbols(rng: &mut ChaCha8Rng, con: &Constellation, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| con.alphabet()[rng.random_range(0..con.order())])
            .collect()
    }

    #[test]
    fn transform_for_qam4_is_identity() {
        let t = TransformSpec::new(3, 4).unwrap();
        assert_eq!(t.bits_per_axis(), 1);
        assert_eq!(t.t_matrix(), DMatrix::identity(6, 6));
        assert!(TransformSpec::new(3, 2).is_err());
    }

    #[test]
    fn qam16_weights_and_levels() {
        let t = TransformSpec::new(1, 16).unwrap();
        assert_eq!(t.weights(), &[2.0, 1.0]);
        // spin layout: [re_b0, im_b0, re_b1, im_b1]
        let level = |s1: f64, s2: f64| t.apply(&[s1, 0.0, s2, 0.0])[0];
        assert_eq!(level(1.0, 1.0), 3.0);
        assert_eq!(level(1.0, -1.0), 1.0);
        assert_eq!(level(-1.0, 1.0), -1.0);
        assert_eq!(level(-1.0, -1.0), -3.0);
    }

    #[test]
    fn axis_image_is_pam() {
        for m in [4usize, 16, 64, 256] {
            let con = Constellation::new(m).unwrap();
            let t = TransformSpec::new(1, m).unwrap();
            let b = t.bits_per_axis();
            let mut image: Vec<f64> = (0..1usize << b)
                .map(|mask| {
                    t.weights()
                        .iter()
                        .enumerate()
                        .map(|(i, w)| w * if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                        .sum()
                })
                .collect();
            image.sort_by(f64::total_cmp);
            assert_eq!(image, con.pam_levels());
        }
    }

    #[test]
    fn spin_symbol_conversions() {
        let con16 = Constellation::new(16).unwrap();
        let enc = SpinEncoding::new(1, 16).unwrap();
        let s = enc.symbols_to_spins(&[c(-1.0, 3.0)], &con16).unwrap();
        assert_eq!((s[0], s[2]), (-1.0, 1.0));
        assert_eq!((s[1], s[3]), (1.0, 1.0));

        let enc4 = SpinEncoding::new(1, 4).unwrap();
        assert_eq!(enc4.spins_to_symbols(&[1.0, -1.0]).unwrap(), vec![c(1.0, -1.0)]);
        assert!(enc4.spins_to_symbols(&[1.0]).is_err());

        let bpsk = SpinEncoding::new(3, 2).unwrap();
        let con2 = Constellation::new(2).unwrap();
        let x = vec![c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(bpsk.symbols_to_spins(&x, &con2).unwrap(), vec![1.0, -1.0, 1.0]);
        assert_eq!(bpsk.spins_to_symbols(&[1.0, -1.0, 1.0]).unwrap(), x);
        assert!(enc.symbols_to_spins(&[c(0.0, 1.0)], &con16).is_err());
    }

    #[test]
    fn spin_round_trip_exhaustive_single_symbol() {
        for m in [2usize, 4, 16, 64, 256] {
            let con = Constellation::new(m).unwrap();
            let enc = SpinEncoding::new(1, m).unwrap();
            for &p in con.alphabet() {
                let s = enc.symbols_to_spins(&[p], &con).unwrap();
                assert!(s.iter().all(|v| v.abs() == 1.0));
                assert_eq!(enc.spins_to_symbols(&s).unwrap(), vec![p]);
            }
        }
    }

    #[test]
    fn spin_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in [2usize, 4, 16, 64, 256] {
            let con = Constellation::new(m).unwrap();
            for _ in 0..2000 {
                let n = rng.random_range(1..6);
                let enc = SpinEncoding::new(n, m).unwrap();
                let x = random_symbols(&mut rng, &con, n);
                let s = enc.symbols_to_spins(&x, &con).unwrap();
                assert_eq!(s.len(), n * con.bits_per_symbol());
                assert_eq!(enc.spins_to_symbols(&s).unwrap(), x);
            }
        }
    }

    #[test]
    fn bpsk_scalar_model() {
        let rc = RealizedChannel {
            h_real: DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            y_real: nalgebra::DVector::from_vec(vec![0.5, 0.0]),
            bpsk_mode: true,
        };
        let m = build_binary_model(&rc, &SpinEncoding::Bpsk { n: 1 }).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.coupling(0, 0), 0.0);
        assert_eq!(m.bias(), &[1.0]);
        assert!((m.residual(&[1.0]) - 0.25).abs() < 1e-15);
        assert!((m.residual(&[-1.0]) - 2.25).abs() < 1e-15);
    }

    #[test]
    fn binary_energy_small_cases() {
        let zero = BinaryIsingModel::from_parts(vec![0.0; 4], vec![0.0; 2], 0.0).unwrap();
        assert_eq!(zero.energy(&[1.0, -1.0]), 0.0);
        let ferro = BinaryIsingModel::from_parts(vec![0.0, 2.0, 2.0, 0.0], vec![0.0; 2], 0.0).unwrap();
        assert_eq!(ferro.energy(&[1.0, 1.0]), -2.0);
        assert!(BinaryIsingModel::from_parts(vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 2], 0.0).is_err());
        assert!(BinaryIsingModel::from_parts(vec![0.0, 1.0, 2.0, 0.0], vec![0.0; 2], 0.0).is_err());
    }

    #[test]
    fn binary_model_matches_residual_qam4() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let con = Constellation::new(4).unwrap();
        let h = generate_channel(8, 8, 21);
        let y = CVector::from_iterator(8, (0..8).map(|_| c(rng.random(), rng.random())));
        let enc = SpinEncoding::new(8, 4).unwrap();
        let model = build_binary_model(&realify(&h, &y, false), &enc).unwrap();
        for _ in 0..32 {
            let s: Vec<f64> = (0..16).map(|_| if rng.random() { 1.0 } else { -1.0 }).collect();
            let x = enc.spins_to_symbols(&s).unwrap();
            let direct = residual_energy(&h, &y, &x);
            assert!((model.residual(&s) - direct).abs() <= 1e-9 * direct.max(1.0));
            let _ = &con;
        }
    }

    #[test]
    fn binary_model_structure() {
        let h = generate_channel(4, 4, 2);
        let y1 = CVector::from_element(4, c(1.0, 2.0));
        let y2 = CVector::from_element(4, c(-3.0, 0.5));
        let enc = SpinEncoding::new(4, 16).unwrap();
        let m1 = build_binary_model(&realify(&h, &y1, false), &enc).unwrap();
        let m2 = build_binary_model(&realify(&h, &y2, false), &enc).unwrap();
        assert_eq!(m1.j, m2.j);
        assert_ne!(m1.h, m2.h);
        let n = m1.n();
        for a in 0..n {
            assert_eq!(m1.coupling(a, a), 0.0);
            for b in 0..n {
                assert_eq!(m1.coupling(a, b), m1.coupling(b, a));
            }
        }
        assert!(build_binary_model(&realify(&h, &y1, true), &enc).is_err());
    }

    #[test]
    fn binary_argmin_matches_residual_argmin() {
        let con = Constellation::new(16).unwrap();
        let h = generate_channel(2, 2, 5);
        let y = CVector::from_vec(vec![c(0.7, -2.1), c(1.9, 3.3)]);
        let enc = SpinEncoding::new(2, 16).unwrap();
        let model = build_binary_model(&realify(&h, &y, false), &enc).unwrap();
        let n = model.n();
        let mut best_ising = (f64::INFINITY, 0usize);
        for mask in 0..1usize << n {
            let s: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            let e = model.energy(&s);
            if e < best_ising.0 {
                best_ising = (e, mask);
            }
        }
        let mut best_res = (f64::INFINITY, vec![]);
        for &a in con.alphabet() {
            for &b in con.alphabet() {
                let r = residual_energy(&h, &y, &[a, b]);
                if r < best_res.0 {
                    best_res = (r, vec![a, b]);
                }
            }
        }
        let mask = best_ising.1;
        let s: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
        assert_eq!(enc.spins_to_symbols(&s).unwrap(), best_res.1);
    }

    #[test]
    fn pdit_scalar_values() {
        let con = Constellation::new(16).unwrap();
        let h = CMatrix::from_element(1, 1, c(1.0, 0.0));
        let y = CVector::from_element(1, c(3.0, 1.0));
        let m = build_pdit_model(&h, &y, &con).unwrap();
        assert_eq!(m.bias(), &[[6.0, 2.0]]);
        assert_eq!(m.j11(), &[-2.0]);
        assert_eq!(m.j12(), &[0.0]);
        assert_eq!(pdit_energy(&[[3.0, 1.0]], &m).unwrap(), -10.0);
        assert_eq!(pdit_energy(&[[1.0, 1.0]], &m).unwrap(), -6.0);
        let delta = pdit_delta_energy(0, [3.0, 1.0], [1.0, 1.0], &[[3.0, 1.0]], &m);
        assert_eq!(delta, 4.0);
        assert_eq!(pdit_delta_energy(0, [3.0, 1.0], [3.0, 1.0], &[[3.0, 1.0]], &m), 0.0);
        assert!(pdit_energy(&[[2.0, 1.0]], &m).is_err());
        assert!(pdit_energy(&[], &m).is_err());
    }

    #[test]
    fn pdit_coupling_depends_on_channel_only() {
        let con = Constellation::new(4).unwrap();
        let h = generate_channel(5, 5, 9);
        let a = build_pdit_model(&h, &CVector::from_element(5, c(1.0, 0.0)), &con).unwrap();
        let b = build_pdit_model(
            &h,
            &CVector::from_element(5, c(0.0, -4.0)),
            &Constellation::new(64).unwrap(),
        )
        .unwrap();
        assert_eq!(a.j11(), b.j11());
        assert_eq!(a.j12(), b.j12());
        assert_ne!(a.bias(), b.bias());
        let n = a.n();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(a.j11()[i * n + j], a.j11()[j * n + i]);
                assert_eq!(a.j12()[i * n + j], -a.j12()[j * n + i]);
            }
        }
    }

    #[test]
    fn zero_channel_has_zero_pdit_energy() {
        let con = Constellation::new(16).unwrap();
        let h = CMatrix::zeros(3, 3);
        let y = CVector::from_element(3, c(1.0, -2.0));
        let m = build_pdit_model(&h, &y, &con).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let d = symbols_to_pdits(&random_symbols(&mut rng, &con, 3));
            assert_eq!(pdit_energy(&d, &m).unwrap(), 0.0);
        }
    }

    #[test]
    fn pdit_energy_matches_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for trial in 0..100u64 {
            let m = [2usize, 4, 16, 64][trial as usize % 4];
            let con = Constellation::new(m).unwrap();
            let n = 1 + trial as usize % 7;
            let h = generate_channel(n, n, trial);
            let y = CVector::from_iterator(
                n,
                (0..n).map(|_| c(rng.random::<f64>() * 8.0 - 4.0, rng.random::<f64>() * 8.0 - 4.0)),
            );
            let model = build_pdit_model(&h, &y, &con).unwrap();
            let x = random_symbols(&mut rng, &con, n);
            let e = pdit_energy(&symbols_to_pdits(&x), &model).unwrap();
            let target = residual_energy(&h, &y, &x) - y.norm_squared();
            assert!((e - target).abs() <= 1e-9 * target.abs().max(1.0), "{e} vs {target}");
        }
    }

    #[test]
    fn pdit_delta_matches_direct_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let con = Constellation::new(16).unwrap();
        for inst in 0..20u64 {
            let n = 16;
            let h = generate_channel(n, n, 100 + inst);
            let y = CVector::from_iterator(
                n,
                (0..n).map(|_| c(rng.random::<f64>() * 10.0 - 5.0, rng.random::<f64>() * 10.0 - 5.0)),
            );
            let model = build_pdit_model(&h, &y, &con).unwrap();
            let mut state = symbols_to_pdits(&random_symbols(&mut rng, &con, n));
            for _ in 0..500 {
                let i = rng.random_range(0..n);
                let d1 = model.states()[rng.random_range(0..con.order())];
                let before = pdit_energy(&state, &model).unwrap();
                let delta = pdit_delta_energy(i, state[i], d1, &state, &model);
                let d0 = state[i];
                state[i] = d1;
                let after = pdit_energy(&state, &model).unwrap();
                let direct = after - before;
                assert!((delta - direct).abs() <= 1e-9 * before.abs().max(after.abs()).max(1.0));
                if rng.random::<f64>() < 0.5 {
                    state[i] = d0;
                }
            }
        }
    }

    #[test]
    fn encodings_agree_on_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for m in [2usize, 4, 16, 64] {
            let con = Constellation::new(m).unwrap();
            let n = 4;
            let h = generate_channel(n, n, m as u64);
            let y = CVector::from_iterator(n, (0..n).map(|_| c(rng.random(), rng.random())));
            let enc = SpinEncoding::new(n, m).unwrap();
            let bm = build_binary_model(&realify(&h, &y, con.is_bpsk()), &enc).unwrap();
            let pm = build_pdit_model(&h, &y, &con).unwrap();
            for _ in 0..20 {
                let x = random_symbols(&mut rng, &con, n);
                let s = enc.symbols_to_spins(&x, &con).unwrap();
                let lhs = bm.residual(&s);
                let rhs = pdit_energy(&symbols_to_pdits(&x), &pm).unwrap() + y.norm_squared();
                assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
                let xr = stack_symbols(&x, con.is_bpsk());
                assert_eq!(xr.len(), enc.matrix().nrows());
            }
        }
    }
}
