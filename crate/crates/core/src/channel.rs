//! Random MIMO channels, AWGN transmission and the real-valued channel model.
//!
//! All randomness is driven by explicit 64-bit seeds. A master seed is expanded
//! into independent per-role streams with [`derive_seed`].

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constellation::Constellation;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Stream tags mixed into derived seeds.
pub mod role {
    pub const CHANNEL: u64 = 0x4348_414e;
    pub const MESSAGE: u64 = 0x4d53_4753;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const SOLVER: u64 = 0x534f_4c56;
    pub const REPLICA: u64 = 0x5245_504c;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based seed derivation: `master` is folded with every word of
/// `stream` through the SplitMix64 finalizer. Distinct `stream` tuples give
/// statistically independent seeds.
pub fn derive_seed(master: u64, stream: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for (pos, &word) in stream.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(word.wrapping_add((pos as u64) << 56)));
    }
    h
}

/// Seeds used to draw one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InstanceSeeds {
    pub channel: u64,
    pub message: u64,
    pub noise: u64,
}

impl InstanceSeeds {
    /// Seeds of message `message_index` sent over channel `channel_index`.
    pub fn derive(master: u64, channel_index: u64, message_index: u64) -> Self {
        Self {
            channel: derive_seed(master, &[role::CHANNEL, channel_index]),
            message: derive_seed(master, &[role::MESSAGE, channel_index, message_index]),
            noise: derive_seed(master, &[role::NOISE, channel_index, message_index]),
        }
    }
}

/// i.i.d. Rayleigh channel: every entry is CN(0, 1).
pub fn generate_channel(n_rx: usize, n_tx: usize, seed: u64) -> CMatrix {
    assert!(n_rx >= n_tx && n_tx >= 1, "need n_rx >= n_tx >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let entries: Vec<Complex64> = (0..n_rx * n_tx)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    CMatrix::from_row_slice(n_rx, n_tx, &entries)
}

/// Total complex noise variance for a target Eb/N0:
/// `sigma^2 = N_T * Es / (log2(M) * 10^(ebn0/10))`.
pub fn noise_sigma_sq(n_tx: usize, symbol_energy: f64, order: usize, ebn0_db: f64) -> f64 {
    let bits = (order as f64).log2();
    n_tx as f64 * symbol_energy / (bits * 10f64.powf(ebn0_db / 10.0))
}

/// Uniformly random message bits.
pub fn random_bits(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

/// `y = H x0 + n`, with each complex noise sample of total variance `sigma_sq`.
///
/// The unit-variance noise realization depends only on `seed`, so the same
/// seed at different `sigma_sq` gives scaled copies of one noise vector.
pub fn transmit(h: &CMatrix, x0: &CVector, sigma_sq: f64, seed: u64) -> Result<CVector> {
    if h.ncols() != x0.len() {
        return Err(Error::Dimension(format!(
            "channel has {} columns but {} symbols were sent",
            h.ncols(),
            x0.len()
        )));
    }
    if !(sigma_sq >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise variance {sigma_sq}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (sigma_sq / 2.0).sqrt();
    let mut y = h * x0;
    for v in y.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(re * scale, im * scale);
    }
    Ok(y)
}

/// `||y - H x||^2`.
pub fn residual_energy(h: &CMatrix, y: &CVector, x: &[Complex64]) -> f64 {
    let xv = CVector::from_column_slice(x);
    (y - h * xv).norm_squared()
}

/// Real-valued channel model.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedChannel {
    /// `[[Re H, -Im H], [Im H, Re H]]` for QAM, `[Re H; Im H]` for BPSK.
    pub h_real: DMatrix<f64>,
    /// `[Re y; Im y]`.
    pub y_real: DVector<f64>,
    pub bpsk_mode: bool,
}

/// Builds the stacked real representation of `(H, y)`.
pub fn realify(h: &CMatrix, y: &CVector, bpsk: bool) -> RealizedChannel {
    let (nr, nt) = h.shape();
    let cols = if bpsk { nt } else { 2 * nt };
    let mut hr = DMatrix::<f64>::zeros(2 * nr, cols);
    for r in 0..nr {
        for c in 0..nt {
            let v = h[(r, c)];
            hr[(r, c)] = v.re;
            hr[(r + nr, c)] = v.im;
            if !bpsk {
                hr[(r, c + nt)] = -v.im;
                hr[(r + nr, c + nt)] = v.re;
            }
        }
    }
    let yr = DVector::from_iterator(2 * nr, y.iter().map(|v| v.re).chain(y.iter().map(|v| v.im)));
    RealizedChannel {
        h_real: hr,
        y_real: yr,
        bpsk_mode: bpsk,
    }
}

/// Real stacking of a symbol vector matching [`realify`]: `x` for BPSK, `[Re x; Im x]` otherwise.
pub fn stack_symbols(x: &[Complex64], bpsk: bool) -> DVector<f64> {
    if bpsk {
        DVector::from_iterator(x.len(), x.iter().map(|v| v.re))
    } else {
        DVector::from_iterator(2 * x.len(), x.iter().map(|v| v.re).chain(x.iter().map(|v| v.im)))
    }
}

/// One detection problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoInstance {
    pub n_tx: usize,
    pub n_rx: usize,
    pub order: usize,
    pub channel: CMatrix,
    pub tx_bits: Vec<u8>,
    pub tx_symbols: Vec<Complex64>,
    pub rx_vector: CVector,
    pub sigma_sq: f64,
    pub ebn0_db: f64,
    pub seeds: InstanceSeeds,
}

impl MimoInstance {
    /// Draws channel, message and noise for the given Eb/N0.
    pub fn generate(con: &Constellation, n_rx: usize, n_tx: usize, ebn0_db: f64, seeds: InstanceSeeds) -> Result<Self> {
        if !ebn0_db.is_finite() {
            return Err(Error::NonFinite(ebn0_db));
        }
        let sigma_sq = noise_sigma_sq(n_tx, con.symbol_energy(), con.order(), ebn0_db);
        Self::with_sigma_sq(con, n_rx, n_tx, ebn0_db, sigma_sq, seeds)
    }

    /// Same draws as [`MimoInstance::generate`] with an explicit noise variance
    /// (`0.0` gives a noiseless instance).
    pub fn with_sigma_sq(
        con: &Constellation,
        n_rx: usize,
        n_tx: usize,
        ebn0_db: f64,
        sigma_sq: f64,
        seeds: InstanceSeeds,
    ) -> Result<Self> {
        if n_tx == 0 || n_rx < n_tx {
            return Err(Error::Dimension(format!("need n_rx >= n_tx >= 1, got {n_rx} x {n_tx}")));
        }
        let channel = generate_channel(n_rx, n_tx, seeds.channel);
        let tx_bits = random_bits(n_tx * con.bits_per_symbol(), seeds.message);
        let tx_symbols = con.modulate(&tx_bits)?;
        let x0 = CVector::from_column_slice(&tx_symbols);
        let rx_vector = transmit(&channel, &x0, sigma_sq, seeds.noise)?;
        Ok(Self {
            n_tx,
            n_rx,
            order: con.order(),
            channel,
            tx_bits,
            tx_symbols,
            rx_vector,
            sigma_sq,
            ebn0_db,
            seeds,
        })
    }

    pub fn is_bpsk(&self) -> bool {
        self.order == 2
    }

    pub fn realify(&self) -> RealizedChannel {
        realify(&self.channel, &self.rx_vector, self.is_bpsk())
    }

    pub fn residual(&self, x: &[Complex64]) -> f64 {
        residual_energy(&self.channel, &self.rx_vector, x)
    }

    /// Line-oriented text dump for cross-implementation debugging.
    ///
    /// ```text
    /// mimo-ising-instance v1
    /// n_rx <int>
    /// n_tx <int>
    /// order <int>
    /// ebn0_db <float>
    /// sigma_sq <float>
    /// seed_channel <u64>
    /// seed_message <u64>
    /// seed_noise <u64>
    /// H <row> <col> <re> <im>      one line per entry, row-major
    /// x <index> <re> <im>          transmitted symbols
    /// y <index> <re> <im>          received vector
    /// bits <0/1 string>            transmitted bits
    /// ```
    ///
    /// Floats use the shortest representation that round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mimo-ising-instance v1");
        let _ = writeln!(s, "n_rx {}", self.n_rx);
        let _ = writeln!(s, "n_tx {}", self.n_tx);
        let _ = writeln!(s, "order {}", self.order);
        let _ = writeln!(s, "ebn0_db {}", self.ebn0_db);
        let _ = writeln!(s, "sigma_sq {}", self.sigma_sq);
        let _ = writeln!(s, "seed_channel {}", self.seeds.channel);
        let _ = writeln!(s, "seed_message {}", self.seeds.message);
        let _ = writeln!(s, "seed_noise {}", self.seeds.noise);
        for r in 0..self.n_rx {
            for c in 0..self.n_tx {
                let v = self.channel[(r, c)];
                let _ = writeln!(s, "H {r} {c} {} {}", v.re, v.im);
            }
        }
        for (i, v) in self.tx_symbols.iter().enumerate() {
            let _ = writeln!(s, "x {i} {} {}", v.re, v.im);
        }
        for (i, v) in self.rx_vector.iter().enumerate() {
            let _ = writeln!(s, "y {i} {} {}", v.re, v.im);
        }
        let bits: String = self.tx_bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        let _ = writeln!(s, "bits {bits}");
        s
    }

    /// Parses the format written by [`MimoInstance::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "mimo-ising-instance v1" => {}
            other => return Err(Error::Parse(format!("bad header {other:?}"))),
        }
        let mut n_rx = None;
        let mut n_tx = None;
        let mut order = None;
        let mut ebn0_db = None;
        let mut sigma_sq = None;
        let mut seeds = InstanceSeeds::default();
        let mut h_entries = Vec::new();
        let mut x_entries = Vec::new();
        let mut y_entries = Vec::new();
        let mut bits = Vec::new();

        for line in lines {
            let mut it = line.split_whitespace();
            let key = it.next().unwrap_or_default();
            let rest: Vec<&str> = it.collect();
            match key {
                "n_rx" => n_rx = Some(field::<usize>(&rest, 0, line)?),
                "n_tx" => n_tx = Some(field::<usize>(&rest, 0, line)?),
                "order" => order = Some(field::<usize>(&rest, 0, line)?),
                "ebn0_db" => ebn0_db = Some(field::<f64>(&rest, 0, line)?),
                "sigma_sq" => sigma_sq = Some(field::<f64>(&rest, 0, line)?),
                "seed_channel" => seeds.channel = field(&rest, 0, line)?,
                "seed_message" => seeds.message = field(&rest, 0, line)?,
                "seed_noise" => seeds.noise = field(&rest, 0, line)?,
                "H" => h_entries.push((
                    field::<usize>(&rest, 0, line)?,
                    field::<usize>(&rest, 1, line)?,
                    Complex64::new(field(&rest, 2, line)?, field(&rest, 3, line)?),
                )),
                "x" => x_entries.push((
                    field::<usize>(&rest, 0, line)?,
                    Complex64::new(field(&rest, 1, line)?, field(&rest, 2, line)?),
                )),
                "y" => y_entries.push((
                    field::<usize>(&rest, 0, line)?,
                    Complex64::new(field(&rest, 1, line)?, field(&rest, 2, line)?),
                )),
                "bits" => {
                    let s = rest.first().copied().unwrap_or("");
                    bits = s
                        .chars()
                        .map(|ch| match ch {
                            '0' => Ok(0u8),
                            '1' => Ok(1u8),
                            _ => Err(Error::Parse(format!("bad bit {ch:?}"))),
                        })
                        .collect::<Result<_>>()?;
                }
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }

        let missing = |k: &str| Error::Parse(format!("missing {k}"));
        let n_rx = n_rx.ok_or_else(|| missing("n_rx"))?;
        let n_tx = n_tx.ok_or_else(|| missing("n_tx"))?;
        let order = order.ok_or_else(|| missing("order"))?;
        let mut channel = CMatrix::zeros(n_rx, n_tx);
        let mut filled = vec![false; n_rx * n_tx];
        for (r, c, v) in h_entries {
            if r >= n_rx || c >= n_tx {
                return Err(Error::Parse(format!("H index ({r},{c}) out of range")));
            }
            channel[(r, c)] = v;
            filled[r * n_tx + c] = true;
        }
        if !filled.iter().all(|&f| f) {
            return Err(missing("H entries"));
        }
        let tx_symbols = collect_vector(x_entries, n_tx, "x")?;
        let rx = collect_vector(y_entries, n_rx, "y")?;
        Ok(Self {
            n_tx,
            n_rx,
            order,
            channel,
            tx_bits: bits,
            tx_symbols,
            rx_vector: CVector::from_vec(rx),
            sigma_sq: sigma_sq.ok_or_else(|| missing("sigma_sq"))?,
            ebn0_db: ebn0_db.ok_or_else(|| missing("ebn0_db"))?,
            seeds,
        })
    }
}

fn field<T: FromStr>(rest: &[&str], idx: usize, line: &str) -> Result<T> {
    rest.get(idx)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("malformed line {line:?}")))
}

fn collect_vector(entries: Vec<(usize, Complex64)>, len: usize, name: &str) -> Result<Vec<Complex64>> {
    let mut out = vec![None; len];
    for (i, v) in entries {
        if i >= len {
            return Err(Error::Parse(format!("{name} index {i} out of range")));
        }
        out[i] = Some(v);
    }
    out.into_iter()
        .map(|v| v.ok_or_else(|| Error::Parse(format!("missing {name} entries"))))
        .collect()
}
