//! BPSK and square M-QAM alphabets with Gray-coded bit labels.
//!
//! QAM points sit on the unnormalized odd-integer grid `{a + bi : a, b in PAM(L)}`
//! with `L = sqrt(M)` and `PAM(L) = {-(L-1), ..., -1, +1, ..., L-1}`. Each
//! symbol label is split in two halves: the first half selects the real level,
//! the second half the imaginary level. Within an axis the bits pass through a
//! binary-reflected Gray code, so axis-adjacent points differ in one bit.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LEVEL_TOL: f64 = 1e-9;

/// Binary-reflected Gray code of `rank`.
pub fn gray(rank: usize) -> usize {
    rank ^ (rank >> 1)
}

/// Inverse of [`gray`].
pub fn gray_inverse(mut code: usize) -> usize {
    let mut rank = code;
    while code > 1 {
        code >>= 1;
        rank ^= code;
    }
    rank
}

/// A modulation alphabet together with its Gray labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    /// Points per axis (2 for BPSK and 4-QAM, 4 for 16-QAM, ...).
    side: usize,
    /// `points[label]` is the symbol carrying bit label `label`.
    points: Vec<Complex64>,
    levels: Vec<f64>,
    symbol_energy: f64,
}

impl Constellation {
    /// Builds the constellation of order `order` (2 for BPSK, or 4, 16, 64, 256, ...).
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidOrder(order));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        if order != 2 && !bits_per_symbol.is_multiple_of(2) {
            return Err(Error::InvalidOrder(order));
        }
        if bits_per_symbol > 24 {
            return Err(Error::InvalidOrder(order));
        }

        let side = if order == 2 { 2 } else { 1 << (bits_per_symbol / 2) };
        let levels: Vec<f64> = (0..side).map(|r| level_of_rank(r, side)).collect();

        let points: Vec<Complex64> = if order == 2 {
            vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]
        } else {
            let half = bits_per_symbol / 2;
            let mask = side - 1;
            (0..order)
                .map(|label| {
                    let re = levels[gray_inverse(label >> half)];
                    let im = levels[gray_inverse(label & mask)];
                    Complex64::new(re, im)
                })
                .collect()
        };
        let symbol_energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;

        Ok(Self {
            order,
            bits_per_symbol,
            side,
            points,
            levels,
            symbol_energy,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn is_bpsk(&self) -> bool {
        self.order == 2
    }

    /// Number of amplitude levels per real axis.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Alphabet indexed by bit label.
    pub fn alphabet(&self) -> &[Complex64] {
        &self.points
    }

    /// PAM levels of one axis in ascending order. For BPSK this is the real axis.
    pub fn pam_levels(&self) -> &[f64] {
        &self.levels
    }

    /// Mean symbol energy `Es` over the alphabet.
    pub fn symbol_energy(&self) -> f64 {
        self.symbol_energy
    }

    /// Rank (0-based, ascending) of an axis amplitude, if it is a PAM level.
    pub fn level_rank(&self, level: f64) -> Option<usize> {
        let r = (level + (self.side as f64 - 1.0)) / 2.0;
        let rr = r.round();
        if (r - rr).abs() > LEVEL_TOL / 2.0 || rr < 0.0 || rr >= self.side as f64 {
            return None;
        }
        Some(rr as usize)
    }

    /// Bit label of an alphabet point.
    pub fn label_of(&self, symbol: Complex64) -> Result<usize> {
        let off = || Error::OffAlphabet {
            re: symbol.re,
            im: symbol.im,
            order: self.order,
        };
        if self.is_bpsk() {
            if symbol.im.abs() > LEVEL_TOL {
                return Err(off());
            }
            return self.level_rank(symbol.re).ok_or_else(off);
        }
        let re = self.level_rank(symbol.re).ok_or_else(off)?;
        let im = self.level_rank(symbol.im).ok_or_else(off)?;
        Ok((gray(re) << (self.bits_per_symbol / 2)) | gray(im))
    }

    /// Maps bits (MSB first within each symbol) to symbols.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol;
        if !bits.len().is_multiple_of(k) {
            return Err(Error::BitLength {
                len: bits.len(),
                bits_per_symbol: k,
            });
        }
        Ok(bits
            .chunks(k)
            .map(|group| {
                let label = group.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
                self.points[label]
            })
            .collect())
    }

    /// Exact inverse of [`Constellation::modulate`].
    pub fn demodulate(&self, symbols: &[Complex64]) -> Result<Vec<u8>> {
        let k = self.bits_per_symbol;
        let mut bits = Vec::with_capacity(symbols.len() * k);
        for &s in symbols {
            let label = self.label_of(s)?;
            bits.extend((0..k).rev().map(|shift| ((label >> shift) & 1) as u8));
        }
        Ok(bits)
    }

    /// Nearest alphabet point, decided per axis. Ties go to the more positive level.
    pub fn quantize(&self, z: Complex64) -> Result<Complex64> {
        if !z.re.is_finite() {
            return Err(Error::NonFinite(z.re));
        }
        if !z.im.is_finite() {
            return Err(Error::NonFinite(z.im));
        }
        let re = self.nearest_level(z.re);
        let im = if self.is_bpsk() { 0.0 } else { self.nearest_level(z.im) };
        Ok(Complex64::new(re, im))
    }

    /// Nearest PAM level of one axis (ties toward the larger level).
    pub fn nearest_level(&self, v: f64) -> f64 {
        let max_rank = (self.side - 1) as f64;
        let rank = ((v + max_rank) / 2.0 + 0.5).floor().clamp(0.0, max_rank);
        2.0 * rank - max_rank
    }
}

fn level_of_rank(rank: usize, side: usize) -> f64 {
    2.0 * rank as f64 - (side as f64 - 1.0)
}
