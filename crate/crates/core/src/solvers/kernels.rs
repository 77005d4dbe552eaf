//! Branch-free elementary functions for the oscillator inner loops.
//!
//! Written so that loops over slices auto-vectorize; accuracy is within a few
//! ulp of the `std` implementations on the ranges used. The AVX2 entry points
//! run the same scalar arithmetic (Rust never contracts to FMA), so results
//! are bit-identical across instruction sets.

#![allow(clippy::excessive_precision)]

const SHIFTER: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52
const LN2_HI: f64 = 6.931_471_803_691_238_164_9e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

const PIO2_1: f64 = 1.570_796_326_734_125_614_17;
const PIO2_2: f64 = 6.077_100_506_303_965_976_6e-11;
const PIO2_3: f64 = 2.022_266_248_711_166_455_8e-21;

const S1: f64 = -1.666_666_666_666_663_243_48e-1;
const S2: f64 = 8.333_333_333_322_489_461_24e-3;
const S3: f64 = -1.984_126_982_985_794_931_34e-4;
const S4: f64 = 2.755_731_370_707_006_767_89e-6;
const S5: f64 = -2.505_076_025_340_686_341_95e-8;
const S6: f64 = 1.589_690_995_211_550_102_21e-10;

const C1: f64 = 4.166_666_666_666_660_190_37e-2;
const C2: f64 = -1.388_888_888_887_410_957_49e-3;
const C3: f64 = 2.480_158_728_947_672_941_78e-5;
const C4: f64 = -2.755_731_435_139_066_330_35e-7;
const C5: f64 = 2.087_572_321_298_174_827_90e-9;
const C6: f64 = -1.135_964_755_778_819_482_65e-11;

/// Largest argument handled by the fast `sin_cos` reduction.
const SINCOS_LIMIT: f64 = 1e5;

/// `exp(x)` for `x` in `[-700, 0]`.
#[inline(always)]
pub(crate) fn exp_nonpositive(x: f64) -> f64 {
    let kf = x * std::f64::consts::LOG2_E + SHIFTER;
    let k = kf - SHIFTER;
    let r = x - k * LN2_HI - k * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let scale = ((kf.to_bits() as i64 - SHIFTER.to_bits() as i64 + 1023) << 52) as u64;
    p * f64::from_bits(scale)
}

/// `tanh(x)` to within ~4e-16 absolute error.
#[inline(always)]
pub(crate) fn tanh_fast(x: f64) -> f64 {
    let e = exp_nonpositive(-2.0 * x.abs().min(350.0));
    ((1.0 - e) / (1.0 + e)).copysign(x)
}

/// `(sin x, cos x)` for `|x| <= 1e5`.
#[inline(always)]
fn sin_cos_reduced(x: f64) -> (f64, f64) {
    let qf = x * std::f64::consts::FRAC_2_PI + SHIFTER;
    let q = qf - SHIFTER;
    let qi = qf.to_bits() as i64 - SHIFTER.to_bits() as i64;
    let r = x - q * PIO2_1 - q * PIO2_2 - q * PIO2_3;
    let z = r * r;
    let s = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
    let c = 1.0 - 0.5 * z + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
    let (a, b) = if qi & 1 == 0 { (s, c) } else { (c, s) };
    let sin_sign = ((qi & 2) as u64) << 62;
    let cos_sign = (((qi + 1) & 2) as u64) << 62;
    (
        f64::from_bits(a.to_bits() ^ sin_sign),
        f64::from_bits(b.to_bits() ^ cos_sign),
    )
}

/// `cos(x) >= 0`, consistent with [`sin_cos_slice`].
#[inline]
pub(crate) fn cos_nonnegative(x: f64) -> bool {
    if x.abs() <= SINCOS_LIMIT {
        sin_cos_reduced(x).1 >= 0.0
    } else {
        x.cos() >= 0.0
    }
}

/// Element-wise `sin` and `cos` of `x`.
pub(crate) fn sin_cos_slice(x: &[f64], sin: &mut [f64], cos: &mut [f64]) {
    if x.iter().any(|v| !(v.abs() <= SINCOS_LIMIT)) {
        for ((&v, s), c) in x.iter().zip(sin.iter_mut()).zip(cos.iter_mut()) {
            (*s, *c) = v.sin_cos();
        }
        return;
    }
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2.
            unsafe { sin_cos_avx2(x, sin, cos) };
            return;
        }
    }
    sin_cos_generic(x, sin, cos);
}

#[inline(always)]
fn sin_cos_generic(x: &[f64], sin: &mut [f64], cos: &mut [f64]) {
    for ((&v, s), c) in x.iter().zip(sin.iter_mut()).zip(cos.iter_mut()) {
        (*s, *c) = sin_cos_reduced(v);
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn sin_cos_avx2(x: &[f64], sin: &mut [f64], cos: &mut [f64]) {
    sin_cos_generic(x, sin, cos)
}

/// `pair[k] = j[k] * tanh(pair[k])`.
pub(crate) fn coupled_tanh(pair: &mut [f64], j: &[f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2.
            unsafe { coupled_tanh_avx2(pair, j) };
            return;
        }
    }
    coupled_tanh_generic(pair, j);
}

#[inline(always)]
fn coupled_tanh_generic(pair: &mut [f64], j: &[f64]) {
    for (p, &jk) in pair.iter_mut().zip(j) {
        *p = jk * tanh_fast(*p);
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn coupled_tanh_avx2(pair: &mut [f64], j: &[f64]) {
    coupled_tanh_generic(pair, j)
}
