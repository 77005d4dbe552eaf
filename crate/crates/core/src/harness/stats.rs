//! Binomial confidence bounds for bit-error rates.

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Zero-error upper bound `-ln(1 - confidence) / n_bits`.
///
/// This is the one-sided bound on the error probability when no error was
/// observed in `n_bits` independent trials. Returns infinity for `n_bits = 0`.
pub fn ber_upper_bound(n_bits: u64, confidence: f64) -> f64 {
    if n_bits == 0 {
        return f64::INFINITY;
    }
    -(1.0 - confidence).ln() / n_bits as f64
}

/// Wilson score interval for `errors` successes in `bits` trials.
pub fn wilson_interval(errors: u64, bits: u64, z: f64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 1.0);
    }
    let n = bits as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// 95% interval used throughout the harness: Wilson, except that the upper end
/// at zero observed errors is [`ber_upper_bound`].
pub fn ber_interval_95(errors: u64, bits: u64) -> (f64, f64) {
    if errors == 0 {
        return (0.0, ber_upper_bound(bits, 0.95));
    }
    wilson_interval(errors, bits, Z_95)
}

/// Whether two closed intervals intersect.
pub fn intervals_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}
