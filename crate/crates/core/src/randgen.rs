//! Seeded random streams and the samplers built on them.
//!
//! # Generator
//!
//! [`SeededStream`] is a counter-based generator. A stream is a 64-bit key
//! plus a 64-bit counter; the `n`-th output (`n = 1, 2, ...`) is
//!
//! ```text
//! out_n = mix(key + n * GAMMA)            (wrapping arithmetic)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! and `GAMMA = 0x9E3779B97F4A7C15`. A root stream built from `seed` has
//! `key = mix(seed ^ ROOT_SALT)`. The child with index `i` of a stream with
//! key `k` has key `mix(k ^ mix(i * GAMMA ^ CHILD_SALT))` and counter 0; it
//! does not depend on how many values the parent has produced.
//!
//! Floating-point samplers:
//! - uniform: `(out >> 11) * 2^-53`, in `[0, 1)`;
//! - normal: Box–Muller on two uniforms, the second variate cached;
//! - exponential: `-ln(1 - U)`;
//! - symmetric stable: Chambers–Mallows–Stuck, characteristic function
//!   `exp(-|t|^beta)`;
//! - Poisson: sequential inversion below mean 10, Hörmann's PTRS
//!   transformed rejection from 10 upward.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const ROOT_SALT: u64 = 0x5EED_5EED_D1CE_0001;
const CHILD_SALT: u64 = 0xC41D_0000_A5A5_5A5A;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A reproducible, splittable random stream. Single owner; hand child
/// streams to other threads instead of sharing one.
#[derive(Debug, Clone)]
pub struct SeededStream {
    key: u64,
    counter: u64,
    spare_normal: Option<f64>,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self::from_key(mix(seed ^ ROOT_SALT))
    }

    fn from_key(key: u64) -> Self {
        SeededStream {
            key,
            counter: 0,
            spare_normal: None,
        }
    }

    /// Independent substream; a pure function of this stream's key and `index`.
    pub fn child(&self, index: u64) -> Self {
        Self::from_key(mix(self.key ^ mix(index.wrapping_mul(GAMMA) ^ CHILD_SALT)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform integer in `0..n` (Lemire's multiply-and-reject, unbiased).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut m = (self.next_u64() as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = (self.next_u64() as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Uniform draw in `[0, 1)`.
#[inline]
pub fn sample_uniform(stream: &mut SeededStream) -> f64 {
    (stream.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `(0, 1]`.
#[inline]
fn sample_uniform_open_low(stream: &mut SeededStream) -> f64 {
    1.0 - sample_uniform(stream)
}

/// Standard normal draw (Box–Muller; every second call returns the cached
/// sine variate).
pub fn sample_normal(stream: &mut SeededStream) -> f64 {
    if let Some(z) = stream.spare_normal.take() {
        return z;
    }
    let u1 = sample_uniform_open_low(stream);
    let u2 = sample_uniform(stream);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    stream.spare_normal = Some(r * theta.sin());
    r * theta.cos()
}

/// Standard exponential draw.
pub fn sample_exponential(stream: &mut SeededStream) -> f64 {
    -sample_uniform_open_low(stream).ln()
}

/// Symmetric stable draw with characteristic function `exp(-|t|^beta)`.
///
/// `beta = 2` gives `sqrt(2)` times a standard normal, `beta = 1` a standard
/// Cauchy.
pub fn sample_sym_stable(stream: &mut SeededStream, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::InvalidInput(format!(
            "stability index must lie in (0, 2], got {beta}"
        )));
    }
    Ok(sym_stable_unchecked(stream, beta))
}

#[inline]
fn sym_stable_unchecked(stream: &mut SeededStream, beta: f64) -> f64 {
    let v = PI * (sample_uniform(stream) - 0.5);
    let w = sample_exponential(stream);
    if beta == 1.0 {
        return v.tan();
    }
    let bv = beta * v;
    bv.sin() / v.cos().powf(1.0 / beta) * ((v - bv).cos() / w).powf((1.0 - beta) / beta)
}

/// Poisson draw with the given mean.
pub fn sample_poisson(stream: &mut SeededStream, mean: f64) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "Poisson mean must be finite and non-negative, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean < 10.0 {
        return Ok(poisson_inversion(stream, mean));
    }
    Ok(poisson_ptrs(stream, mean))
}

fn poisson_inversion(stream: &mut SeededStream, mean: f64) -> u64 {
    let u = sample_uniform(stream);
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        let next = cdf + p;
        // the tail underflowed; u sits in the last representable sliver
        if next == cdf {
            break;
        }
        cdf = next;
    }
    k
}

fn poisson_ptrs(stream: &mut SeededStream, mean: f64) -> u64 {
    let smu = mean.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let log_mean = mean.ln();
    loop {
        let u = sample_uniform(stream) - 0.5;
        let v = sample_uniform(stream);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * log_mean - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Shock process driving the simulated price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyDriver {
    Brownian,
    /// Symmetric stable with index `beta` in `(1, 2)`; the standardized
    /// per-step draw is redrawn until it lies in `[-trunc_c, trunc_c]`.
    TruncatedStable { beta: f64, trunc_c: f64 },
}

impl LevyDriver {
    pub fn truncated_stable(beta: f64, trunc_c: f64) -> Result<Self> {
        let d = LevyDriver::TruncatedStable { beta, trunc_c };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LevyDriver::Brownian => Ok(()),
            LevyDriver::TruncatedStable { beta, trunc_c } => {
                if !(beta > 1.0 && beta < 2.0) {
                    return Err(Error::InvalidInput(format!(
                        "truncated stable driver needs beta in (1, 2), got {beta}"
                    )));
                }
                if !(trunc_c > 0.0 && trunc_c.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "truncation bound must be positive, got {trunc_c}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Stability index; 2 for Brownian motion.
    pub fn beta(&self) -> f64 {
        match *self {
            LevyDriver::Brownian => 2.0,
            LevyDriver::TruncatedStable { beta, .. } => beta,
        }
    }

    /// Short label used in tables and CSV files, e.g. `brownian` or
    /// `stable(1.5,C=10)`.
    pub fn label(&self) -> String {
        match *self {
            LevyDriver::Brownian => "brownian".to_string(),
            LevyDriver::TruncatedStable { beta, trunc_c } => {
                format!("stable({beta},C={trunc_c})")
            }
        }
    }

    /// Draw of the standardized increment: N(0,1) or a truncated stable draw.
    #[inline]
    pub(crate) fn sample_standardized(&self, stream: &mut SeededStream) -> f64 {
        match *self {
            LevyDriver::Brownian => sample_normal(stream),
            LevyDriver::TruncatedStable { beta, trunc_c } => loop {
                let z = sym_stable_unchecked(stream, beta);
                if z.abs() <= trunc_c {
                    break z;
                }
            },
        }
    }
}

/// Driver increment over a step of length `dt` (in days): `dt^(1/beta) * Z`.
pub fn sample_driver_increment(
    stream: &mut SeededStream,
    driver: &LevyDriver,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    driver.validate()?;
    Ok(dt.powf(1.0 / driver.beta()) * driver.sample_standardized(stream))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededStream::new(42);
        let mut b = SeededStream::new(42);
        let xa: Vec<f64> = (0..10).map(|_| sample_normal(&mut a)).collect();
        let xb: Vec<f64> = (0..10).map(|_| sample_normal(&mut b)).collect();
        assert_eq!(xa, xb);
        assert_ne!(SeededStream::new(43).next_u64(), SeededStream::new(42).next_u64());
    }

    #[test]
    fn child_ignores_parent_position() {
        let mut p = SeededStream::new(7);
        let c0 = p.child(3).next_u64();
        p.next_u64();
        assert_eq!(p.child(3).next_u64(), c0);
        assert_ne!(p.child(4).next_u64(), c0);
    }

    #[test]
    fn children_do_not_collide() {
        let root = SeededStream::new(2024);
        let mut seen = std::collections::HashSet::with_capacity(1_000_000);
        for i in 0..1000 {
            let mut c = root.child(i);
            for _ in 0..1000 {
                assert!(seen.insert(c.next_u64()));
            }
        }
    }

    #[test]
    fn normal_moments() {
        let mut s = SeededStream::new(1);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_normal(&mut s)).collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 0.005, "mean {m}");
        assert!(v > 0.994 && v < 1.006, "var {v}");
    }

    #[test]
    fn exponential_mean() {
        let mut s = SeededStream::new(2);
        let m = (0..1_000_000).map(|_| sample_exponential(&mut s)).sum::<f64>() / 1e6;
        assert!((m - 1.0).abs() < 0.003, "mean {m}");
    }

    #[test]
    fn uniform_range_and_below() {
        let mut s = SeededStream::new(3);
        for _ in 0..10_000 {
            let u = sample_uniform(&mut s);
            assert!((0.0..1.0).contains(&u));
        }
        let mut counts = [0usize; 7];
        for _ in 0..70_000 {
            counts[s.below(7) as usize] += 1;
        }
        // 10k expected per bin, sd ~93
        assert!(counts.iter().all(|&c| (9_600..10_400).contains(&c)), "{counts:?}");
    }

    #[test]
    fn poisson_zero_and_means() {
        let mut s = SeededStream::new(4);
        assert!((0..1000).all(|_| sample_poisson(&mut s, 0.0).unwrap() == 0));
        let m = (0..1_000_000)
            .map(|_| sample_poisson(&mut s, 4.0).unwrap() as f64)
            .sum::<f64>()
            / 1e6;
        assert!((m - 4.0).abs() < 0.006, "mean {m}");
        // rejection branch: mean and variance both 25
        let xs: Vec<f64> = (0..400_000)
            .map(|_| sample_poisson(&mut s, 25.0).unwrap() as f64)
            .collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 25.0).abs() < 0.04, "mean {m}");
        assert!((v - 25.0).abs() < 0.4, "var {v}");
        assert!(sample_poisson(&mut s, -1.0).is_err());
    }

    #[test]
    fn stable_rejects_bad_index() {
        let mut s = SeededStream::new(5);
        assert!(sample_sym_stable(&mut s, 0.0).is_err());
        assert!(sample_sym_stable(&mut s, 2.5).is_err());
        assert!(sample_sym_stable(&mut s, f64::NAN).is_err());
    }

    #[test]
    fn driver_validation() {
        assert!(LevyDriver::truncated_stable(1.5, 10.0).is_ok());
        assert!(LevyDriver::truncated_stable(2.0, 10.0).is_err());
        assert!(LevyDriver::truncated_stable(1.5, 0.0).is_err());
        let mut s = SeededStream::new(6);
        assert!(sample_driver_increment(&mut s, &LevyDriver::Brownian, 0.0).is_err());
    }

    #[test]
    fn brownian_increment_scale() {
        let mut s = SeededStream::new(8);
        let dt: f64 = 1.0 / 23_400.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| sample_driver_increment(&mut s, &LevyDriver::Brownian, dt).unwrap())
            .collect();
        let (_, v) = mean_var(&xs);
        assert!((v / dt - 1.0).abs() < 0.01, "scaled var {}", v / dt);
    }

    #[test]
    fn truncated_stable_respects_bound() {
        let mut s = SeededStream::new(9);
        let d = LevyDriver::truncated_stable(1.5, 10.0).unwrap();
        let dt: f64 = 1.0 / 23_400.0;
        let scale = dt.powf(1.0 / 1.5);
        for _ in 0..200_000 {
            let x = sample_driver_increment(&mut s, &d, dt).unwrap();
            assert!((x / scale).abs() <= 10.0 + 1e-9);
        }
    }

    #[test]
    fn truncated_stable_is_symmetric() {
        let mut s = SeededStream::new(10);
        let d = LevyDriver::truncated_stable(1.5, 10.0).unwrap();
        let xs: Vec<f64> = (0..1_000_000).map(|_| d.sample_standardized(&mut s)).collect();
        let (m, v) = mean_var(&xs);
        let skew = xs.iter().map(|x| ((x - m) / v.sqrt()).powi(3)).sum::<f64>() / xs.len() as f64;
        assert!(skew.abs() < 0.02, "skewness {skew}");
    }
}
