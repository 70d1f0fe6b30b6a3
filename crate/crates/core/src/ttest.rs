//! Benchmark volatility-jump t-test built on pre/post spot variances.

use crate::error::{Error, Result};
use crate::stats_core::SplitSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestOutcome {
    pub sigma2_pre: f64,
    pub sigma2_post: f64,
    pub tstat: f64,
    /// Two-sided standard-normal critical value at the chosen level.
    pub critical: f64,
    pub rejected: bool,
}

fn mean_square(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64
}

/// Mean of squared observations before and after the event.
pub fn spot_variances(s: &SplitSample) -> (f64, f64) {
    (mean_square(s.pre()), mean_square(s.post()))
}

/// `sqrt(k) (post - pre) / sqrt(2 post^2 + 2 pre^2)` on the spot variances,
/// compared with two-sided N(0,1) critical values.
pub fn t_test(s: &SplitSample, alpha: f64) -> Result<TTestOutcome> {
    if !s.is_balanced() {
        return Err(Error::InvalidInput(format!(
            "the spot-variance t-test needs equal windows, got {} and {}",
            s.k1(),
            s.k2()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let (pre, post) = spot_variances(s);
    if pre == 0.0 && post == 0.0 {
        return Err(Error::Degenerate(
            "both spot variances are zero; the t-statistic is undefined".into(),
        ));
    }
    let k = s.k1() as f64;
    let tstat = k.sqrt() * (post - pre) / (2.0 * post * post + 2.0 * pre * pre).sqrt();
    let critical = normal_quantile(1.0 - alpha / 2.0)?;
    Ok(TTestOutcome {
        sigma2_pre: pre,
        sigma2_post: post,
        tstat,
        critical,
        rejected: tstat.abs() > critical,
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

const ACKLAM_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACKLAM_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACKLAM_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACKLAM_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Inverse standard normal CDF: Acklam's rational approximation followed by
/// one Newton step on `normal_cdf`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!(
            "normal quantile needs p in (0, 1), got {p}"
        )));
    }
    let (a, b, c, d) = (ACKLAM_A, ACKLAM_B, ACKLAM_C, ACKLAM_D);
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    };
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    Ok(x - (normal_cdf(x) - p) / density)
}
