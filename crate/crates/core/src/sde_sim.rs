//! Simulated trading days and state-space scenario generators.
//!
//! The price follows `dP = sigma dL` on a fine Euler mesh. The variance
//! `sigma^2` is `2 V1` (model A) or `V1 + V2` (model B), and both factors are
//! square-root diffusions:
//!
//! ```text
//! dV1 = 0.0116 (0.5 - V1) dt + 0.1023 sqrt(V1) (rho dL + sqrt(1 - rho^2) dB1) + c 1{t = tau}
//! dV2 = 0.6930 (0.5 - V2) dt + 0.7909 sqrt(V2) (rho dL + sqrt(1 - rho^2) dB2) + c 1{t = tau}
//! ```
//!
//! Time is measured in trading days. Factors are stepped with full
//! truncation: drift and diffusion see `max(V, 0)`. The price is resampled
//! every `delta_n` and reported as normalized increments
//! `delta_n^(-1/beta) (P((i+1) delta_n) - P(i delta_n))`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randgen::{sample_normal, sample_poisson, sample_uniform, LevyDriver, SeededStream};
use crate::stats_core::SplitSample;

const KAPPA: [f64; 2] = [0.0116, 0.6930];
const THETA: f64 = 0.5;
const VOL_OF_VOL: [f64; 2] = [0.1023, 0.7909];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VolModel {
    /// `sigma^2 = 2 V1`: slow factor only.
    A,
    /// `sigma^2 = V1 + V2`: slow plus fast factor.
    B,
}

impl std::fmt::Display for VolModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VolModel::A => f.write_str("A"),
            VolModel::B => f.write_str("B"),
        }
    }
}

impl std::str::FromStr for VolModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(VolModel::A),
            "B" | "b" => Ok(VolModel::B),
            _ => Err(Error::InvalidInput(format!("unknown volatility model {s:?} (expected A or B)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub model: VolModel,
    pub driver: LevyDriver,
    /// Jump added to both factors at the event time.
    pub jump_c: f64,
    /// Correlation between price and factor shocks.
    pub rho: f64,
    /// Euler step, in days.
    pub mesh_dt: f64,
    /// Resampling interval, in days.
    pub delta_n: f64,
    pub day_length_minutes: u32,
    /// Event time, in minutes after the open.
    pub event_minute: u32,
    /// Initial `(V1, V2)`.
    pub v0: [f64; 2],
    pub seed: u64,
    /// Days of factor-only evolution before the recorded day.
    pub burn_in_days: u32,
    /// Hold both factors at their initial values (constant volatility).
    pub frozen_factors: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: VolModel::A,
            driver: LevyDriver::Brownian,
            jump_c: 0.0,
            rho: -0.7,
            mesh_dt: 1.0 / 23_400.0,
            delta_n: 1.0 / 390.0,
            day_length_minutes: 390,
            event_minute: 195,
            v0: [0.5, 0.5],
            seed: 0,
            burn_in_days: 0,
            frozen_factors: false,
        }
    }
}

/// Integer ratio `num / den` when it is one up to rounding.
fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let n = r.round();
    (n >= 1.0 && (r - n).abs() <= 1e-6).then_some(n as usize)
}

/// Discretization derived from a validated config.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    steps_per_interval: usize,
    intervals: usize,
    event_index: usize,
}

impl SimConfig {
    fn geometry(&self) -> Result<Geometry> {
        self.driver.validate()?;
        if !(self.mesh_dt > 0.0 && self.delta_n > 0.0) {
            return Err(Error::Config("mesh_dt and delta_n must be positive".into()));
        }
        let steps_per_interval = integer_ratio(self.delta_n, self.mesh_dt)
            .ok_or_else(|| Error::Config("mesh_dt must divide delta_n".into()))?;
        let intervals = integer_ratio(1.0, self.delta_n)
            .ok_or_else(|| Error::Config("delta_n must divide the trading day".into()))?;
        if self.day_length_minutes == 0 {
            return Err(Error::Config("day_length_minutes must be positive".into()));
        }
        let tau = self.event_minute as f64 / self.day_length_minutes as f64;
        let event_index = if self.event_minute == 0 {
            0
        } else {
            integer_ratio(tau, self.delta_n)
                .ok_or_else(|| Error::Config("event_minute must fall on the resampling grid".into()))?
        };
        if event_index >= intervals {
            return Err(Error::Config(format!(
                "event_minute {} lies outside the {}-minute day",
                self.event_minute, self.day_length_minutes
            )));
        }
        if !(self.rho >= -1.0 && self.rho <= 1.0) {
            return Err(Error::Config(format!("rho must lie in [-1, 1], got {}", self.rho)));
        }
        if !(self.jump_c >= 0.0 && self.jump_c.is_finite()) {
            return Err(Error::Config(format!("jump_c must be non-negative, got {}", self.jump_c)));
        }
        if self.v0.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Config("initial factor values must be non-negative".into()));
        }
        Ok(Geometry {
            steps_per_interval,
            intervals,
            event_index,
        })
    }

    /// Checks the config, including that `k` observations fit on each side of
    /// the event.
    pub fn validate(&self, max_k: usize) -> Result<()> {
        let g = self.geometry()?;
        if g.event_index < max_k || g.event_index + max_k >= g.intervals {
            return Err(Error::Config(format!(
                "event index {} leaves fewer than {max_k} returns on one side of a {}-return day",
                g.event_index, g.intervals
            )));
        }
        Ok(())
    }

    /// Index of the return that starts at the event time.
    pub fn event_index(&self) -> Result<usize> {
        Ok(self.geometry()?.event_index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDay {
    /// Normalized returns, one per resampling interval.
    pub returns: Vec<f64>,
    pub event_index: usize,
    /// `sigma^2` at the start of each interval (after any jump at that instant).
    pub sigma2_path: Vec<f64>,
    /// `(V1, V2)` at the start of each interval, clamped at zero.
    pub factors: Vec<[f64; 2]>,
    /// `sigma^2` just before the jump is applied at the event time.
    pub sigma2_event_left: f64,
}

struct FactorStepper {
    v: [f64; 2],
    sqrt_dt: f64,
    dt: f64,
    rho: f64,
    rho_perp: f64,
    frozen: bool,
}

impl FactorStepper {
    #[inline]
    fn clamped(&self) -> [f64; 2] {
        [self.v[0].max(0.0), self.v[1].max(0.0)]
    }

    #[inline]
    fn step(&mut self, d_l: f64, stream: &mut SeededStream) {
        if self.frozen {
            return;
        }
        let vp = self.clamped();
        for j in 0..2 {
            let d_b = self.sqrt_dt * sample_normal(stream);
            self.v[j] += KAPPA[j] * (THETA - vp[j]) * self.dt
                + VOL_OF_VOL[j] * vp[j].sqrt() * (self.rho * d_l + self.rho_perp * d_b);
        }
    }
}

#[inline]
fn variance(model: VolModel, v: [f64; 2]) -> f64 {
    match model {
        VolModel::A => 2.0 * v[0],
        VolModel::B => v[0] + v[1],
    }
}

/// Simulates one trading day. Each mesh step draws the driver increment
/// first, then the two factor shocks, all from `stream`.
pub fn simulate_day(cfg: &SimConfig, stream: &mut SeededStream) -> Result<SimulatedDay> {
    let g = cfg.geometry()?;
    let dt = cfg.mesh_dt;
    let beta = cfg.driver.beta();
    let driver_scale = dt.powf(1.0 / beta);
    let norm = cfg.delta_n.powf(-1.0 / beta);
    let mut factors = FactorStepper {
        v: cfg.v0,
        sqrt_dt: dt.sqrt(),
        dt,
        rho: cfg.rho,
        rho_perp: (1.0 - cfg.rho * cfg.rho).sqrt(),
        frozen: cfg.frozen_factors,
    };

    let steps_per_day = g.steps_per_interval * g.intervals;
    for _ in 0..cfg.burn_in_days as usize * steps_per_day {
        let d_l = driver_scale * cfg.driver.sample_standardized(stream);
        factors.step(d_l, stream);
    }

    let jump_step = g.event_index * g.steps_per_interval;
    let mut returns = Vec::with_capacity(g.intervals);
    let mut sigma2_path = Vec::with_capacity(g.intervals);
    let mut factor_path = Vec::with_capacity(g.intervals);
    let mut sigma2_event_left = f64::NAN;
    let mut price = 0.0;
    let mut interval_start = 0.0;

    for step in 0..steps_per_day {
        if step == jump_step {
            sigma2_event_left = variance(cfg.model, factors.clamped());
            factors.v[0] += cfg.jump_c;
            factors.v[1] += cfg.jump_c;
        }
        let vp = factors.clamped();
        let sigma2 = variance(cfg.model, vp);
        if step % g.steps_per_interval == 0 {
            sigma2_path.push(sigma2);
            factor_path.push(vp);
            interval_start = price;
        }
        let d_l = driver_scale * cfg.driver.sample_standardized(stream);
        price += sigma2.sqrt() * d_l;
        factors.step(d_l, stream);
        if (step + 1) % g.steps_per_interval == 0 {
            returns.push(norm * (price - interval_start));
        }
    }

    Ok(SimulatedDay {
        returns,
        event_index: g.event_index,
        sigma2_path,
        factors: factor_path,
        sigma2_event_left,
    })
}

/// Splits `series` around `event_index`: the `k1` observations before it and
/// the `k2` after it. The observation at `event_index` is dropped unless
/// `include_event`, in which case it opens the post window.
pub fn extract_window(
    series: &[f64],
    event_index: usize,
    k1: usize,
    k2: usize,
    include_event: bool,
) -> Result<SplitSample> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidInput("window sizes must be at least 1".into()));
    }
    if event_index >= series.len() {
        return Err(Error::Range(format!(
            "event index {event_index} is past the end of a series of length {}",
            series.len()
        )));
    }
    if k1 > event_index {
        return Err(Error::Range(format!(
            "need {k1} observations before index {event_index}, only {event_index} available"
        )));
    }
    let post_start = if include_event { event_index } else { event_index + 1 };
    let available = series.len() - post_start;
    if k2 > available {
        return Err(Error::Range(format!(
            "need {k2} observations after index {event_index}, only {available} available"
        )));
    }
    SplitSample::new(
        series[event_index - k1..event_index].to_vec(),
        series[post_start..post_start + k2].to_vec(),
    )
}

/// Writes `minute_index,return,sigma2` rows.
pub fn write_day_csv(day: &SimulatedDay, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["minute_index", "return", "sigma2"])?;
    for (i, (r, s)) in day.returns.iter().zip(&day.sigma2_path).enumerate() {
        w.write_record([i.to_string(), r.to_string(), s.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Observation grid shared by the state-space generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObsGrid {
    pub n_obs: usize,
    pub event_index: usize,
    /// Sampling interval, in days.
    pub delta_n: f64,
}

impl Default for ObsGrid {
    fn default() -> Self {
        ObsGrid {
            n_obs: 390,
            event_index: 195,
            delta_n: 1.0 / 390.0,
        }
    }
}

impl ObsGrid {
    fn validate(&self) -> Result<()> {
        if self.event_index >= self.n_obs {
            return Err(Error::Config(format!(
                "event index {} outside {} observations",
                self.event_index, self.n_obs
            )));
        }
        if !(self.delta_n > 0.0) {
            return Err(Error::Config("delta_n must be positive".into()));
        }
        Ok(())
    }

    /// Brownian path at the observation times `i * delta_n`, scaled by `vol`.
    fn brownian(&self, vol: f64, stream: &mut SeededStream) -> Vec<f64> {
        let sd = vol * self.delta_n.sqrt();
        let mut w = 0.0;
        (0..self.n_obs)
            .map(|i| {
                if i > 0 {
                    w += sd * sample_normal(stream);
                }
                w
            })
            .collect()
    }

    fn after_event(&self, i: usize) -> bool {
        i >= self.event_index
    }
}

/// `Y_i = mu_t + v_t eps_i` with `mu_t = mu0 + mu_vol W_t (+ mu_jump after the
/// event)` and `v_t = (v0 (+ v_jump after the event)) exp(v_vol B_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocationScaleConfig {
    pub grid: ObsGrid,
    pub mu0: f64,
    pub v0: f64,
    pub mu_vol: f64,
    pub v_vol: f64,
    pub mu_jump: f64,
    pub v_jump: f64,
}

impl Default for LocationScaleConfig {
    fn default() -> Self {
        LocationScaleConfig {
            grid: ObsGrid::default(),
            mu0: 0.0,
            v0: 1.0,
            mu_vol: 0.1,
            v_vol: 0.1,
            mu_jump: 0.0,
            v_jump: 0.0,
        }
    }
}

pub fn simulate_location_scale(cfg: &LocationScaleConfig, stream: &mut SeededStream) -> Result<Vec<f64>> {
    cfg.grid.validate()?;
    if !(cfg.v0 > 0.0 && cfg.v0 + cfg.v_jump > 0.0) {
        return Err(Error::Config("scale must stay positive on both sides of the event".into()));
    }
    let w = cfg.grid.brownian(cfg.mu_vol, stream);
    let b = cfg.grid.brownian(cfg.v_vol, stream);
    Ok((0..cfg.grid.n_obs)
        .map(|i| {
            let post = cfg.grid.after_event(i);
            let mu = cfg.mu0 + w[i] + if post { cfg.mu_jump } else { 0.0 };
            let v = (cfg.v0 + if post { cfg.v_jump } else { 0.0 }) * b[i].exp();
            mu + v * sample_normal(stream)
        })
        .collect())
}

/// `Y_i ~ Poisson(zeta_t)` with `zeta_t = (zeta0 (+ jump after the event)) exp(vol B_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonVolumeConfig {
    pub grid: ObsGrid,
    pub zeta0: f64,
    pub vol: f64,
    pub jump: f64,
}

impl Default for PoissonVolumeConfig {
    fn default() -> Self {
        PoissonVolumeConfig {
            grid: ObsGrid::default(),
            zeta0: 4.0,
            vol: 0.2,
            jump: 0.0,
        }
    }
}

pub fn simulate_poisson_volume(cfg: &PoissonVolumeConfig, stream: &mut SeededStream) -> Result<Vec<u64>> {
    cfg.grid.validate()?;
    if !(cfg.zeta0 >= 0.0 && cfg.zeta0 + cfg.jump >= 0.0) {
        return Err(Error::Config("intensity must stay non-negative".into()));
    }
    let b = cfg.grid.brownian(cfg.vol, stream);
    (0..cfg.grid.n_obs)
        .map(|i| {
            let level = cfg.zeta0 + if cfg.grid.after_event(i) { cfg.jump } else { 0.0 };
            sample_poisson(stream, level * b[i].exp())
        })
        .collect()
}

/// `Y_i = 1 + 1{zeta_t >= eps_i}`, `eps_i` uniform on `(0, 1]`, with
/// `zeta_t = clamp(zeta0 (+ jump after the event) + vol B_t, 0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpreadConfig {
    pub grid: ObsGrid,
    pub zeta0: f64,
    pub vol: f64,
    pub jump: f64,
}

impl Default for SpreadConfig {
    fn default() -> Self {
        SpreadConfig {
            grid: ObsGrid::default(),
            zeta0: 0.5,
            vol: 0.0,
            jump: 0.0,
        }
    }
}

pub fn simulate_spread(cfg: &SpreadConfig, stream: &mut SeededStream) -> Result<Vec<u8>> {
    cfg.grid.validate()?;
    let b = cfg.grid.brownian(cfg.vol, stream);
    Ok((0..cfg.grid.n_obs)
        .map(|i| {
            let level = cfg.zeta0 + if cfg.grid.after_event(i) { cfg.jump } else { 0.0 };
            let zeta = (level + b[i]).clamp(0.0, 1.0);
            let eps = 1.0 - sample_uniform(stream);
            1 + u8::from(zeta >= eps)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn default_geometry() {
        let cfg = SimConfig::default();
        let g = cfg.geometry().unwrap();
        assert_eq!(g.steps_per_interval, 60);
        assert_eq!(g.intervals, 390);
        assert_eq!(g.event_index, 195);
        assert!(cfg.validate(90).is_ok());
        assert!(cfg.validate(200).is_err());
    }

    #[test]
    fn bad_geometry() {
        let cfg = SimConfig {
            mesh_dt: 1.0 / 23_000.0,
            ..SimConfig::default()
        };
        assert!(cfg.geometry().is_err());
        let cfg = SimConfig {
            event_minute: 400,
            ..SimConfig::default()
        };
        assert!(cfg.geometry().is_err());
        let cfg = SimConfig {
            driver: LevyDriver::TruncatedStable { beta: 2.5, trunc_c: 1.0 },
            ..SimConfig::default()
        };
        assert!(cfg.geometry().is_err());
    }

    #[test]
    fn day_shape_and_positivity() {
        for model in [VolModel::A, VolModel::B] {
            let cfg = SimConfig {
                model,
                ..SimConfig::default()
            };
            let day = simulate_day(&cfg, &mut SeededStream::new(3)).unwrap();
            assert_eq!(day.returns.len(), 390);
            assert_eq!(day.sigma2_path.len(), 390);
            assert_eq!(day.event_index, 195);
            assert!(day.sigma2_path.iter().all(|&s| s >= 0.0));
            assert!(day.factors.iter().all(|v| v[0] >= 0.0 && v[1] >= 0.0));
        }
    }

    #[test]
    fn jump_in_variance_is_two_c() {
        let cfg = SimConfig {
            jump_c: 3.5,
            ..SimConfig::default()
        };
        let day = simulate_day(&cfg, &mut SeededStream::new(4)).unwrap();
        let jump = day.sigma2_path[day.event_index] - day.sigma2_event_left;
        assert!((jump - 7.0).abs() < 1e-12, "{jump}");
    }

    #[test]
    fn null_day_has_no_jump_at_event() {
        let cfg = SimConfig::default();
        let day = simulate_day(&cfg, &mut SeededStream::new(5)).unwrap();
        let i = day.event_index;
        let at_event = (day.sigma2_path[i] - day.sigma2_path[i - 1]).abs();
        let max_smooth = day
            .sigma2_path
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        assert!(at_event <= max_smooth);
        assert!(max_smooth < 0.1);
    }

    #[test]
    fn constant_volatility_gives_standard_normal_returns() {
        let cfg = SimConfig {
            frozen_factors: true,
            ..SimConfig::default()
        };
        let root = SeededStream::new(6);
        let mut all = Vec::new();
        for d in 0..20 {
            let day = simulate_day(&cfg, &mut root.child(d)).unwrap();
            assert!(day.sigma2_path.iter().all(|&s| s == 1.0));
            all.extend(day.returns);
        }
        let v = var(&all);
        // 7800 draws: sd of the sample variance is ~0.016
        assert!((v - 1.0).abs() < 0.05, "var {v}");
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        assert!(mean.abs() < 0.04, "mean {mean}");
    }

    #[test]
    fn single_day_variance_near_one() {
        let cfg = SimConfig {
            frozen_factors: true,
            ..SimConfig::default()
        };
        let day = simulate_day(&cfg, &mut SeededStream::new(7)).unwrap();
        let v = var(&day.returns);
        assert!((v - 1.0).abs() < 0.15, "var {v}");
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = SimConfig {
            model: VolModel::B,
            driver: LevyDriver::truncated_stable(1.5, 10.0).unwrap(),
            ..SimConfig::default()
        };
        let a = simulate_day(&cfg, &mut SeededStream::new(8)).unwrap();
        let b = simulate_day(&cfg, &mut SeededStream::new(8)).unwrap();
        assert_eq!(a, b);
        assert!(a.returns.iter().all(|r| r.is_finite()));
    }

    #[test]
    fn burn_in_moves_the_factors() {
        let cfg = SimConfig {
            model: VolModel::B,
            burn_in_days: 1,
            ..SimConfig::default()
        };
        let day = simulate_day(&cfg, &mut SeededStream::new(9)).unwrap();
        assert_ne!(day.factors[0], [0.5, 0.5]);
    }

    #[test]
    fn window_examples() {
        let series: Vec<f64> = (0..10).map(f64::from).collect();
        let s = extract_window(&series, 5, 2, 2, false).unwrap();
        assert_eq!(s.pre(), &[3.0, 4.0]);
        assert_eq!(s.post(), &[6.0, 7.0]);
        let s = extract_window(&series, 5, 2, 3, false).unwrap();
        assert_eq!((s.k1(), s.k2()), (2, 3));
        assert!(matches!(extract_window(&series, 4, 5, 2, false), Err(Error::Range(_))));
        assert!(matches!(extract_window(&series, 5, 2, 5, false), Err(Error::Range(_))));
        assert!(extract_window(&series, 5, 2, 4, false).is_ok());
        let s = extract_window(&series, 5, 2, 2, true).unwrap();
        assert_eq!(s.post(), &[5.0, 6.0]);
    }

    #[test]
    fn location_scale_cases() {
        let cfg = LocationScaleConfig {
            mu0: 2.0,
            v0: 0.5,
            mu_vol: 0.0,
            v_vol: 0.0,
            grid: ObsGrid {
                n_obs: 20_000,
                event_index: 10_000,
                delta_n: 1.0 / 390.0,
            },
            ..LocationScaleConfig::default()
        };
        let ys = simulate_location_scale(&cfg, &mut SeededStream::new(10)).unwrap();
        let m = ys.iter().sum::<f64>() / ys.len() as f64;
        assert!((m - 2.0).abs() < 0.02);
        assert!((var(&ys) - 0.25).abs() < 0.015);

        let jumped = LocationScaleConfig { mu_jump: 1.0, ..cfg };
        let ys = simulate_location_scale(&jumped, &mut SeededStream::new(11)).unwrap();
        let pre = ys[..10_000].iter().sum::<f64>() / 1e4;
        let post = ys[10_000..].iter().sum::<f64>() / 1e4;
        assert!((post - pre - 1.0).abs() < 0.03);
    }

    #[test]
    fn poisson_constant_intensity() {
        let cfg = PoissonVolumeConfig {
            vol: 0.0,
            grid: ObsGrid {
                n_obs: 100_000,
                event_index: 10,
                delta_n: 1.0 / 390.0,
            },
            ..PoissonVolumeConfig::default()
        };
        let ys = simulate_poisson_volume(&cfg, &mut SeededStream::new(12)).unwrap();
        let xs: Vec<f64> = ys.iter().map(|&y| y as f64).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m - 4.0).abs() < 0.02);
        assert!((var(&xs) - 4.0).abs() < 0.08);
    }

    #[test]
    fn spread_boundaries() {
        let base = SpreadConfig::default();
        let zero = SpreadConfig { zeta0: 0.0, ..base.clone() };
        assert!(simulate_spread(&zero, &mut SeededStream::new(13)).unwrap().iter().all(|&y| y == 1));
        let one = SpreadConfig { zeta0: 1.0, ..base };
        assert!(simulate_spread(&one, &mut SeededStream::new(13)).unwrap().iter().all(|&y| y == 2));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = SimConfig {
            model: VolModel::B,
            driver: LevyDriver::truncated_stable(1.5, 20.0).unwrap(),
            jump_c: 1.5,
            ..SimConfig::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        let back: SimConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: SimConfig = toml::from_str("model = \"B\"\njump_c = 2.0\n").unwrap();
        assert_eq!(partial.model, VolModel::B);
        assert_eq!(partial.rho, -0.7);
        assert!(toml::from_str::<SimConfig>("bogus = 1\n").is_err());
    }
}
