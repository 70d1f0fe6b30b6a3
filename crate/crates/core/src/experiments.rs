//! Monte Carlo size and power experiments.
//!
//! Seeding: the trial `t` of a cell draws from
//! `SeededStream::new(base_seed).child(cell_key).child(t)`, with child 0 of
//! that feeding the simulation and child 1 the permutation draws. The cell
//! key enumerates `(model, driver, k)` only, so every jump size of a power
//! curve reuses the same simulated shocks. Trials run in parallel and are
//! reduced in index order, so results do not depend on the thread count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permtest::{run_test, PermutationScheme};
use crate::randgen::{LevyDriver, SeededStream};
use crate::sde_sim::{extract_window, simulate_day, SimConfig, VolModel};
use crate::stats_core::SplitSample;
use crate::ttest::t_test;

/// Truncation bounds of the stable-driver columns.
pub const STABLE_TRUNCATIONS: [f64; 3] = [10.0, 20.0, 30.0];
pub const DEFAULT_K_VALUES: [usize; 4] = [15, 30, 60, 90];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentGrid {
    pub models: Vec<VolModel>,
    pub drivers: Vec<LevyDriver>,
    pub k_values: Vec<usize>,
    pub c_values: Vec<f64>,
    pub trials: usize,
    /// Random permutations per test; the identity is added on top.
    pub permutations_m: usize,
    pub alpha: f64,
    pub base_seed: u64,
    /// Template for everything else about the simulated day. Its `model`,
    /// `driver`, `jump_c` and `seed` are overridden per cell and trial.
    pub sim: SimConfig,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        ExperimentGrid::size_table()
    }
}

impl ExperimentGrid {
    /// Null rejection rates for both models and all four driver columns.
    pub fn size_table() -> Self {
        let mut drivers = vec![LevyDriver::Brownian];
        drivers.extend(
            STABLE_TRUNCATIONS
                .iter()
                .map(|&c| LevyDriver::TruncatedStable { beta: 1.5, trunc_c: c }),
        );
        ExperimentGrid {
            models: vec![VolModel::A, VolModel::B],
            drivers,
            k_values: DEFAULT_K_VALUES.to_vec(),
            c_values: vec![0.0],
            trials: 2000,
            permutations_m: 1000,
            alpha: 0.05,
            base_seed: 20_240_101,
            sim: SimConfig::default(),
        }
    }

    /// Power curves over `c = 0, 0.5, ..., 5` with a Brownian driver.
    pub fn power_curves(model: VolModel) -> Self {
        ExperimentGrid {
            models: vec![model],
            drivers: vec![LevyDriver::Brownian],
            c_values: (0..=10).map(|i| i as f64 * 0.5).collect(),
            ..ExperimentGrid::size_table()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("models", self.models.is_empty()),
            ("drivers", self.drivers.is_empty()),
            ("k_values", self.k_values.is_empty()),
            ("c_values", self.c_values.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Validation(format!("{name} must not be empty")));
        }
        if self.trials == 0 {
            return Err(Error::Validation("trials must be at least 1".into()));
        }
        if self.permutations_m == 0 {
            return Err(Error::Validation("permutations_m must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Validation(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if let Some(c) = self.c_values.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
            return Err(Error::Validation(format!("c_values must be non-negative, got {c}")));
        }
        if self.k_values.contains(&0) {
            return Err(Error::Validation("k_values must be positive".into()));
        }
        for d in &self.drivers {
            d.validate()?;
        }
        let max_k = *self.k_values.iter().max().unwrap_or(&1);
        self.sim.validate(max_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Perm,
    Ttest,
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestKind::Perm => "perm",
            TestKind::Ttest => "ttest",
        })
    }
}

/// One row of a rejection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub model: VolModel,
    pub driver: String,
    pub k: usize,
    pub c: f64,
    pub test: TestKind,
    pub rejection_rate: f64,
    pub trials: usize,
    pub standard_error: f64,
}

impl CellRecord {
    fn new(spec: &CellSpec, test: TestKind, rejections: usize, trials: usize) -> Self {
        let r = rejections as f64 / trials as f64;
        CellRecord {
            model: spec.model,
            driver: spec.driver.label(),
            k: spec.k,
            c: spec.c,
            test,
            rejection_rate: r,
            trials,
            standard_error: binomial_se(r, trials),
        }
    }
}

pub fn binomial_se(rate: f64, trials: usize) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RejectionTable {
    pub records: Vec<CellRecord>,
}

impl RejectionTable {
    pub fn get(&self, model: VolModel, driver: &LevyDriver, k: usize, c: f64, test: TestKind) -> Option<&CellRecord> {
        let label = driver.label();
        self.records
            .iter()
            .find(|r| r.model == model && r.driver == label && r.k == k && r.c == c && r.test == test)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub model: VolModel,
    pub driver: LevyDriver,
    pub k: usize,
    pub c: f64,
}

impl std::fmt::Display for CellSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "model {} / {} / k={} / c={}", self.model, self.driver.label(), self.k, self.c)
    }
}

/// Per-trial decisions for one cell: `(permutation test, t-test)`.
fn cell_decisions(
    spec: &CellSpec,
    trials: usize,
    m: usize,
    alpha: f64,
    sim: &SimConfig,
    cell_stream: &SeededStream,
) -> Result<Vec<(bool, bool)>> {
    let scheme = PermutationScheme::random_subset(m)?;
    let cfg = SimConfig {
        model: spec.model,
        driver: spec.driver,
        jump_c: spec.c,
        ..sim.clone()
    };
    cfg.validate(spec.k)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial = cell_stream.child(t as u64);
            let day = simulate_day(&cfg, &mut trial.child(0))?;
            let window = extract_window(&day.returns, day.event_index, spec.k, spec.k, false)?;
            let perm = run_test(&window, alpha, &scheme, &mut trial.child(1), true)?;
            let tt = t_test(&window, alpha)?;
            Ok((perm.rejected, tt.rejected))
        })
        .collect()
}

/// Rejection frequencies of both tests for one cell, with the simulation
/// template defaults.
pub fn run_cell(
    spec: &CellSpec,
    trials: usize,
    m: usize,
    alpha: f64,
    seed: u64,
) -> Result<(CellRecord, CellRecord)> {
    run_cell_with(spec, trials, m, alpha, &SimConfig::default(), &SeededStream::new(seed))
}

pub fn run_cell_with(
    spec: &CellSpec,
    trials: usize,
    m: usize,
    alpha: f64,
    sim: &SimConfig,
    cell_stream: &SeededStream,
) -> Result<(CellRecord, CellRecord)> {
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    let decisions = cell_decisions(spec, trials, m, alpha, sim, cell_stream).map_err(|e| Error::Cell {
        cell: spec.to_string(),
        source: Box::new(e),
    })?;
    let perm = decisions.iter().filter(|d| d.0).count();
    let tt = decisions.iter().filter(|d| d.1).count();
    Ok((
        CellRecord::new(spec, TestKind::Perm, perm, trials),
        CellRecord::new(spec, TestKind::Ttest, tt, trials),
    ))
}

/// Runs every cell of the grid. Records come out ordered by model, driver,
/// k, c, then test.
pub fn run_grid(grid: &ExperimentGrid, progress: bool) -> Result<RejectionTable> {
    grid.validate()?;
    let root = SeededStream::new(grid.base_seed);
    let mut cells = Vec::new();
    let mut key = 0u64;
    for &model in &grid.models {
        for &driver in &grid.drivers {
            for &k in &grid.k_values {
                for &c in &grid.c_values {
                    cells.push((key, CellSpec { model, driver, k, c }));
                }
                key += 1;
            }
        }
    }
    let total = cells.len();
    let results: Vec<(CellRecord, CellRecord)> = cells
        .par_iter()
        .map(|(key, spec)| {
            let out = run_cell_with(
                spec,
                grid.trials,
                grid.permutations_m,
                grid.alpha,
                &grid.sim,
                &root.child(*key),
            )?;
            if progress {
                eprintln!(
                    "[{spec}] perm {:.3}  ttest {:.3}  ({} trials, {total} cells)",
                    out.0.rejection_rate, out.1.rejection_rate, grid.trials
                );
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(RejectionTable {
        records: results.into_iter().flat_map(|(p, t)| [p, t]).collect(),
    })
}

/// Rejection frequency and its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub trials: usize,
    pub standard_error: f64,
}

/// Monte Carlo rejection frequency of the randomized permutation test on
/// samples produced by `make`; trial `t` uses `root.child(t)`, its child 0
/// for `make` and child 1 for the test.
pub fn permutation_rejection_rate<F>(
    trials: usize,
    root: &SeededStream,
    scheme: &PermutationScheme,
    alpha: f64,
    make: F,
) -> Result<RateEstimate>
where
    F: Fn(&mut SeededStream) -> Result<SplitSample> + Sync,
{
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial = root.child(t as u64);
            let s = make(&mut trial.child(0))?;
            Ok(run_test(&s, alpha, scheme, &mut trial.child(1), true)?.rejected)
        })
        .collect::<Result<_>>()?;
    let rate = hits.iter().filter(|&&h| h).count() as f64 / trials as f64;
    Ok(RateEstimate {
        rate,
        trials,
        standard_error: binomial_se(rate, trials),
    })
}

pub const TABLE_HEADER: [&str; 8] = [
    "model",
    "driver",
    "k",
    "c",
    "test",
    "rejection_rate",
    "trials",
    "standard_error",
];

pub const POWER_HEADER: [&str; 4] = ["c", "k", "test", "rate"];

/// Writes the table as CSV (columns [`TABLE_HEADER`]).
pub fn write_table(table: &RejectionTable, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(TABLE_HEADER)?;
    for r in &table.records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<RejectionTable> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TABLE_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    let records = r.deserialize().collect::<std::result::Result<Vec<CellRecord>, _>>()?;
    Ok(RejectionTable { records })
}

/// Writes `c,k,test,rate` rows. The table must hold a single model and
/// driver, since those columns are not part of the file.
pub fn write_power_csv(table: &RejectionTable, path: &Path) -> Result<()> {
    if let Some(first) = table.records.first() {
        if table
            .records
            .iter()
            .any(|r| r.model != first.model || r.driver != first.driver)
        {
            return Err(Error::Validation(
                "a power CSV holds one model and one driver".into(),
            ));
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(POWER_HEADER)?;
    for r in &table.records {
        w.write_record([
            r.c.to_string(),
            r.k.to_string(),
            r.test.to_string(),
            format!("{:.3}", r.rejection_rate),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Aligned text rendering: one block per model and jump size, one row per
/// `k`, permutation-test columns then t-test columns (one per driver).
pub fn render_table(table: &RejectionTable) -> String {
    let mut models: Vec<VolModel> = Vec::new();
    let mut drivers: Vec<String> = Vec::new();
    let mut ks: Vec<usize> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    for r in &table.records {
        if !models.contains(&r.model) {
            models.push(r.model);
        }
        if !drivers.contains(&r.driver) {
            drivers.push(r.driver.clone());
        }
        if !ks.contains(&r.k) {
            ks.push(r.k);
        }
        if !cs.contains(&r.c) {
            cs.push(r.c);
        }
    }
    let width = drivers.iter().map(String::len).max().unwrap_or(5).max(5) + 2;
    let mut out = String::new();
    for &model in &models {
        for &c in &cs {
            let _ = writeln!(out, "Model {model}, c = {c}");
            let _ = write!(out, "{:>8}", "");
            for kind in ["Permutation test", "T-test"] {
                let _ = write!(out, " | {:<w$}", kind, w = width * drivers.len() - 1);
            }
            out.push('\n');
            let _ = write!(out, "{:>8}", "");
            for _ in 0..2 {
                out.push_str(" |");
                for d in &drivers {
                    let _ = write!(out, "{d:>width$}");
                }
            }
            out.push('\n');
            for &k in &ks {
                let _ = write!(out, "{:>8}", format!("k = {k}"));
                for test in [TestKind::Perm, TestKind::Ttest] {
                    out.push_str(" |");
                    for d in &drivers {
                        let cell = table.records.iter().find(|r| {
                            r.model == model && &r.driver == d && r.k == k && r.c == c && r.test == test
                        });
                        match cell {
                            Some(r) => {
                                let _ = write!(out, "{:>width$}", format!("{:.3}", r.rejection_rate));
                            }
                            None => {
                                let _ = write!(out, "{:>width$}", "-");
                            }
                        }
                    }
                }
                out.push('\n');
            }
            out.push('\n');
        }
    }
    out
}
