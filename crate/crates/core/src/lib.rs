//! Permutation tests for distributional discontinuities in event-study time
//! series, with the spot-variance t-test as a benchmark, a stochastic
//! volatility simulator, and a Monte Carlo harness for size and power.
//!
//! Modules, bottom-up:
//! - [`randgen`]: seeded splittable streams and samplers;
//! - [`stats_core`]: empirical CDFs and the Cramér–von Mises statistic;
//! - [`permtest`]: the permutation test;
//! - [`ttest`]: the spot-variance t-test;
//! - [`sde_sim`]: simulated trading days and scenario generators;
//! - [`experiments`]: rejection-rate grids;
//! - [`ingest`]: daily price files and event windows;
//! - [`cli`]: the `eventperm` command.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod ingest;
pub mod permtest;
pub mod randgen;
pub mod sde_sim;
pub mod stats_core;
pub mod ttest;

pub use error::{Error, Result};
pub use permtest::{run_test, run_test_nonrandomized, PermutationScheme, TestOutcome};
pub use randgen::{LevyDriver, SeededStream};
pub use stats_core::{cvm_statistic, SplitSample};
