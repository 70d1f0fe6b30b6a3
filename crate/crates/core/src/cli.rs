//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    render_table, run_grid, write_power_csv, write_table, ExperimentGrid, RejectionTable,
    STABLE_TRUNCATIONS,
};
use crate::ingest::{event_window, load_prices, parse_date, PriceSeries, COVID_EVENTS};
use crate::permtest::{run_test, PermutationScheme, TestOutcome};
use crate::randgen::{LevyDriver, SeededStream};
use crate::sde_sim::{simulate_day, write_day_csv, SimConfig, VolModel};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Exit status for an error: 1 for bad flags or configs, 2 for bad or
/// insufficient data, 3 for anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Config(_) | Error::Validation(_) | Error::Capacity { .. } => {
            EXIT_USAGE
        }
        Error::Parse { .. } | Error::Range(_) | Error::Io { .. } | Error::Degenerate(_) | Error::Csv(_) => {
            EXIT_DATA
        }
        Error::Cell { .. } => EXIT_INTERNAL,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "eventperm",
    version,
    about = "Permutation tests for distributional discontinuities around events"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test one event date in a daily price file.
    Test(TestArgs),
    /// Test the five COVID-19 event dates (non-randomized, k = 5, 100,000 permutations).
    Empirical(EmpiricalArgs),
    /// Simulate one trading day and write minute_index,return,sigma2 rows.
    Simulate(SimulateArgs),
    /// Null rejection rates of both tests over a grid of models, drivers and windows.
    Size(GridArgs),
    /// Power curves of both tests over a list of volatility jump sizes.
    Power(PowerArgs),
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Observations on each side of the event.
    #[arg(long, conflicts_with_all = ["k1", "k2"])]
    pub k: Option<usize>,
    /// Observations before the event (requires --k2).
    #[arg(long, requires = "k2")]
    pub k1: Option<usize>,
    /// Observations after the event (requires --k1).
    #[arg(long, requires = "k1")]
    pub k2: Option<usize>,
}

impl WindowArgs {
    fn sizes(&self, default: usize) -> (usize, usize) {
        match (self.k, self.k1, self.k2) {
            (Some(k), _, _) => (k, k),
            (None, Some(a), Some(b)) => (a, b),
            _ => (default, default),
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Price file with header `date,adj_close`.
    #[arg(long)]
    pub input: PathBuf,
    /// Event date (YYYY-MM-DD); non-trading days move to the next trading day.
    #[arg(long)]
    pub event_date: String,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Random permutations in addition to the identity.
    #[arg(long, default_value_t = 999)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reject only when the statistic exceeds the critical value.
    #[arg(long)]
    pub nonrandomized: bool,
    /// Keep the return ending on the event day as the first post-event observation.
    #[arg(long)]
    pub include_event: bool,
    /// Print a single key=value result line instead of the report.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Debug, Args)]
pub struct EmpiricalArgs {
    /// S&P 500 daily prices, header `date,adj_close`, Dec 20 2019 to Mar 18 2020.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the randomized test instead of the non-randomized one.
    #[arg(long)]
    pub randomized: bool,
    #[arg(long)]
    pub include_event: bool,
    /// One key=value line per event.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    A,
    B,
    Both,
}

impl ModelArg {
    fn models(self) -> Vec<VolModel> {
        match self {
            ModelArg::A => vec![VolModel::A],
            ModelArg::B => vec![VolModel::B],
            ModelArg::Both => vec![VolModel::A, VolModel::B],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriverArg {
    Brownian,
    Stable,
    /// Brownian plus truncated stable with C = 10, 20, 30.
    Standard,
}

#[derive(Debug, Args)]
pub struct DriverFlags {
    /// Shock process.
    #[arg(long, value_enum)]
    pub driver: Option<DriverArg>,
    /// Stability index of the stable driver.
    #[arg(long, default_value_t = 1.5)]
    pub beta: f64,
    /// Truncation bound(s) of the stable driver, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub trunc_c: Vec<f64>,
}

impl DriverFlags {
    fn drivers(&self) -> Result<Option<Vec<LevyDriver>>> {
        let Some(kind) = self.driver else {
            return Ok(None);
        };
        let drivers = match kind {
            DriverArg::Brownian => vec![LevyDriver::Brownian],
            DriverArg::Stable => self
                .trunc_c
                .iter()
                .map(|&c| LevyDriver::truncated_stable(self.beta, c))
                .collect::<Result<_>>()?,
            DriverArg::Standard => std::iter::once(Ok(LevyDriver::Brownian))
                .chain(
                    STABLE_TRUNCATIONS
                        .iter()
                        .map(|&c| LevyDriver::truncated_stable(self.beta, c)),
                )
                .collect::<Result<_>>()?,
        };
        Ok(Some(drivers))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file with simulation settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[command(flatten)]
    pub driver: DriverFlags,
    /// Jump added to both volatility factors at the event.
    #[arg(long)]
    pub jump_c: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// TOML experiment grid; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[command(flatten)]
    pub driver: DriverFlags,
    /// Window sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Random permutations per test.
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// No per-cell progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Jump sizes, comma separated.
    #[arg(long = "jump-c", value_delimiter = ',')]
    pub jump_c: Option<Vec<f64>>,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Test(a) => cmd_test(&a),
        Command::Empirical(a) => cmd_empirical(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Size(a) => cmd_size(&a),
        Command::Power(a) => cmd_power(&a),
    }
}

/// `key=value` rendering of an outcome, space separated.
pub fn machine_line(outcome: &TestOutcome) -> String {
    format!(
        "statistic={} critical_value={} m_total={} m_plus={} m_zero={} phat={} phi={} p_value={} randomized={} decision={}",
        outcome.statistic,
        outcome.critical_value,
        outcome.m_total,
        outcome.m_plus,
        outcome.m_zero,
        outcome.phat,
        outcome.phi,
        outcome.p_value,
        outcome.randomized,
        decision(outcome),
    )
}

fn decision(outcome: &TestOutcome) -> &'static str {
    if outcome.rejected {
        "REJECT"
    } else {
        "FAIL_TO_REJECT"
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("--alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

struct EventResult {
    date: chrono::NaiveDate,
    event_return: usize,
    k1: usize,
    k2: usize,
    outcome: TestOutcome,
}

#[allow(clippy::too_many_arguments)]
fn test_event(
    series: &PriceSeries,
    date: chrono::NaiveDate,
    k1: usize,
    k2: usize,
    alpha: f64,
    m: usize,
    seed: u64,
    randomized: bool,
    include_event: bool,
) -> Result<EventResult> {
    let window = event_window(series, date, k1, k2, include_event)?;
    let scheme = PermutationScheme::random_subset(m)?;
    let outcome = run_test(&window, alpha, &scheme, &mut SeededStream::new(seed), randomized)?;
    Ok(EventResult {
        date,
        event_return: series.event_return_index(date)?,
        k1,
        k2,
        outcome,
    })
}

fn print_report(series: &PriceSeries, r: &EventResult) {
    let o = &r.outcome;
    let dates = series.dates();
    println!(
        "event date       {} (event return {} -> {})",
        r.date,
        dates[r.event_return],
        dates[r.event_return + 1]
    );
    println!("window           k1 = {}, k2 = {}", r.k1, r.k2);
    println!("statistic        {:.6}", o.statistic);
    println!("critical value   {:.6}", o.critical_value);
    println!("M / M+ / M0      {} / {} / {}", o.m_total, o.m_plus, o.m_zero);
    println!("phat             {:.6}", o.phat);
    println!("p-value          {:.6}", o.p_value);
    println!(
        "test             {}",
        if o.randomized { "randomized" } else { "non-randomized" }
    );
    println!(
        "decision         {}",
        if o.rejected { "REJECT" } else { "FAIL TO REJECT" }
    );
}

fn cmd_test(a: &TestArgs) -> Result<()> {
    check_alpha(a.alpha)?;
    let date = parse_date(&a.event_date)?;
    let (k1, k2) = a.window.sizes(5);
    let series = load_prices(&a.input)?;
    let r = test_event(
        &series,
        date,
        k1,
        k2,
        a.alpha,
        a.permutations,
        a.seed,
        !a.nonrandomized,
        a.include_event,
    )?;
    if a.machine {
        println!("event_date={} k1={k1} k2={k2} {}", r.date, machine_line(&r.outcome));
    } else {
        print_report(&series, &r);
    }
    Ok(())
}

fn cmd_empirical(a: &EmpiricalArgs) -> Result<()> {
    check_alpha(a.alpha)?;
    let series = load_prices(&a.input)?;
    if !a.machine {
        println!(
            "{:<12} {:>10} {:>10} {:>10}  {:<15} event",
            "date", "statistic", "critical", "p-value", "decision"
        );
    }
    for (i, (date, label)) in COVID_EVENTS.iter().enumerate() {
        let date = parse_date(date)?;
        // each event gets its own substream so results do not depend on order
        let seed = SeededStream::new(a.seed).child(i as u64).next_u64();
        let r = test_event(
            &series,
            date,
            a.k,
            a.k,
            a.alpha,
            a.permutations,
            seed,
            a.randomized,
            a.include_event,
        )?;
        let o = &r.outcome;
        if a.machine {
            println!("event_date={date} k1={} k2={} {}", a.k, a.k, machine_line(o));
        } else {
            println!(
                "{:<12} {:>10.6} {:>10.6} {:>10.6}  {:<15} {label}",
                date.to_string(),
                o.statistic,
                o.critical_value,
                o.p_value,
                if o.rejected { "REJECT" } else { "FAIL TO REJECT" },
            );
        }
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut cfg: SimConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => SimConfig::default(),
    };
    if let Some(m) = a.model {
        cfg.model = match m {
            ModelArg::A => VolModel::A,
            ModelArg::B => VolModel::B,
            ModelArg::Both => {
                return Err(Error::InvalidInput("simulate takes a single --model (A or B)".into()))
            }
        };
    }
    if let Some(d) = a.driver.drivers()? {
        if d.len() != 1 {
            return Err(Error::InvalidInput("simulate takes a single driver".into()));
        }
        cfg.driver = d[0];
    }
    if let Some(c) = a.jump_c {
        cfg.jump_c = c;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let day = simulate_day(&cfg, &mut SeededStream::new(cfg.seed))?;
    match &a.out {
        Some(path) => {
            write_day_csv(&day, path)?;
            eprintln!(
                "wrote {} returns to {} (event index {})",
                day.returns.len(),
                path.display(),
                day.event_index
            );
        }
        None => {
            println!("minute_index,return,sigma2");
            for (i, (r, s)) in day.returns.iter().zip(&day.sigma2_path).enumerate() {
                println!("{i},{r},{s}");
            }
        }
    }
    Ok(())
}

fn build_grid(a: &GridArgs, base: ExperimentGrid) -> Result<ExperimentGrid> {
    let mut g = match &a.config {
        Some(p) => read_toml(p)?,
        None => base,
    };
    if let Some(t) = a.trials {
        g.trials = t;
    }
    if let Some(m) = a.model {
        g.models = m.models();
    }
    if let Some(d) = a.driver.drivers()? {
        g.drivers = d;
    }
    if let Some(k) = &a.k {
        g.k_values = k.clone();
    }
    if let Some(m) = a.permutations {
        g.permutations_m = m;
    }
    if let Some(al) = a.alpha {
        g.alpha = al;
    }
    if let Some(s) = a.seed {
        g.base_seed = s;
    }
    Ok(g)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(Error::InvalidInput("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_size(a: &GridArgs) -> Result<()> {
    let grid = build_grid(a, ExperimentGrid::size_table())?;
    grid.validate()?;
    let table = with_threads(a.threads, || run_grid(&grid, !a.quiet))?;
    ensure_dir(&a.out)?;
    write_table(&table, &a.out.join("size.csv"))?;
    let text = render_table(&table);
    write_text(&a.out.join("size.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_power(a: &PowerArgs) -> Result<()> {
    let mut grid = build_grid(&a.grid, ExperimentGrid::power_curves(VolModel::A))?;
    if let Some(c) = &a.jump_c {
        grid.c_values = c.clone();
    }
    if grid.c_values.is_empty() {
        return Err(Error::InvalidInput("--jump-c needs at least one value".into()));
    }
    grid.validate()?;
    let table = with_threads(a.grid.threads, || run_grid(&grid, !a.grid.quiet))?;
    ensure_dir(&a.grid.out)?;
    write_table(&table, &a.grid.out.join("power_table.csv"))?;
    let combos = group_by_model_driver(&table);
    if combos.len() == 1 {
        write_power_csv(&table, &a.grid.out.join("power.csv"))?;
    } else {
        for ((model, driver), sub) in &combos {
            let name = format!("power_{model}_{}.csv", sanitize(driver));
            write_power_csv(sub, &a.grid.out.join(name))?;
        }
    }
    print!("{}", render_table(&table));
    Ok(())
}

fn group_by_model_driver(table: &RejectionTable) -> Vec<((VolModel, String), RejectionTable)> {
    let mut groups: Vec<((VolModel, String), RejectionTable)> = Vec::new();
    for r in &table.records {
        let key = (r.model, r.driver.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, t)) => t.records.push(r.clone()),
            None => groups.push((key, RejectionTable { records: vec![r.clone()] })),
        }
    }
    groups
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}
