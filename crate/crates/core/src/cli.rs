//! Command-line experiments: gain sweeps, Pareto frontiers, scaling-law
//! verification, scattering-matrix synthesis and the exhaustive oracle.
//!
//! Tables are written either as CSV (fixed column order, 12 significant
//! digits, `inf` for infinities) or as a JSON array of row objects with full
//! double precision. Exit status: 0 when every verdict passes, 1 when any
//! fails, 2 on usage errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error as ThisError;

use crate::channel::{FadingKind, PhaseSource, SystemConfig};
use crate::closedform::{self, ArchClass, Fading, PolarizationRelation, Scenario};
use crate::error::Error;
use crate::montecarlo::{self, EstimateReport};
use crate::oracle;
use crate::rng::substream;
use crate::scattering::{self, RisArchitecture};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "bdris",
    version,
    about = "Dual-polarized BD-RIS scaling laws and Pareto frontiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Asymptotic BD-RIS gain per scenario over a chi grid.
    SweepGain(SweepGainArgs),
    /// Performance-complexity Pareto frontier under opposite-polarization LoS.
    Pareto(ParetoArgs),
    /// Monte Carlo check of every closed-form scaling law.
    VerifyScaling(VerifyArgs),
    /// Synthesize an optimal scattering matrix for one channel draw.
    Synth(SynthArgs),
    /// Exhaustive search over architectures against the frontier formula.
    OracleCheck(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepGainArgs {
    /// Chi grid (repeatable or comma separated); default 0, 0.01, ..., 1.
    #[arg(long, value_delimiter = ',')]
    pub chi: Vec<f64>,
    /// Scenario such as `rayleigh-same` or `los-opposite` (repeatable).
    #[arg(long, value_delimiter = ',', value_parser = parse_scenario)]
    pub scenario: Vec<Scenario>,
    /// Adds finite-N ratio columns for this element count.
    #[arg(long)]
    pub n: Option<usize>,
    /// With `--n`, adds a Monte Carlo ratio estimate with this many trials.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ParetoArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0])]
    pub chi: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32])]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0])]
    pub chi: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = montecarlo::DEFAULT_REL_TOL)]
    pub tol: f64,
    /// Multiplies every law before judging (negative control).
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub law_scale: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub chi: f64,
    #[arg(long, default_value = "los-opposite", value_parser = parse_scenario)]
    pub scenario: Scenario,
    /// Use zero phases instead of random ones for LoS scenarios.
    #[arg(long)]
    pub zero_phases: bool,
    /// `single`, `group2`, `fully`, or explicit 1-based groups like `1,3;2,4`.
    #[arg(long, default_value = "group2")]
    pub arch: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [4, 6, 8])]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.5, 0.9, 1.0])]
    pub chi: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse::<Scenario>()
        .map_err(|_| format!("unknown scenario `{s}` (expected rayleigh|los - same|opposite|uni)"))
}

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Tidy table with a fixed column order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row.iter().map(csv_cell))
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| (c.to_string(), json_cell(cell)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("json");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Text(s) => s.clone(),
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_sig(*v),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

fn json_float(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map_or_else(|| Value::String(nonfinite(v).into()), Value::Number)
}

fn json_cell(cell: &Cell) -> Value {
    match cell {
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Int(v) => Value::from(*v),
        Cell::Float(v) => json_float(*v),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Empty => Value::Null,
    }
}

fn nonfinite(v: f64) -> &'static str {
    if v.is_nan() {
        "nan"
    } else if v > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-5 <= |v| < 1e12`.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 12;
    if !v.is_finite() {
        return nonfinite(v).to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-5..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, v);
    trim_zeros(&fixed).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn check_chi_grid(chi: &[f64]) -> Result<(), CliError> {
    if chi.is_empty() {
        return Err(CliError::Usage("chi grid is empty".into()));
    }
    if let Some(bad) = chi.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(CliError::Usage(format!(
            "chi values must lie in [0, 1], got {bad}"
        )));
    }
    Ok(())
}

fn check_trials(trials: usize) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(())
}

fn default_gain_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// Gain table; one row per `(scenario, chi)`.
pub fn sweep_gain(args: &SweepGainArgs) -> Result<Table, CliError> {
    let chi_grid = if args.chi.is_empty() {
        default_gain_grid()
    } else {
        args.chi.clone()
    };
    check_chi_grid(&chi_grid)?;
    let scenarios = if args.scenario.is_empty() {
        Scenario::DUAL.to_vec()
    } else {
        args.scenario.clone()
    };
    if args.trials.is_some() && args.n.is_none() {
        return Err(CliError::Usage("--trials needs --n".into()));
    }
    if let Some(t) = args.trials {
        check_trials(t)?;
    }
    let mut columns = vec!["scenario", "chi", "gain"];
    if args.n.is_some() {
        columns.extend(["n_elements", "finite_ratio"]);
    }
    if args.trials.is_some() {
        columns.extend(["trials", "seed", "empirical_ratio", "empirical_stderr"]);
    }
    let mut table = Table::new(columns);
    for scenario in &scenarios {
        for &chi in &chi_grid {
            let mut row: Vec<Cell> = vec![
                scenario.to_string().into(),
                chi.into(),
                closedform::gain(*scenario, chi)?.into(),
            ];
            if let Some(n) = args.n {
                row.push(n.into());
                row.push(closedform::finite_gain_ratio(*scenario, n, chi)?.into());
                if let Some(trials) = args.trials {
                    let config = scenario.config(n, chi)?;
                    let est = montecarlo::estimate_gain(&config, trials, args.seed)?;
                    row.extend([
                        trials.into(),
                        args.seed.into(),
                        est.ratio.into(),
                        est.stderr.into(),
                    ]);
                }
            }
            table.push(row);
        }
    }
    Ok(table)
}

pub fn pareto(args: &ParetoArgs) -> Result<Table, CliError> {
    check_chi_grid(&args.chi)?;
    if args.n == 0 || !args.n.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "--n must be a positive even integer, got {}",
            args.n
        )));
    }
    let mut table = Table::new(vec!["n_elements", "chi", "n", "complexity", "power"]);
    for &chi in &args.chi {
        for point in closedform::pareto_frontier(args.n, chi)? {
            table.push(vec![
                args.n.into(),
                chi.into(),
                point.n.into(),
                point.complexity.into(),
                point.power.into(),
            ]);
        }
    }
    Ok(table)
}

/// Verification table and whether every row passed.
pub fn verify_scaling(args: &VerifyArgs) -> Result<(Table, bool), CliError> {
    check_chi_grid(&args.chi)?;
    check_trials(args.trials)?;
    if args.n.is_empty() {
        return Err(CliError::Usage("--n list is empty".into()));
    }
    let mut table = Table::new(vec![
        "scenario",
        "arch",
        "n_elements",
        "chi",
        "trials",
        "seed",
        "mean",
        "stderr",
        "target",
        "verdict",
    ]);
    let mut all_pass = true;
    for &n in &args.n {
        for fading in [Fading::Rayleigh, Fading::LoS] {
            // LoS laws are deterministic: one draw decides.
            let trials = if fading == Fading::LoS {
                1
            } else {
                args.trials
            };
            let mut cells: Vec<(Scenario, f64)> = Vec::new();
            for relation in [PolarizationRelation::Same, PolarizationRelation::Opposite] {
                cells.extend(
                    args.chi
                        .iter()
                        .map(|&chi| (Scenario::new(relation, fading), chi)),
                );
            }
            cells.push((Scenario::new(PolarizationRelation::Uni, fading), 1.0));
            for (scenario, chi) in cells {
                for arch in [ArchClass::Single, ArchClass::Fully] {
                    let law = closedform::scaling_law(scenario, arch, n, chi)? * args.law_scale;
                    let report = montecarlo::verify_against(
                        scenario, arch, n, chi, trials, args.seed, args.tol, law,
                    )?;
                    all_pass &= report.verdict.is_some_and(|v| v.passed());
                    table.push(report_row(scenario, arch, n, chi, &report));
                }
            }
        }
    }
    Ok((table, all_pass))
}

fn report_row(
    scenario: Scenario,
    arch: ArchClass,
    n: usize,
    chi: f64,
    r: &EstimateReport,
) -> Vec<Cell> {
    vec![
        scenario.to_string().into(),
        arch.to_string().into(),
        n.into(),
        chi.into(),
        r.trials.into(),
        r.seed.into(),
        r.mean.into(),
        r.stderr.into(),
        r.target.into(),
        r.verdict
            .map(|v| if v.passed() { "pass" } else { "fail" })
            .into(),
    ]
}

/// Parses `single`, `group2`, `fully` or explicit 1-based groups `1,3;2,4`.
pub fn parse_architecture(spec: &str, n: usize) -> Result<RisArchitecture, CliError> {
    match spec.trim() {
        "single" => Ok(RisArchitecture::single_connected(n)),
        "fully" => Ok(RisArchitecture::fully_connected(n)),
        "group2" => Ok(RisArchitecture::opposite_pairs(n)?),
        explicit => {
            let groups = explicit
                .trim_matches(|c| c == '{' || c == '}')
                .split([';', '|'])
                .map(|g| {
                    g.trim()
                        .trim_matches(|c| c == '{' || c == '}')
                        .split(',')
                        .map(|i| {
                            i.trim().parse::<usize>().map_err(|_| {
                                CliError::Usage(format!("malformed partition spec `{spec}`"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            RisArchitecture::from_one_based(n, &groups)
                .map_err(|e| CliError::Usage(format!("malformed partition spec `{spec}`: {e}")))
        }
    }
}

#[derive(Serialize)]
struct Residuals {
    symmetry: f64,
    unitarity: f64,
    block: f64,
}

#[derive(Serialize)]
struct SynthOutput {
    n: usize,
    groups: Vec<Vec<usize>>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    scenario: String,
    chi: f64,
    seed: u64,
    complexity: usize,
    achieved_power: f64,
    bound_power: f64,
    ratio: f64,
    residuals: Residuals,
    channel: crate::channel::ChannelRealization,
}

/// Synthesizes the optimal matrix for one draw and returns its JSON export.
pub fn synth(args: &SynthArgs) -> Result<String, CliError> {
    if args.output.format == Some(Format::Csv) {
        return Err(CliError::Usage("synth writes JSON only".into()));
    }
    let arch = parse_architecture(&args.arch, args.n)?;
    let mut config = args.scenario.config(args.n, args.chi)?;
    if args.zero_phases {
        if args.scenario.fading != Fading::LoS {
            return Err(CliError::Usage(
                "--zero-phases applies to LoS scenarios only".into(),
            ));
        }
        config = SystemConfig::new(
            args.n,
            config.chi(),
            config.tx_pol(),
            config.rx_pol(),
            FadingKind::LoS(PhaseSource::zeros(args.n)),
        )?;
    }
    let ch = config.realize(&mut substream(args.seed, 0))?;
    let theta = scattering::synth_group_optimal(&arch, ch.h_r(), ch.h_t())?;
    let achieved = scattering::received_power(&theta, ch.h_r(), ch.h_t(), config.tx_power())?;
    let bound = scattering::max_power(&arch, ch.h_r(), ch.h_t(), config.tx_power())?;
    let e = theta.entries();
    let n = args.n;
    let out = SynthOutput {
        n,
        groups: arch.groups_one_based(),
        re: (0..n)
            .map(|i| (0..n).map(|j| e[(i, j)].re).collect())
            .collect(),
        im: (0..n)
            .map(|i| (0..n).map(|j| e[(i, j)].im).collect())
            .collect(),
        scenario: args.scenario.to_string(),
        chi: config.chi(),
        seed: args.seed,
        complexity: arch.complexity(),
        achieved_power: achieved,
        bound_power: bound,
        ratio: if bound == 0.0 { 1.0 } else { achieved / bound },
        residuals: Residuals {
            symmetry: theta.symmetry_residual(),
            unitarity: theta.unitarity_residual(),
            block: theta.block_residual(),
        },
        channel: ch,
    };
    let mut s = serde_json::to_string_pretty(&out).expect("json");
    s.push('\n');
    Ok(s)
}

pub fn oracle_check(args: &OracleArgs) -> Result<(Table, bool), CliError> {
    check_chi_grid(&args.chi)?;
    let mut table = Table::new(vec![
        "n_elements",
        "n",
        "chi",
        "complexity_budget",
        "brute_force_power",
        "pareto_power",
        "rel_error",
        "partitions_evaluated",
        "maximizers",
        "structure_ok",
        "best_architecture",
        "verdict",
    ]);
    let mut all_pass = true;
    for &n_elements in &args.n {
        if n_elements == 0 || !n_elements.is_multiple_of(2) || n_elements > oracle::MAX_BRUTE_FORCE
        {
            return Err(CliError::Usage(format!(
                "--n values must be even and at most {}, got {n_elements}",
                oracle::MAX_BRUTE_FORCE
            )));
        }
        for &chi in &args.chi {
            for n in 0..=n_elements / 2 {
                let v = oracle::oracle_check(n_elements, n, chi, args.seed)?;
                all_pass &= v.pass;
                table.push(vec![
                    v.n_elements.into(),
                    v.n.into(),
                    v.chi.into(),
                    v.complexity_budget.into(),
                    v.brute_force_power.into(),
                    v.pareto_power.into(),
                    v.rel_error.into(),
                    v.partitions_evaluated.into(),
                    v.maximizers.into(),
                    v.structure_ok.into(),
                    v.best_architecture.into(),
                    (if v.pass { "pass" } else { "fail" }).into(),
                ]);
            }
        }
    }
    Ok((table, all_pass))
}

fn emit(output: &OutputArgs, body: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => write_file(path, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a parsed command; `Ok(true)` when every verdict passed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::SweepGain(args) => {
            let table = sweep_gain(args)?;
            emit(
                &args.output,
                &table.render(args.output.format.unwrap_or(Format::Csv)),
            )?;
            Ok(true)
        }
        Command::Pareto(args) => {
            let table = pareto(args)?;
            emit(
                &args.output,
                &table.render(args.output.format.unwrap_or(Format::Csv)),
            )?;
            Ok(true)
        }
        Command::VerifyScaling(args) => {
            let (table, pass) = verify_scaling(args)?;
            emit(
                &args.output,
                &table.render(args.output.format.unwrap_or(Format::Csv)),
            )?;
            Ok(pass)
        }
        Command::Synth(args) => {
            let body = synth(args)?;
            emit(&args.output, &body)?;
            Ok(true)
        }
        Command::OracleCheck(args) => {
            let (table, pass) = oracle_check(args)?;
            emit(
                &args.output,
                &table.render(args.output.format.unwrap_or(Format::Json)),
            )?;
            Ok(pass)
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let mut msg = String::new();
            let _ = write!(msg, "error: {e}");
            eprintln!("{msg}");
            e.exit_code()
        }
    }
}
