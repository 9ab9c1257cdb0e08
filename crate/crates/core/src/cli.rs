//! Command-line front end: `simulate`, `figure`, `critical`, and `replay`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numerical failure.
//! CSV numbers use the shortest representation that parses back to the same
//! `f64`. Every run that writes files also writes a `key = value` manifest
//! holding the fully resolved arguments, so `replay` reproduces it exactly.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::closed_form::{critical_gamma, energy_gap, LinearSolution};
use crate::conservation::Observable;
use crate::error::SearchError;
use crate::experiments::{figure_curves, lambda_c, repulsive_threshold, FigureId, DEFAULT_TARGET};
use crate::integrator::{evolve, gamma_repulsive, GammaPolicy};
use crate::model::{SearchConfig, Space};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(SearchError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io(_) | CliError::Csv(_) => EXIT_IO,
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidDimension { .. }
            | SearchError::MarkedOutOfRange { .. }
            | SearchError::InvalidConfig(_)
            | SearchError::UnknownFigure(_)
            | SearchError::UnknownObservable(_)
            | SearchError::UnsupportedParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qwsearch", version, about = "Quantum-walk search on the complete graph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one search run and print its success curve as CSV.
    Simulate(SimulateArgs),
    /// Write the curves of one published figure, one CSV per parameter value.
    Figure(FigureArgs),
    /// Report critical parameters: gamma_c in closed form, or the repulsive lambda threshold.
    Critical(CriticalArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

/// `--gamma` accepts a number or one of the critical policies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaArg {
    Value(f64),
    Repulsive,
    Attractive,
}

impl std::str::FromStr for GammaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "repulsive" => Ok(GammaArg::Repulsive),
            "attractive" => Ok(GammaArg::Attractive),
            _ => s
                .parse::<f64>()
                .map(GammaArg::Value)
                .map_err(|_| format!("expected a number, `repulsive` or `attractive`, got `{s}`")),
        }
    }
}

impl std::fmt::Display for GammaArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GammaArg::Value(g) => write!(f, "{g}"),
            GammaArg::Repulsive => f.write_str("repulsive"),
            GammaArg::Attractive => f.write_str("attractive"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    Subspace,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CriticalMode {
    Gamma,
    Lambda,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: GammaArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub marked: usize,
    /// End time; defaults to 3 pi sqrt(n) / 2.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Step size; defaults to tmax / 20000.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,
    /// Comma-separated subset of h0, gp, heff, rescaled.
    #[arg(long, value_delimiter = ',')]
    pub observables: Vec<String>,
    #[arg(long, value_enum, default_value_t = SpaceArg::Subspace)]
    pub space: SpaceArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(long)]
    pub id: String,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CriticalArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub mode: CriticalMode,
    #[arg(long, default_value_t = 1e-3)]
    pub resolution: f64,
    #[arg(long, default_value_t = DEFAULT_TARGET)]
    pub target: f64,
    /// Defaults to 20 sqrt(n) (200 at n = 100).
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Simulate(args) => cmd_simulate(args, out),
        Command::Figure(args) => cmd_figure(args, out),
        Command::Critical(args) => cmd_critical(args, out),
        Command::Replay(args) => cmd_replay(args, out),
    }
}

/// Shortest round-trip decimal form.
pub fn format_number(x: f64) -> String {
    format!("{x}")
}

/// Flat `key = value` record of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Vec<(String, String)>,
    pub tool_version: String,
    pub wall_time: f64,
}

impl RunManifest {
    fn new(command: &str, argv: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            argv,
            config: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time: 0.0,
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s += &format!("command = {}\n", self.command);
        s += &format!("tool_version = {}\n", self.tool_version);
        s += &format!("wall_time_seconds = {}\n", self.wall_time);
        s += &format!("command_line = {}\n", self.argv.join(" "));
        for (i, a) in self.argv.iter().enumerate() {
            s += &format!("argv.{i} = {a}\n");
        }
        for (k, v) in &self.config {
            s += &format!("{k} = {v}\n");
        }
        s
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        let mut manifest = RunManifest::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| CliError::Usage(format!("malformed manifest line `{line}`")))?;
            map.insert(k.to_string(), v.to_string());
            if !k.starts_with("argv.")
                && !matches!(k, "command" | "tool_version" | "wall_time_seconds" | "command_line")
            {
                manifest.config.push((k.to_string(), v.to_string()));
            }
        }
        manifest.command = map.get("command").cloned().unwrap_or_default();
        manifest.tool_version = map.get("tool_version").cloned().unwrap_or_default();
        manifest.wall_time = map
            .get("wall_time_seconds")
            .and_then(|w| w.parse().ok())
            .unwrap_or(0.0);
        let mut i = 0;
        while let Some(a) = map.get(&format!("argv.{i}")) {
            manifest.argv.push(a.clone());
            i += 1;
        }
        if manifest.argv.is_empty() {
            return Err(CliError::Usage("manifest has no argv entries".into()));
        }
        Ok(manifest)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn write_to(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.render())
    }
}

fn parse_observables(names: &[String]) -> CliResult<Vec<Observable>> {
    let mut requested = Vec::new();
    for name in names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        requested.push(name.parse::<Observable>()?);
    }
    Ok(Observable::ALL.into_iter().filter(|o| requested.contains(o)).collect())
}

/// Resolves flags into a validated configuration.
pub fn simulate_config(args: &SimulateArgs) -> CliResult<SearchConfig> {
    let policy = match args.gamma {
        GammaArg::Value(g) => GammaPolicy::Fixed(g),
        GammaArg::Repulsive => GammaPolicy::RepulsiveCritical,
        GammaArg::Attractive => GammaPolicy::AttractiveCritical,
    };
    let mut config = SearchConfig::new(args.n, policy, args.lambda)
        .with_marked(args.marked)
        .with_sample_every(args.sample_every)
        .with_space(match args.space {
            SpaceArg::Subspace => Space::Subspace,
            SpaceArg::Full => Space::Full,
        });
    if let Some(t_max) = args.tmax {
        config = config.with_horizon(t_max);
    }
    if let Some(dt) = args.dt {
        config = config.with_dt(dt);
    }
    config.validate()?;
    Ok(config)
}

fn simulate_argv(args: &SimulateArgs, config: &SearchConfig, observables: &[Observable]) -> Vec<String> {
    let mut argv = vec![
        "simulate".to_string(),
        "--n".into(),
        config.n.to_string(),
        format!("--gamma={}", args.gamma),
        format!("--lambda={}", config.lambda),
        "--marked".into(),
        config.marked.to_string(),
        format!("--tmax={}", config.t_max),
        format!("--dt={}", config.dt),
        "--sample-every".into(),
        config.sample_every.to_string(),
        "--space".into(),
        match config.space {
            Space::Subspace => "subspace".into(),
            Space::Full => "full".into(),
        },
    ];
    if !observables.is_empty() {
        let names: Vec<&str> = observables.iter().map(|o| o.name()).collect();
        argv.push(format!("--observables={}", names.join(",")));
    }
    if let Some(out) = &args.out {
        argv.push(format!("--out={}", out.display()));
    }
    argv
}

fn write_simulation_csv<W: Write>(
    writer: W,
    trajectory: &crate::integrator::Trajectory,
    observables: &[Observable],
) -> CliResult<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec!["t", "p", "norm"];
    header.extend(observables.iter().map(|o| o.name()));
    csv.write_record(&header)?;
    let columns: Vec<&[f64]> = observables
        .iter()
        .map(|o| trajectory.observable(o.name()).expect("monitor registered"))
        .collect();
    for k in 0..trajectory.len() {
        let mut row = vec![
            format_number(trajectory.times[k]),
            format_number(trajectory.success[k]),
            format_number(trajectory.norm[k]),
        ];
        row.extend(columns.iter().map(|c| format_number(c[k])));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let started = Instant::now();
    let config = simulate_config(args)?;
    let observables = parse_observables(&args.observables)?;
    let trajectory = evolve(&config, &observables)?;

    match &args.out {
        None => write_simulation_csv(out, &trajectory, &observables)?,
        Some(path) => {
            let mut buffer = Vec::new();
            write_simulation_csv(&mut buffer, &trajectory, &observables)?;
            fs::write(path, buffer)?;

            let mut manifest = RunManifest::new("simulate", simulate_argv(args, &config, &observables));
            manifest.set("n", config.n);
            manifest.set("gamma_policy", args.gamma);
            if !config.gamma_policy.is_state_dependent() {
                manifest.set("gamma", format_number(trajectory.gamma[0]));
            }
            manifest.set("lambda", format_number(config.lambda));
            manifest.set("marked", config.marked);
            manifest.set("tmax", format_number(config.t_max));
            manifest.set("dt", format_number(config.dt));
            manifest.set("sample_every", config.sample_every);
            manifest.set("space", format!("{:?}", config.space).to_lowercase());
            let names: Vec<&str> = observables.iter().map(|o| o.name()).collect();
            manifest.set("observables", names.join(","));
            manifest.set("out", path.display());
            manifest.set("rows", trajectory.len());
            manifest.wall_time = started.elapsed().as_secs_f64();
            manifest.write_to(&manifest_path_for(path))?;
        }
    }
    Ok(())
}

/// `<out>.manifest` next to a simulation CSV.
pub fn manifest_path_for(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// `<id>_<param>=<value>.csv`
pub fn figure_file_name(id: FigureId, value: f64) -> String {
    format!("{}_{}={}.csv", id.name(), id.parameter(), format_number(value))
}

pub fn cmd_figure(args: &FigureArgs, out: &mut dyn Write) -> CliResult<()> {
    let started = Instant::now();
    let id: FigureId = args.id.parse()?;
    let table = figure_curves(id, args.n)?;

    fs::create_dir_all(&args.out_dir)?;
    let mut files = Vec::new();
    for curve in &table.curves {
        let name = figure_file_name(id, curve.value);
        let mut csv = csv::Writer::from_path(args.out_dir.join(&name))?;
        csv.write_record(["t", "p"])?;
        for (t, p) in curve.times.iter().zip(&curve.success) {
            csv.write_record([format_number(*t), format_number(*p)])?;
        }
        csv.flush()?;
        files.push(name);
    }

    let argv = vec![
        "figure".to_string(),
        "--id".into(),
        id.name().into(),
        "--n".into(),
        args.n.to_string(),
        format!("--out-dir={}", args.out_dir.display()),
    ];
    let mut manifest = RunManifest::new("figure", argv);
    manifest.set("id", id);
    manifest.set("n", args.n);
    manifest.set("parameter", id.parameter());
    let grid: Vec<String> = id.grid().iter().map(|v| format_number(*v)).collect();
    manifest.set("grid", grid.join(","));
    manifest.set("horizon", format_number(table.horizon));
    manifest.set("dt", format_number(table.dt));
    manifest.set("sample_every", table.sample_every);
    manifest.set("files", files.join(","));
    manifest.wall_time = started.elapsed().as_secs_f64();
    manifest.write_to(&args.out_dir.join(format!("{}_manifest.txt", id.name())))?;

    for f in &files {
        writeln!(out, "{}", args.out_dir.join(f).display())?;
    }
    Ok(())
}

pub fn cmd_critical(args: &CriticalArgs, out: &mut dyn Write) -> CliResult<()> {
    crate::model::check_dimension(args.n)?;
    match args.mode {
        CriticalMode::Gamma => {
            let gamma_c = critical_gamma(args.n);
            let sol = LinearSolution::new(args.n, gamma_c)?;
            writeln!(out, "n = {}", args.n)?;
            writeln!(out, "gamma_c = {}", format_number(gamma_c))?;
            writeln!(out, "delta_e_c = {}", format_number(energy_gap(args.n, gamma_c)))?;
            writeln!(out, "t_star_c = {}", format_number(sol.peak_time()))?;
            writeln!(out, "p_star_c = {}", format_number(sol.peak_probability()))?;
        }
        CriticalMode::Lambda => {
            let horizon = args.horizon.unwrap_or(20.0 * (args.n as f64).sqrt());
            let report = repulsive_threshold(args.n, args.resolution, args.target, horizon)?;
            writeln!(out, "n = {}", args.n)?;
            writeln!(out, "lambda_c = {}", format_number(lambda_c(args.n)))?;
            writeln!(out, "lambda_low = {}", format_number(report.lambda_low))?;
            writeln!(out, "lambda_high = {}", format_number(report.lambda_high))?;
            writeln!(out, "gamma_low = {}", format_number(gamma_repulsive(args.n, report.lambda_low)))?;
            writeln!(out, "resolution = {}", format_number(args.resolution))?;
            writeln!(out, "target = {}", format_number(report.target))?;
            writeln!(out, "horizon = {}", format_number(report.horizon))?;
            writeln!(out, "dt = {}", format_number(report.dt))?;
        }
    }
    Ok(())
}

pub fn cmd_replay(args: &ReplayArgs, out: &mut dyn Write) -> CliResult<()> {
    let manifest = RunManifest::parse(&fs::read_to_string(&args.manifest)?)?;
    if manifest.argv.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Usage("refusing to replay a replay".into()));
    }
    let argv = std::iter::once("qwsearch".to_string()).chain(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli.command, out)
}
