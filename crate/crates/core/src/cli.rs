//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, invalid
//! configuration, unwritable output), 2 when `validate` finds a failing
//! criterion.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::acceptance::{Scale, Suite};
use crate::config::{RunConfig, Topology};
use crate::experiment::{estimate_moments, run, run_sweep, theta_grid, Geometry};
use crate::model::{Angle, Settings};
use crate::optics::{PolarizationMode, RetardationLaw, RetardationParams};
use crate::output::{Comparison, Format, OutputRow, Table};
use crate::station::IdentificationRule;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATE_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "eeprb", version, about = "Event-by-event EPRB / extended EPRB simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Simulate one setting (a, b, c, d).
    Run(RunArgs),
    /// Simulate a θ grid with a = b + θ, c = a + c_offset, d fixed.
    Sweep(SweepArgs),
    /// Print the closed-form curves for a sweep without simulating.
    Oracle(OracleArgs),
    /// Run the acceptance criteria and report pass/fail for each.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Eprb,
    Eeprb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Orthogonal,
    Parallel,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawArg {
    None,
    Memoryless,
    Learning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdentArg {
    Local,
    Coincidence,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

/// Radians, or degrees with a `deg:` prefix.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let (text, scale) = match s.strip_prefix("deg:") {
        Some(rest) => (rest, PI / 180.0),
        None => (s, 1.0),
    };
    let v: f64 = text.trim().parse().map_err(|_| format!("not an angle: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("angle must be finite: {s:?}"));
    }
    Ok(v * scale)
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    #[arg(long, value_enum, default_value_t = SourceArg::Orthogonal)]
    pub source: SourceArg,
    /// Photon 1 polarization for --source fixed.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Photon 2 polarization for --source fixed.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value_t = TopologyArg::Eeprb)]
    pub topology: TopologyArg,
    #[arg(long, value_enum, default_value_t = IdentArg::Local)]
    pub ident: IdentArg,
    /// Identification window W.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = LawArg::Memoryless)]
    pub law: LawArg,
    /// Learning rate, required with --law learning.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 5000.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Detection efficiency.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reuse the same random stream for every setting.
    #[arg(long)]
    pub cfd: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value_t = 0.0)]
    pub b: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value_t = FRAC_PI_6)]
    pub c_offset: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value_t = FRAC_PI_3)]
    pub d: f64,
}

impl GeometryArgs {
    pub fn geometry(&self) -> Geometry {
        Geometry {
            b: Angle(self.b),
            c_offset: Angle(self.c_offset),
            d: Angle(self.d),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 25)]
    pub grid_points: usize,
    #[arg(long, value_parser = parse_angle, default_value_t = PI)]
    pub theta_max: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value_t = 0.0)]
    pub a: f64,
    /// Second-stage angle at station 1; defaults to a + c_offset.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 25)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run only these criteria (repeatable).
    #[arg(long = "only", value_parser = clap::value_parser!(u8).range(1..=11))]
    pub only: Vec<u8>,
}

/// A diagnostic that maps to exit code 1.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

impl SourceArgs {
    fn mode(&self) -> Result<PolarizationMode, UsageError> {
        match (self.source, self.p, self.q) {
            (SourceArg::Fixed, Some(p), Some(q)) => Ok(PolarizationMode::Fixed {
                p: Angle(p),
                q: Angle(q),
            }),
            (SourceArg::Fixed, _, _) => Err(usage("--source fixed needs both --p and --q")),
            (_, None, None) => Ok(match self.source {
                SourceArg::Orthogonal => PolarizationMode::OrthogonalRandom,
                _ => PolarizationMode::ParallelRandom,
            }),
            _ => Err(usage("--p and --q only apply to --source fixed")),
        }
    }

    fn identification(&self) -> IdentificationRule {
        match self.ident {
            IdentArg::Local => IdentificationRule::LocalWindow(self.window),
            IdentArg::Coincidence => IdentificationRule::Coincidence(self.window),
            IdentArg::None => IdentificationRule::None,
        }
    }

    fn topology(&self) -> Topology {
        match self.topology {
            TopologyArg::Eprb => Topology::Eprb,
            TopologyArg::Eeprb => Topology::Eeprb,
        }
    }

    /// A config carrying only what the oracle columns depend on.
    fn config(&self) -> Result<RunConfig, UsageError> {
        Ok(RunConfig {
            topology: self.topology(),
            source: self.mode()?,
            identification: self.identification(),
            ..RunConfig::default()
        })
    }
}

impl SimArgs {
    pub fn config(&self, settings: Settings) -> Result<RunConfig, UsageError> {
        let law = match (self.law, self.gamma) {
            (LawArg::Learning, Some(gamma)) => RetardationLaw::Learning { gamma },
            (LawArg::Learning, None) => return Err(usage("--law learning needs --gamma")),
            (_, Some(_)) => return Err(usage("--gamma only applies to --law learning")),
            (LawArg::None, None) => RetardationLaw::None,
            (LawArg::Memoryless, None) => RetardationLaw::Memoryless,
        };
        let config = RunConfig {
            settings,
            law,
            retardation: RetardationParams {
                t_max: self.tmax,
                alpha: self.alpha,
                beta: self.beta,
            },
            eta: self.eta,
            n_pairs: self.pairs,
            seed: self.seed,
            cfd: self.cfd,
            ..self.source.config()?
        };
        config.validate().map_err(|e| usage(e.to_string()))?;
        Ok(config)
    }
}

impl OutArgs {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    /// Writes `text` to the chosen file or to standard output.
    fn emit(&self, text: &str) -> Result<(), UsageError> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| usage(format!("cannot write to stdout: {e}"))),
        }
    }

    /// Fails early, before any simulation, when the file cannot be created.
    fn check_writable(&self) -> Result<(), UsageError> {
        if let Some(path) = &self.out {
            std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn grid_of(g: &GridArgs) -> Result<Vec<Angle>, UsageError> {
    if g.grid_points == 0 {
        return Err(usage("--grid-points must be at least 1"));
    }
    Ok(theta_grid(g.grid_points, g.theta_max))
}

pub fn run_command(args: &RunArgs) -> Result<(), UsageError> {
    let g = &args.geometry;
    let settings = Settings::new(args.a, g.b, args.c.unwrap_or(args.a + g.c_offset), g.d);
    let config = args.sim.config(settings)?;
    args.out.check_writable()?;
    let moments = estimate_moments(&run(&config).map_err(|e| usage(e.to_string()))?);
    let mut table = Table::new(&config, &[]);
    let theta = settings.a - settings.b;
    table.rows.push(OutputRow::measured(theta, settings, &moments, Comparison::for_config(&config)));
    args.out.emit(&table.render(args.out.format()))
}

pub fn sweep_command(args: &SweepArgs) -> Result<(), UsageError> {
    let config = args.sim.config(Settings::default())?;
    let grid = grid_of(&args.grid)?;
    args.out.check_writable()?;
    let geometry = args.geometry.geometry();
    let points = run_sweep(&config, &grid, geometry).map_err(|e| usage(e.to_string()))?;
    let table = Table::for_sweep(&config, &points, geometry, (args.grid.grid_points, args.grid.theta_max));
    args.out.emit(&table.render(args.out.format()))
}

pub fn oracle_command(args: &OracleArgs) -> Result<(), UsageError> {
    let config = args.source.config()?;
    config.validate().map_err(|e| usage(e.to_string()))?;
    let grid = grid_of(&args.grid)?;
    args.out.check_writable()?;
    let geometry = args.geometry.geometry();
    let cmp = Comparison::for_config(&config);
    let mut table = Table::new(
        &config,
        &[
            ("geometry", serde_json::to_string(&geometry).expect("geometry serializes")),
            ("grid", format!("points={} theta_max={}", args.grid.grid_points, args.grid.theta_max)),
        ],
    );
    table.rows = grid
        .iter()
        .map(|&theta| OutputRow::oracle_only(theta, geometry.settings(theta), config.topology, cmp))
        .collect();
    args.out.emit(&table.render(args.out.format()))
}

/// Prints one line per criterion; `Ok(true)` when all pass.
pub fn validate_command(args: &ValidateArgs) -> Result<bool, UsageError> {
    if args.pairs == 0 || args.grid_points == 0 {
        return Err(usage("--pairs and --grid-points must be at least 1"));
    }
    let scale = Scale {
        n_pairs: args.pairs,
        grid_points: args.grid_points,
        seed: args.seed,
    };
    let mut suite = Suite::new(scale, std::env::current_exe().ok());
    let ids: Vec<u8> = if args.only.is_empty() { (1..=11).collect() } else { args.only.clone() };
    let mut all = true;
    for id in ids {
        let report = suite.criterion(id);
        println!("{report}");
        all &= report.passed;
    }
    Ok(all)
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Cmd::Run(a) => run_command(a).map(|_| true),
        Cmd::Sweep(a) => sweep_command(a).map(|_| true),
        Cmd::Oracle(a) => oracle_command(a).map(|_| true),
        Cmd::Validate(a) => validate_command(a),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VALIDATE_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
