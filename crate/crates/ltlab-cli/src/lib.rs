//! Front-end for the `ltlab` numerical library: flag parsing, config files, JSON envelopes and CSV export.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod envelope;
pub mod recipes;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use chrono::{SecondsFormat, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use ltlab::profile_cache::{ProfileCache, CACHE_ENV};
use ltlab::radial_nls::SolveOptions;
use ltlab::LtError;

use config::{ConfigFile, Settings};
use envelope::{write_atomic, ErrorInfo, Provenance, ResultEnvelope, Table, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Numeric(LtError),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<LtError> for CliError {
    fn from(e: LtError) -> Self {
        CliError::Numeric(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn kind(&self) -> String {
        match self {
            CliError::Usage(_) => "Usage".into(),
            CliError::Config(_) => "ConfigError".into(),
            CliError::Numeric(e) => e.kind().into(),
            CliError::Io(_) => "Io".into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ltlab",
    version,
    about = "Sharp constants of finite-rank Lieb-Thirring inequalities"
)]
pub struct Cli {
    /// Flat key = value file supplying any flag not given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving the envelope JSON and CSV tables.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Ground-state profile cache directory; overrides $LTLAB_CACHE.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Radial step of the ground-state solver.
    #[arg(long, global = true)]
    pub dr: Option<f64>,
    /// Outer radius of the ground-state solver.
    #[arg(long = "profile-rmax", global = true)]
    pub profile_rmax: Option<f64>,
    #[arg(long = "solver-tol", global = true)]
    pub solver_tol: Option<f64>,
    /// Also write a gnuplot script next to each CSV.
    #[arg(long, global = true)]
    pub plot: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Gaussian,
    Translates,
}

impl std::str::FromStr for InitKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    Kappa1Table,
    TildeGaps,
    #[value(name = "binding-1d")]
    Binding1d,
    SolitonSuite,
    ScfGap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// L^sc, L^(1), K^GN and tilde constants at one (κ, d).
    Constants {
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        /// κ grid from:to:step for a CSV `kappa,L_sc,L1,ratio`.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// κ₁(d) where L^(1) meets L^sc.
    Crossing {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Radial ground state Q with its residual diagnostics.
    GroundState {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Self-consistent rank-N optimisation on the line.
    Scf {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "N", alias = "n")]
        n: Option<usize>,
        #[arg(long = "half-width")]
        half_width: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        damping: Option<f64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum)]
        init: Option<InitKind>,
        /// Centre spacing of the translates start.
        #[arg(long)]
        separation: Option<f64>,
        /// Write the per-iteration trace CSV.
        #[arg(long)]
        trace: bool,
    },
    /// Two-copy rank-two quotient against its large-R expansion.
    Binding {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "R-min")]
        r_min: Option<f64>,
        #[arg(long = "R-max")]
        r_max: Option<f64>,
        #[arg(long = "R-step")]
        r_step: Option<f64>,
    },
    /// Manakov two-soliton table `x,v1,v2,res1,res2,c1,c2`.
    Soliton {
        #[arg(long)]
        eta1: Option<f64>,
        #[arg(long)]
        eta2: Option<f64>,
        #[arg(long)]
        a2: Option<f64>,
        /// Explicit a1; by default a1 makes v2(0) = 0.
        #[arg(long)]
        a1: Option<f64>,
        /// Sample grid from:to:step.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Weak quasinorm of a step function given as JSON.
    Weaknorm {
        /// JSON file {"steps": [[value, measure], ...], "p": .., "r": ..}; flags override p and r.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Inline steps value:measure,value:measure.
        #[arg(long, allow_hyphen_values = true)]
        steps: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Runs a named acceptance pipeline and reports pass/fail per check.
    Reproduce {
        #[arg(value_enum)]
        recipe: Recipe,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::Crossing { .. } => "crossing",
            Command::GroundState { .. } => "ground-state",
            Command::Scf { .. } => "scf",
            Command::Binding { .. } => "binding",
            Command::Soliton { .. } => "soliton",
            Command::Weaknorm { .. } => "weaknorm",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}

/// State shared by every subcommand.
pub struct Context<'a> {
    pub settings: Settings<'a>,
    pub solve: SolveOptions,
    pub cache: Option<ProfileCache>,
    pub seed: u64,
}

/// What a subcommand hands back before the envelope is assembled.
pub struct Output {
    pub result: serde_json::Value,
    pub tables: Vec<Table>,
    pub cache_keys: Vec<String>,
    /// A check inside the run failed although the computation completed.
    pub failed: bool,
}

impl Output {
    pub fn new(result: serde_json::Value) -> Self {
        Self {
            result,
            tables: Vec::new(),
            cache_keys: Vec::new(),
            failed: false,
        }
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Parses `args` (program name first), runs, prints the envelope and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            let _ = if code == EXIT_OK {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    let Some(command) = cli.command.as_ref() else {
        let mut cmd = <Cli as clap::CommandFactory>::command();
        let _ = write!(stderr, "{}", cmd.render_help());
        return EXIT_USAGE;
    };
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            let _ = writeln!(stderr, "ltlab: {e}");
            return EXIT_USAGE;
        }
    };
    let started_at = now();
    let mut settings = Settings::new(&file);
    let prepared = prepare(&cli, &mut settings);
    let (mut ctx, out_dir) = match prepared {
        Ok((solve, cache, seed, out_dir)) => (
            Context {
                settings,
                solve,
                cache,
                seed,
            },
            out_dir,
        ),
        Err(e) => {
            let _ = writeln!(stderr, "ltlab: {e}");
            return e.exit_code();
        }
    };
    let outcome = commands::dispatch(command, &mut ctx);
    if let Err(CliError::Usage(m)) = &outcome {
        let _ = writeln!(stderr, "ltlab: {m}");
        return EXIT_USAGE;
    }
    let mut env = ResultEnvelope {
        schema_version: SCHEMA_VERSION.into(),
        tool: "ltlab".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        config: ctx.settings.echo(),
        seed: ctx.seed,
        started_at,
        finished_at: String::new(),
        status: "ok".into(),
        result: None,
        error: None,
        provenance: Provenance {
            cache_dir: ctx.cache.as_ref().map(|c| c.dir().display().to_string()),
            cache_keys: Vec::new(),
        },
        artifacts: Vec::new(),
    };
    let mut code = EXIT_OK;
    match outcome {
        Ok(out) => {
            env.result = Some(out.result);
            env.provenance.cache_keys = out.cache_keys;
            if out.failed {
                env.status = "fail".into();
                code = EXIT_NUMERIC;
            }
            if let Some(dir) = &out_dir {
                match write_tables(dir, &out.tables, cli.plot) {
                    Ok(paths) => env.artifacts = paths,
                    Err(e) => {
                        env.status = "error".into();
                        env.result = None;
                        env.error = Some(ErrorInfo {
                            kind: "Io".into(),
                            message: e.to_string(),
                        });
                        code = EXIT_NUMERIC;
                    }
                }
            }
        }
        Err(e) => {
            env.status = "error".into();
            env.error = Some(ErrorInfo {
                kind: e.kind(),
                message: e.to_string(),
            });
            code = e.exit_code();
        }
    }
    env.finished_at = now();
    let json = serde_json::to_string_pretty(&env).expect("envelope serialises");
    if let Some(dir) = &out_dir {
        let path = dir.join(format!("{}.json", command.name()));
        if let Err(e) = write_atomic(&path, json.as_bytes()) {
            let _ = writeln!(stderr, "ltlab: cannot write {}: {e}", path.display());
            code = EXIT_NUMERIC;
        }
    }
    let _ = writeln!(stdout, "{json}");
    code
}

type Prepared = (SolveOptions, Option<ProfileCache>, u64, Option<PathBuf>);

fn prepare(cli: &Cli, s: &mut Settings<'_>) -> Result<Prepared, CliError> {
    let base = SolveOptions::default();
    let solve = SolveOptions {
        dr: s.get("dr", cli.dr, base.dr)?,
        r_max: s.get("profile-rmax", cli.profile_rmax, base.r_max)?,
        tol: s.get("solver-tol", cli.solver_tol, base.tol)?,
    };
    let seed = s.get("seed", cli.seed, 0u64)?;
    // Cache directory: flag, then $LTLAB_CACHE, then the config file.
    let cache_dir = match &cli.cache {
        Some(p) => Some(p.clone()),
        None => match std::env::var_os(CACHE_ENV) {
            Some(v) => Some(PathBuf::from(v)),
            None => s.optional::<String>("cache", None)?.map(PathBuf::from),
        },
    };
    if let Some(d) = &cache_dir {
        s.record("cache", &d.display().to_string());
        std::fs::create_dir_all(d)?;
    }
    let out = match &cli.out {
        Some(p) => Some(p.clone()),
        None => s.optional::<String>("out", None)?.map(PathBuf::from),
    };
    if let Some(d) = &out {
        s.record("out", &d.display().to_string());
        std::fs::create_dir_all(d)?;
    }
    Ok((solve, cache_dir.map(ProfileCache::new), seed, out))
}

fn write_tables(
    dir: &std::path::Path,
    tables: &[Table],
    plot: bool,
) -> std::io::Result<Vec<String>> {
    let mut paths = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        write_atomic(&path, t.to_csv().as_bytes())?;
        paths.push(path.display().to_string());
        if plot {
            let gp = dir.join(format!("{}.gp", t.name));
            write_atomic(&gp, envelope::plot_script(t).as_bytes())?;
            paths.push(gp.display().to_string());
        }
    }
    Ok(paths)
}
