//! Command-line front end.

pub mod output;
pub mod presets;
pub mod spec;
pub mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{oracle_moments, FockConfig};
use crate::mode_algebra::{validate_symplectic, InputState, DEFAULT_TOLERANCE};
use crate::models::{read_matrix_file, ModelId, NonlinearPhase};
use crate::moments::moments_general;
use crate::noise_figure::Regime;
use presets::Preset;
use spec::{Format, Grid, Injection, Spacing, SweepConfig, SweepMethod};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

/// Largest oracle deviation accepted by `oracle`.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "fopa", version, about = "Gain and quantum noise figure of multi-mode fiber parametric amplifiers")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Errors only.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate gains and noise figures over a xi (and theta) grid.
    Sweep(Box<SweepArgs>),
    /// Check the commutator-preservation conditions of a transfer matrix.
    Validate(ValidateArgs),
    /// Compare closed-form moments with the truncated Fock-space oracle.
    Oracle(OracleArgs),
    /// Regenerate a fixed figure dataset.
    Preset(PresetArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Pia,
    Psa,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON sweep configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// two, four or custom:<matrix.json>
    #[arg(long)]
    model: Option<String>,
    /// Single nonlinear phase gamma*P*z.
    #[arg(long, conflicts_with_all = ["xi_start", "xi_stop", "xi_count", "gamma"])]
    xi: Option<f64>,
    #[arg(long)]
    xi_start: Option<f64>,
    #[arg(long)]
    xi_stop: Option<f64>,
    #[arg(long)]
    xi_count: Option<usize>,
    /// Logarithmic xi spacing.
    #[arg(long)]
    xi_log: bool,
    /// Nonlinear coefficient (1/W/km); with --power and --length replaces --xi.
    #[arg(long, requires_all = ["power", "length"])]
    gamma: Option<f64>,
    /// Pump power (W).
    #[arg(long, requires = "gamma")]
    power: Option<f64>,
    /// Fiber length (km).
    #[arg(long, requires = "gamma")]
    length: Option<f64>,
    /// Single relative phase.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["theta_start", "theta_stop", "theta_count"])]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_stop: Option<f64>,
    #[arg(long)]
    theta_count: Option<usize>,
    /// Theta values are in units of pi.
    #[arg(long)]
    theta_pi: bool,
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    /// Number of leading modes injected.
    #[arg(long, conflicts_with = "injected_flags")]
    injected: Option<usize>,
    /// Per-mode injection flags, e.g. 1,1,0,1.
    #[arg(long, value_delimiter = ',')]
    injected_flags: Option<Vec<u8>>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Input photon number per injected mode for --method exact.
    #[arg(long)]
    alpha_sq: Option<f64>,
    /// Reported modes (1-based), e.g. 1,3.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<usize>>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0.0)]
    xi: f64,
    /// Scaled residual tolerance.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0.0)]
    xi: f64,
    /// Input amplitude of the next mode as re or re,im (repeatable);
    /// remaining modes are vacuum.
    #[arg(long = "alpha", allow_hyphen_values = true)]
    alphas: Vec<String>,
    /// Starting per-mode Fock cutoff.
    #[arg(long, default_value_t = 8)]
    cutoff: usize,
    #[arg(long, default_value_t = 40)]
    max_cutoff: usize,
}

#[derive(Debug, Args)]
struct PresetArgs {
    #[arg(value_enum)]
    name: Preset,
    /// Directory receiving one CSV per model.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose, cli.quiet);
    let outcome = match cli.command {
        Command::Sweep(a) => cmd_sweep(*a),
        Command::Validate(a) => cmd_validate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Preset(a) => cmd_preset(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, _) => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        Error::RowCondition { .. } | Error::Hermiticity { .. } => EXIT_VALIDATION,
        _ => EXIT_USAGE,
    }
}

fn grid_from_flags(
    single: Option<f64>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    log: bool,
    name: &str,
) -> Result<Option<Grid>> {
    if let Some(x) = single {
        return Ok(Some(Grid::single(x)));
    }
    match (start, stop, count) {
        (None, None, None) => Ok(None),
        (start, Some(stop), Some(count)) => Ok(Some(Grid {
            start: start.unwrap_or(0.0),
            stop,
            count,
            spacing: if log { Spacing::Log } else { Spacing::Linear },
        })),
        _ => Err(Error::InvalidSpec(format!(
            "{name} range needs --{name}-stop and --{name}-count"
        ))),
    }
}

fn flags_config(a: &SweepArgs) -> Result<SweepConfig> {
    let mut xi = grid_from_flags(a.xi, a.xi_start, a.xi_stop, a.xi_count, a.xi_log, "xi")?;
    if let (Some(g), Some(p), Some(l)) = (a.gamma, a.power, a.length) {
        xi = Some(Grid::single(NonlinearPhase::from_fiber(g, p, l)?.value()));
    }
    if a.xi_log && xi.is_none_or(|g| g.count == 1) {
        return Err(Error::InvalidSpec("--xi-log needs an xi range".into()));
    }
    let theta = grid_from_flags(a.theta, a.theta_start, a.theta_stop, a.theta_count, false, "theta")?;
    let injected = match (&a.injected, &a.injected_flags) {
        (Some(p), _) => Some(Injection::Leading(*p)),
        (None, Some(f)) => Some(Injection::Flags(f.iter().map(|&y| y != 0).collect())),
        (None, None) => None,
    };
    Ok(SweepConfig {
        model: a.model.clone(),
        xi,
        theta,
        theta_in_pi: a.theta_pi.then_some(true),
        regime: a.regime.map(|r| match r {
            RegimeArg::Pia => Regime::Pia,
            RegimeArg::Psa => Regime::Psa,
        }),
        injected,
        method: a.method.map(|m| match m {
            MethodArg::ClosedForm => SweepMethod::ClosedForm,
            MethodArg::Exact => SweepMethod::Exact,
        }),
        alpha_sq: a.alpha_sq,
        modes: a.modes.clone(),
        output: a.output.clone(),
        format: a.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
    })
}

fn cmd_sweep(a: SweepArgs) -> Result<i32> {
    let file = match &a.config {
        Some(path) => SweepConfig::read(path)?,
        None => SweepConfig::default(),
    };
    let spec = flags_config(&a)?.or(file).into_spec()?;
    let rows = sweep::run_sweep(&spec)?;

    let write = |out: &mut dyn Write| -> Result<()> {
        match spec.format {
            Format::Csv => output::write_csv(&rows, out),
            Format::Json => output::write_json(&rows, out),
        }
    };
    let summary = sweep::summarize(&rows);
    match &spec.output {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
            output::write_summary(&summary, io::stdout().lock())?;
        }
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)?;
            out.flush()?;
            output::write_summary(&summary, io::stderr().lock())?;
        }
    }
    Ok(EXIT_OK)
}

fn load_model(model: &str, xi: f64) -> Result<crate::mode_algebra::TransferMatrix> {
    match model.parse::<ModelId>()? {
        // validation reports on whatever the file holds
        ModelId::Custom(path) => read_matrix_file(&path),
        id => id.build(NonlinearPhase::new(xi)?),
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let m = load_model(&a.model, a.xi)?;
    let report = validate_symplectic(&m, a.tol);
    let mut out = io::stdout().lock();
    writeln!(out, "matrix: {} ({} modes, signature {})", m.label(), m.n(), m.signature())?;
    writeln!(out, "{:>6} {:>14} {:>14}", "row", "residual", "scaled")?;
    for r in &report.rows {
        writeln!(out, "{:>6} {:>14.3e} {:>14.3e}", r.row, r.absolute, r.scaled)?;
    }
    writeln!(out, "{:>6} {:>14} {:>14}", "pair", "residual", "scaled")?;
    for p in &report.pairs {
        writeln!(out, "{:>6} {:>14.3e} {:>14.3e}", format!("{},{}", p.j, p.l), p.absolute, p.scaled)?;
    }
    for r in report.failing_rows() {
        writeln!(out, "row {} violates the row condition (scaled residual {:.3e})", r.row, r.scaled)?;
    }
    for p in report.failing_pairs() {
        writeln!(out, "rows {} and {} violate the commutator condition (scaled residual {:.3e})", p.j, p.l, p.scaled)?;
    }
    let pass = report.passed();
    writeln!(out, "{} (tolerance {:.1e})", if pass { "PASS" } else { "FAIL" }, a.tol)?;
    Ok(if pass { EXIT_OK } else { EXIT_VALIDATION })
}

fn parse_alpha(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidInput(format!("cannot parse amplitude {s:?} (expected re or re,im)"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad()));
    let re = parts.next().ok_or_else(bad)??;
    let im = parts.next().transpose()?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Relative deviation, treating differences below `1e-9` as agreement.
pub fn deviation(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d <= 1e-9 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

fn cmd_oracle(a: OracleArgs) -> Result<i32> {
    let m = load_model(&a.model, a.xi)?;
    let n = m.n();
    if a.alphas.len() > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.alphas.len(),
        });
    }
    let mut alphas = a.alphas.iter().map(|s| parse_alpha(s)).collect::<Result<Vec<_>>>()?;
    alphas.resize(n, Complex64::new(0.0, 0.0));

    let closed = moments_general(&m, &InputState::from_alphas(alphas.clone())?)?;
    let config = FockConfig {
        cutoff: a.cutoff,
        max_cutoff: a.max_cutoff,
        ..FockConfig::default()
    };
    let oracle = oracle_moments(&m, &alphas, &config)?;

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:>4} {:>20} {:>20} {:>20} {:>20} {:>10}",
        "mode", "mean (closed)", "mean (oracle)", "var (closed)", "var (oracle)", "deviation"
    )?;
    let mut worst: f64 = 0.0;
    for (j, (c, o)) in closed.modes.iter().zip(&oracle.moments.modes).enumerate() {
        let dev = deviation(c.mean_out, o.mean_out).max(deviation(c.var_out, o.var_out));
        worst = worst.max(dev);
        writeln!(
            out,
            "{:>4} {:>20.12e} {:>20.12e} {:>20.12e} {:>20.12e} {:>10.2e}",
            j + 1,
            c.mean_out,
            o.mean_out,
            c.var_out,
            o.var_out,
            dev
        )?;
    }
    writeln!(
        out,
        "cutoff {}, truncation loss {:.2e}, max deviation {:.3e}",
        oracle.cutoff, oracle.truncation_loss, worst
    )?;
    let pass = worst <= ORACLE_TOLERANCE;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
    Ok(if pass { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_preset(a: PresetArgs) -> Result<i32> {
    for path in presets::run_preset(a.name, &a.out_dir)? {
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}
