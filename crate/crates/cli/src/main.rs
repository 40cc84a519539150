//! `grn`: command-line front end for the two-gene network toolkit.
//!
//! Exit codes: 0 success, 1 an analysis did not converge, 2 usage or
//! configuration error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grn_core::equilibrium::{solve_equilibrium, DEFAULT_MAX_ITER, DEFAULT_TOL};
use grn_core::fit::{fit, FitOptions, FitProblem, TimeSeries};
use grn_core::hopf::{analyze, HopfSearch};
use grn_core::lipschitz::{lipschitz, DomainBox};
use grn_core::report::run_full_analysis;
use grn_core::sigmoid::{match_steepness, match_weighted_basal_slope, match_weighted_custom_threshold, HillParams};
use grn_core::simulate::{integrate, HistorySpec, DEFAULT_DT};
use grn_core::stability::{classify, trace_negativity_certificate};
use grn_core::{DelayConfig, Error, Formulation, Model, ParameterSet, State};
use serde_json::json;

const PRESET_DIR_VAR: &str = "GRN_PRESET_DIR";

const UNITS_NOTE: &str = "Units: concentrations nM, times and delays min, production rates nM/min, \
decay and coupling rates 1/min.\n\
Exit status: 0 success, 1 analysis did not converge, 2 usage or configuration error.\n\
Presets are looked up in $GRN_PRESET_DIR/<name>.conf before the built-in ones.";

#[derive(Parser)]
#[command(
    name = "grn",
    version,
    about = "Logistic two-gene network analysis: matching, equilibria, stability, Hopf, Lipschitz bounds, simulation, fitting",
    after_help = UNITS_NOTE
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive logistic parameters from Hill or basal-rate inputs, or print a full parameter set
    #[command(after_help = UNITS_NOTE)]
    Match(MatchArgs),
    /// Solve for the steady state
    #[command(after_help = UNITS_NOTE)]
    Equilibrium(EquilibriumArgs),
    /// Delay-free stability at the steady state
    #[command(after_help = UNITS_NOTE)]
    Stability(CommonArgs),
    /// Delay-induced Hopf crossings for symmetric self-repression delays
    #[command(after_help = UNITS_NOTE)]
    Hopf(HopfArgs),
    /// Closed-form Lipschitz bounds over a state box
    #[command(after_help = UNITS_NOTE)]
    Lipschitz(LipschitzArgs),
    /// Integrate the (delay) differential equations
    #[command(after_help = UNITS_NOTE)]
    Simulate(SimulateArgs),
    /// Least-squares fit of model parameters to a time series
    #[command(after_help = UNITS_NOTE)]
    Fit(FitArgs),
    /// Full comparison of both logistic formulations as one JSON document
    #[command(after_help = UNITS_NOTE)]
    Report(ReportArgs),
}

#[derive(Args, Clone)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Named parameter set (vinoth-table1, fig2-illustrative, or a file in $GRN_PRESET_DIR)
    #[arg(long, group = "source")]
    preset: Option<String>,
    /// Parameter file in `key = value unit` format
    #[arg(long, group = "source")]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[command(flatten)]
    source: Source,
    /// Model right-hand side
    #[arg(long, value_enum, default_value = "linear-additive")]
    formulation: FormulationArg,
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum FormulationArg {
    Hill,
    LinearAdditive,
    Weighted,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Hill => Formulation::Hill,
            FormulationArg::LinearAdditive => Formulation::LinearAdditive,
            FormulationArg::Weighted => Formulation::Weighted,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct MatchArgs {
    /// Basal production rate g (nM/min) for weighted activation matching
    #[arg(long)]
    g_basal: Option<f64>,
    /// Custom activation threshold (nM/min, same units as the weighted signal); needs --g-basal
    #[arg(long, requires = "g_basal")]
    threshold: Option<f64>,
    /// Hill threshold (nM) for steepness matching
    #[arg(long, requires = "hill_n")]
    hill_theta: Option<f64>,
    /// Hill coefficient (dimensionless) for steepness matching
    #[arg(long, requires = "hill_theta")]
    hill_n: Option<f64>,
    /// Print the full derived parameter set of this preset
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Print the full derived parameter set of this file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the parameter set in `key = value unit` form instead of JSON
    #[arg(long)]
    as_config: bool,
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquilibriumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Initial guess for A (nM); defaults to the repression threshold A0
    #[arg(long)]
    guess_a: Option<f64>,
    /// Initial guess for B (nM); defaults to the repression threshold B0
    #[arg(long)]
    guess_b: Option<f64>,
    /// Residual tolerance (nM/min)
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Newton iteration limit
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args)]
struct HopfArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of higher-order replicas τ_c + 2kπ/ω_c to list
    #[arg(long, default_value_t = 3)]
    k_max: u32,
    /// Upper end of the frequency search window (1/min)
    #[arg(long, default_value_t = 5.0)]
    omega_max: f64,
    /// Seeds per axis of the (ω, ωτ) search grid
    #[arg(long, default_value_t = 60)]
    grid: usize,
}

#[derive(Args)]
struct LipschitzArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Upper bound of the A range of the box (nM)
    #[arg(long, default_value_t = 500.0)]
    a_max: f64,
    /// Upper bound of the B range of the box (nM)
    #[arg(long, default_value_t = 500.0)]
    b_max: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// End time (min)
    #[arg(long)]
    t_end: f64,
    /// Step size (min)
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Constant history value of A for t <= 0 (nM)
    #[arg(long, default_value_t = 10.0)]
    init_a: f64,
    /// Constant history value of B for t <= 0 (nM)
    #[arg(long, default_value_t = 10.0)]
    init_b: f64,
    /// Symmetric self-repression delay τ1 = τ2 (min); overrides the [delays] section
    #[arg(long)]
    tau: Option<f64>,
    /// Output format: csv (t,A,B) or json (full trajectory with metadata)
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Observations as CSV with header t,A,B[,w] (min, nM, nM, dimensionless weight);
    /// the first row must be at t = 0 and sets the initial state
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated parameter names to fit; the source supplies their initial guesses
    #[arg(long, value_delimiter = ',', required = true)]
    free: Vec<String>,
    /// Integration step (min)
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Levenberg-Marquardt iteration limit
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    source: Source,
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed command with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::NonFinite { .. } => 1,
            Error::InvalidParameter { .. } | Error::Unsupported(_) | Error::Config(_) | Error::Io(_) => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<bool, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// `Ok(false)` means the analysis ran but did not converge.
fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Match(a) => cmd_match(a),
        Command::Equilibrium(a) => cmd_equilibrium(a),
        Command::Stability(a) => cmd_stability(a),
        Command::Hopf(a) => cmd_hopf(a),
        Command::Lipschitz(a) => cmd_lipschitz(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn load(preset: Option<&str>, config: Option<&Path>) -> Result<ParameterSet, Failure> {
    let set = match (preset, config) {
        (Some(name), None) => {
            let dir = std::env::var_os(PRESET_DIR_VAR).map(PathBuf::from);
            ParameterSet::resolve_preset(name, dir.as_deref())?
        }
        (None, Some(path)) => ParameterSet::load(path)?,
        _ => {
            return Err(Failure {
                code: 2,
                message: "give exactly one of --preset or --config".into(),
            })
        }
    };
    for w in set.core.range_warnings() {
        log::warn!("{w}");
    }
    Ok(set)
}

fn model_of(c: &CommonArgs) -> Result<(ParameterSet, Model), Failure> {
    let set = load(c.source.preset.as_deref(), c.source.config.as_deref())?;
    let model = set.model(c.formulation.into());
    Ok((set, model))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", p.display()),
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut out = open_out(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn emit_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    s.push('\n');
    emit_text(path, &s)
}

fn cmd_match(a: MatchArgs) -> CmdResult {
    let mut doc = serde_json::Map::new();
    if let Some(g) = a.g_basal {
        let m = match a.threshold {
            Some(t) => match_weighted_custom_threshold(g, t)?,
            None => match_weighted_basal_slope(g)?,
        };
        doc.insert(
            "weighted".into(),
            json!({
                "kappa": m.kappa,
                "theta": m.theta,
                "lambda": m.lambda,
                "basal_rate": m.basal_rate(),
                "slope_coefficient": m.slope_coefficient(),
                "units": { "kappa": "nM/min", "theta": "nM/min", "lambda": "min/nM", "basal_rate": "nM/min" },
            }),
        );
    }
    if let (Some(theta), Some(n)) = (a.hill_theta, a.hill_n) {
        let lambda = match_steepness(&HillParams::new(theta, n)?);
        doc.insert("steepness".into(), json!({ "lambda": lambda, "units": { "lambda": "1/nM" } }));
    }
    if a.preset.is_some() || a.config.is_some() {
        let set = load(a.preset.as_deref(), a.config.as_deref())?;
        if a.as_config {
            emit_text(a.out.as_deref(), &set.to_config_string())?;
            return Ok(true);
        }
        doc.insert(
            "parameter_set".into(),
            serde_json::to_value(&set).expect("parameter set serialises"),
        );
    }
    if doc.is_empty() {
        return Err(Failure {
            code: 2,
            message: "nothing to match: give --g-basal, --hill-theta/--hill-n, --preset or --config".into(),
        });
    }
    emit_json(a.out.as_deref(), &doc)?;
    Ok(true)
}

fn cmd_equilibrium(a: EquilibriumArgs) -> CmdResult {
    let (_, model) = model_of(&a.common)?;
    let c = model.core();
    let guess = State::new(a.guess_a.unwrap_or(c.a0), a.guess_b.unwrap_or(c.b0));
    let r = solve_equilibrium(&model, guess, a.tol, a.max_iter)?;
    emit_json(a.common.out.as_deref(), &r)?;
    Ok(r.converged)
}

fn cmd_stability(a: CommonArgs) -> CmdResult {
    let (_, model) = model_of(&a)?;
    let eq = grn_core::equilibrium::solve_default(&model)?;
    let j = model.jacobian(eq.point)?;
    let doc = json!({
        "formulation": model.formulation(),
        "equilibrium": eq,
        "jacobian": j,
        "stability": classify(&j),
        "trace_certificate": trace_negativity_certificate(&model, eq.point)?,
    });
    emit_json(a.out.as_deref(), &doc)?;
    Ok(eq.converged)
}

fn cmd_hopf(a: HopfArgs) -> CmdResult {
    let (set, model) = model_of(&a.common)?;
    if !set.delays.is_delay_free() {
        grn_core::hopf::ensure_supported_delays(&set.delays)?;
    }
    let eq = grn_core::equilibrium::solve_default(&model)?;
    let search = HopfSearch {
        omega_max: a.omega_max,
        grid_density: a.grid,
        ..HopfSearch::default()
    };
    let h = analyze(&model, eq.point, &search, a.k_max)?;
    let found = h.primary().is_some();
    if !found {
        eprintln!("no Hopf crossing found in the search window");
    }
    let doc = json!({
        "formulation": model.formulation(),
        "equilibrium": eq.point,
        "coefficients": h.coefficients,
        "primary": h.primary(),
        "points": h.points,
        "higher_order": h.higher_order,
    });
    emit_json(a.common.out.as_deref(), &doc)?;
    Ok(eq.converged && found)
}

fn cmd_lipschitz(a: LipschitzArgs) -> CmdResult {
    let (_, model) = model_of(&a.common)?;
    let r = lipschitz(&model, DomainBox::new(a.a_max, a.b_max)?)?;
    let doc = json!({ "report": r, "step_hint": r.step_hint() });
    emit_json(a.common.out.as_deref(), &doc)?;
    Ok(true)
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let (set, model) = model_of(&a.common)?;
    let delays = a.tau.map(DelayConfig::symmetric).unwrap_or(set.delays);
    let history = HistorySpec::constant(State::new(a.init_a, a.init_b))?;
    let traj = integrate(&model, &delays, &history, a.t_end, a.dt)?;
    for d in &traj.diagnostics {
        log::warn!("{d}");
    }
    match a.format {
        OutputFormat::Csv => {
            let mut out = open_out(a.common.out.as_deref())?;
            traj.write_csv(&mut out)?;
            out.flush()?;
        }
        OutputFormat::Json => emit_json(a.common.out.as_deref(), &traj)?,
    }
    Ok(true)
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    let (set, model) = model_of(&a.common)?;
    let file = File::open(&a.data).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", a.data.display()),
    })?;
    let data = TimeSeries::read_csv(file)?;
    let problem = FitProblem {
        history: data.initial_history()?,
        data,
        model,
        free_params: a.free,
        delays: set.delays,
        dt: a.dt,
    };
    let opts = FitOptions {
        max_iter: a.max_iter,
        ..FitOptions::default()
    };
    let r = fit(&problem, &opts)?;
    emit_json(a.common.out.as_deref(), &r)?;
    Ok(r.converged)
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let set = load(a.source.preset.as_deref(), a.source.config.as_deref())?;
    let r = run_full_analysis(&set.core)?;
    emit_text(a.out.as_deref(), &r.to_json())?;
    Ok(r.all_converged)
}
