//! Command-line pipelines: design a waveform, build comparison baselines, and
//! evaluate waveforms into CSV series.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::{json, Map, Value};
use umwave::eval::{
    beampattern_sweep, ber_monte_carlo, correlation_profile, random_baseline, L2Objective,
};
use umwave::format::{
    ber_to_csv, parse_scenario, parse_waveform, profile_to_csv, scenario_hash, sha256_hex, sweep_to_csv,
    trace_to_csv, waveform_to_csv, RunManifest, SolverConfigRecord,
};
use umwave::manifold::random_point;
use umwave::seed::derive_seed;
use umwave::solver::Solution;
use umwave::{solve, Objective, Scenario, SolveStatus, SolverConfig, TermWeights, WaveformMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
/// The solver stopped because the line search failed at the smallest radius.
pub const EXIT_STALLED: i32 = 3;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SNR_DB: [f64; 7] = [-20.0, -17.5, -15.0, -12.5, -10.0, -7.5, -5.0];

#[derive(Debug, Parser)]
#[command(name = "umwave", version, about = "Unimodular MIMO ISAC waveform design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a waveform for a scenario.
    Design(DesignArgs),
    /// Evaluate a waveform: beampattern, correlation sidelobes, bit error rate.
    Eval(EvalArgs),
    /// Emit a comparison waveform for a scenario.
    Baseline(BaselineArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Top-level seed; every random stream is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Term weights as `g,h`; overrides the scenario file.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<TermWeights>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    /// Random phases.
    Random,
    /// Design with the squared ℓ2 correlation penalty.
    L2,
}

impl BaselineKind {
    fn as_str(self) -> &'static str {
        match self {
            BaselineKind::Random => "random",
            BaselineKind::L2 => "l2",
        }
    }
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_enum)]
    pub kind: BaselineKind,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Waveform CSV file.
    #[arg(long)]
    pub waveform: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the beampattern series.
    #[arg(long)]
    pub beampattern: bool,
    /// Write the correlation sidelobe series.
    #[arg(long)]
    pub correlation: bool,
    /// Write the bit error rate curve.
    #[arg(long)]
    pub ber: bool,
    /// Monte Carlo trials per SNR point.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Term weights as `g,h` for the scenario.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<TermWeights>,
}

fn parse_weights(text: &str) -> Result<TermWeights, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [g, h] = parts.as_slice() else {
        return Err(format!("weights: expected `g,h`, got `{text}`"));
    };
    let parse = |name: &str, v: &str| {
        v.parse::<f64>()
            .ok()
            .filter(|w| w.is_finite() && *w >= 0.0)
            .ok_or_else(|| format!("weights: {name} must be a nonnegative number, got `{v}`"))
    };
    Ok(TermWeights { g: parse("g", g)?, h: parse("h", h)? })
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input files or arguments.
    Input(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INVALID_INPUT,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn input_error(context: &str) -> impl Fn(umwave::Error) -> CliError + '_ {
    move |e| match e {
        umwave::Error::InvalidArgument(_)
        | umwave::Error::DimensionMismatch { .. }
        | umwave::Error::Parse(_) => CliError::Input(format!("{context}: {e}")),
        other => CliError::Runtime(format!("{context}: {other}")),
    }
}

fn runtime_error(e: umwave::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path, weights: Option<TermWeights>) -> Result<Scenario, CliError> {
    let context = path.display().to_string();
    let scenario = parse_scenario(&read_text(path)?).map_err(input_error(&context))?;
    match weights {
        Some(w) => scenario.with_weights(w).map_err(input_error("weights")),
        None => Ok(scenario),
    }
}

/// Result of a command: where it wrote and how the solver (if any) ended.
#[derive(Debug)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
    pub status: Option<SolveStatus>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Some(SolveStatus::Stalled) => EXIT_STALLED,
            _ => EXIT_OK,
        }
    }
}

/// Buffers output files so they are written only after the manifest (whose
/// hash they carry) is final.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.files.iter().map(|(n, _)| n.clone()).collect();
        names.push("manifest.json".to_string());
        names
    }

    fn write(self, manifest: &RunManifest) -> Result<Vec<String>, CliError> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", self.dir.display())))?;
        let mut written = Vec::new();
        let write = |name: &str, text: &str| {
            let path = self.dir.join(name);
            fs::write(&path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
        };
        for (name, text) in &self.files {
            write(name, text)?;
            written.push(name.clone());
        }
        write("manifest.json", &manifest.to_json())?;
        written.push("manifest.json".to_string());
        Ok(written)
    }
}

fn manifest_comment(hash: &str) -> Vec<String> {
    vec![format!("manifest {hash}")]
}

fn base_manifest(command: &str, scenario: &Scenario, seed: u64) -> RunManifest {
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        scenario_hash: scenario_hash(scenario),
        input_waveform_hash: None,
        solver: None,
        seed,
        settings: Map::new(),
        outputs: Vec::new(),
        wall_clock_secs: 0.0,
    }
}

fn solver_config(args: &SolveArgs) -> SolverConfig {
    let mut cfg = SolverConfig { seed: derive_seed(args.seed, "solver"), ..Default::default() };
    if let Some(iters) = args.max_iters {
        cfg.max_iters = iters;
    }
    cfg
}

fn initial_point(scenario: &Scenario, seed: u64) -> Result<WaveformMatrix, CliError> {
    random_point(scenario.samples(), scenario.antennas(), derive_seed(seed, "init")).map_err(runtime_error)
}

fn run_solver<O: Objective + ?Sized>(
    objective: &O,
    x0: &WaveformMatrix,
    cfg: &SolverConfig,
) -> Result<Solution, CliError> {
    cfg.validate().map_err(input_error("solver"))?;
    let sol = solve(x0, objective, cfg).map_err(runtime_error)?;
    info!(
        "solver finished: {} after {} iterations, f {:.6e} -> {:.6e}",
        sol.trace.status.as_str(),
        sol.trace.records.len(),
        sol.trace.initial_objective,
        sol.trace.final_objective()
    );
    if sol.trace.status == SolveStatus::Stalled {
        warn!("line search failed at the smallest sampling radius");
    }
    Ok(sol)
}

fn finish(
    started: Instant,
    mut manifest: RunManifest,
    outputs: Outputs,
    status: Option<SolveStatus>,
) -> Result<Outcome, CliError> {
    manifest.outputs = outputs.names();
    manifest.wall_clock_secs = started.elapsed().as_secs_f64();
    let out_dir = outputs.dir.clone();
    let written = outputs.write(&manifest)?;
    info!("wrote {} files to {}", written.len(), out_dir.display());
    Ok(Outcome { out_dir, outputs: written, status })
}

fn cmd_design(args: &DesignArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let a = &args.solve;
    let scenario = load_scenario(&a.scenario, a.weights)?;
    let cfg = solver_config(a);
    let x0 = initial_point(&scenario, a.seed)?;
    let sol = run_solver(&scenario, &x0, &cfg)?;

    let mut manifest = base_manifest("design", &scenario, a.seed);
    manifest.solver = Some(SolverConfigRecord::from(&cfg));
    let comments = manifest_comment(&manifest.identity_hash());
    let mut outputs = Outputs::new(&a.out);
    outputs.add("waveform.csv", waveform_to_csv(&sol.x, &comments));
    outputs.add("trace.csv", trace_to_csv(&sol.trace, &comments));
    finish(started, manifest, outputs, Some(sol.trace.status))
}

fn cmd_baseline(args: &BaselineArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let a = &args.solve;
    let scenario = load_scenario(&a.scenario, a.weights)?;
    let mut manifest = base_manifest("baseline", &scenario, a.seed);
    manifest.settings.insert("kind".into(), json!(args.kind.as_str()));
    let mut outputs = Outputs::new(&a.out);
    let status = match args.kind {
        BaselineKind::Random => {
            let x = random_baseline(&scenario, derive_seed(a.seed, "baseline-random")).map_err(runtime_error)?;
            let comments = manifest_comment(&manifest.identity_hash());
            outputs.add("waveform.csv", waveform_to_csv(&x, &comments));
            None
        }
        BaselineKind::L2 => {
            let cfg = solver_config(a);
            let x0 = initial_point(&scenario, a.seed)?;
            let sol = run_solver(&L2Objective { scenario: &scenario }, &x0, &cfg)?;
            manifest.solver = Some(SolverConfigRecord::from(&cfg));
            let comments = manifest_comment(&manifest.identity_hash());
            outputs.add("waveform.csv", waveform_to_csv(&sol.x, &comments));
            outputs.add("trace.csv", trace_to_csv(&sol.trace, &comments));
            Some(sol.trace.status)
        }
    };
    finish(started, manifest, outputs, status)
}

fn cmd_eval(args: &EvalArgs) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let scenario = load_scenario(&args.scenario, args.weights)?;
    let waveform_text = read_text(&args.waveform)?;
    let context = args.waveform.display().to_string();
    let x = parse_waveform(&waveform_text).map_err(input_error(&context))?;
    if x.dims() != scenario.dims() {
        return Err(CliError::Input(format!(
            "{context}: waveform is {}x{} (N x M) but the scenario needs {}x{}",
            x.samples(),
            x.antennas(),
            scenario.samples(),
            scenario.antennas()
        )));
    }
    if args.trials == 0 {
        return Err(CliError::Input("trials: must be at least 1".into()));
    }
    let all = !(args.beampattern || args.correlation || args.ber);
    let snr: Vec<f64> = args.snr.clone().unwrap_or_else(|| DEFAULT_SNR_DB.to_vec());
    if snr.is_empty() || snr.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Input("snr: expected a comma-separated list of finite dB values".into()));
    }

    let mut manifest = base_manifest("eval", &scenario, args.seed);
    manifest.input_waveform_hash = Some(sha256_hex(waveform_text.as_bytes()));
    let mut settings = Map::new();
    settings.insert("beampattern".into(), Value::Bool(all || args.beampattern));
    settings.insert("correlation".into(), Value::Bool(all || args.correlation));
    settings.insert("ber".into(), Value::Bool(all || args.ber));
    if all || args.ber {
        settings.insert("trials".into(), json!(args.trials));
        settings.insert("snr_db".into(), json!(snr));
    }
    settings.insert("include_endpoints".into(), json!(scenario.params().include_endpoints));
    manifest.settings = settings;
    let hash = manifest.identity_hash();
    let mut outputs = Outputs::new(&args.out);

    if all || args.beampattern {
        let sweep = beampattern_sweep(&x, &scenario).map_err(runtime_error)?;
        let mut comments = manifest_comment(&hash);
        comments.push(format!(
            "angle grid step {} deg over (-90, 90){}, {} rows",
            scenario.params().grid_step_deg,
            if scenario.params().include_endpoints { " with endpoints" } else { " open interval" },
            sweep.angles_deg.len()
        ));
        outputs.add("beampattern.csv", sweep_to_csv(&sweep, &comments));
    }
    if all || args.correlation {
        let profile = correlation_profile(&x, &scenario).map_err(runtime_error)?;
        if let Some(median) = profile.median_sidelobe_db() {
            info!("median normalized sidelobe {median:.2} dB");
        }
        outputs.add("correlation.csv", profile_to_csv(&profile, &manifest_comment(&hash)));
    }
    if all || args.ber {
        let curve = ber_monte_carlo(&x, &scenario, &snr, args.trials, derive_seed(args.seed, "ber"))
            .map_err(runtime_error)?;
        let mut comments = manifest_comment(&hash);
        comments.push("snr_db = 10 log10(|X|_F^2 / (N sigma^2))".to_string());
        outputs.add("ber.csv", ber_to_csv(&curve, &comments));
    }
    finish(started, manifest, outputs, None)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Baseline(a) => cmd_baseline(a),
    }
}
