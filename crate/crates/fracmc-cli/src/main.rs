//! Command-line surface for the fracmc solvers.
//!
//! Every run that writes an output file also writes `<output>.config.json`
//! with the fully resolved invocation, and that file can be replayed with
//! `fracmc --config <file>`. Exit codes: 0 success, 1 user error,
//! 2 numerical failure. Failures print a machine-readable JSON object to
//! stderr.

use clap::{Args, Parser, Subcommand};
use fracmc::catalog;
use fracmc::error::Error as LibError;
use fracmc::ffnn::{
    self, build_lag_dataset_from_series, MlpConfig, SurrogateDataSpec,
};
use fracmc::mcsolver::{
    compare, fmt17, solve_closed_form, solve_mc, McOptions, TimeGrid, TrajectoryTable,
};
use fracmc::specfun::{mittag_leffler, FracOrder, MlParams};
use fracmc::subordinator::{sample_batch, RngStream};
use fracmc::wave::{max_principle_check, solve_wave, WaveGridSpec, WaveProblem, WaveProfile};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "fracmc",
    version,
    about = "Monte Carlo and closed-form solvers for sequential-order fractional problems"
)]
struct Cli {
    /// Worker threads (0 = automatic). Never affects numerical results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Replay a saved run configuration (the `.config.json` echo).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Solve a preset problem by Monte Carlo averaging and tabulate it
    /// against the closed form.
    Solve(SolveArgs),
    /// Simulate the traveling-wave field u(x, t).
    Wave(WaveArgs),
    /// Draw inverse-time samples as a one-column CSV.
    Sample(SampleArgs),
    /// Evaluate the two-parameter Mittag-Leffler function.
    Ml(MlArgs),
    /// Tabulate a transform pair f and f_b on a time grid.
    Transform(TransformArgs),
    /// Train, query, or analyze the feedforward surrogate.
    Ffnn(FfnnArgs),
    /// List the named problem presets.
    ListPresets,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct SolveArgs {
    /// Preset name; see `list-presets`.
    #[arg(long)]
    preset: String,
    /// Fractional order in (0, 1].
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    /// Number of grid points on (0, t_max].
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Monte Carlo replicates per grid point.
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    #[arg(long, env = "FRACMC_SEED", default_value_t = 0)]
    seed: u64,
    /// Reuse one random base across the grid (smooth curves).
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    coupled: bool,
    /// Preset parameter overrides, e.g. --param omega=2.
    #[arg(long = "param", value_parser = parse_kv)]
    #[serde(default)]
    param: Vec<(String, f64)>,
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct WaveArgs {
    #[arg(long)]
    beta: f64,
    /// Wave speed.
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Initial profile: gauss10, gauss:<a>, const:<c>.
    #[arg(long, default_value = "gauss10")]
    profile: String,
    #[arg(long, default_value_t = -3.0)]
    x_min: f64,
    #[arg(long, default_value_t = 3.0)]
    x_max: f64,
    #[arg(long, default_value_t = 121)]
    nx: usize,
    #[arg(long, default_value_t = 2.0)]
    t_max: f64,
    #[arg(long, default_value_t = 9)]
    nt: usize,
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    #[arg(long, env = "FRACMC_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct SampleArgs {
    #[arg(long)]
    beta: f64,
    /// Clock time of the draws.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, env = "FRACMC_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct MlArgs {
    /// First parameter of E_{beta,alpha}.
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Real argument.
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct TransformArgs {
    /// Pair name, e.g. t, t2, t4, cos, sin, exp, cosh, sinh, exp-cos, ...
    #[arg(long)]
    pair: String,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    t_max: f64,
    #[arg(long, default_value_t = 31)]
    points: usize,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct FfnnArgs {
    #[command(subcommand)]
    #[serde(flatten)]
    action: FfnnAction,
}

#[derive(Subcommand, Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "action", rename_all = "kebab-case")]
enum FfnnAction {
    /// Simulate trajectories of a preset and train the surrogate.
    Train(FfnnTrainArgs),
    /// Roll a trained model forward from a seed window.
    Predict(FfnnPredictArgs),
    /// Tabulate held-out error by window length and order.
    MemoryExp(FfnnMemoryArgs),
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct FfnnTrainArgs {
    #[arg(long, default_value = "third-order")]
    preset: String,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 50)]
    trajectories: usize,
    #[arg(long, default_value_t = 100)]
    grid_points: usize,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    /// Monte Carlo replicates per trajectory point.
    #[arg(long, default_value_t = 20_000)]
    m: usize,
    /// Lag window length.
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, default_value_t = 4000)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, env = "FRACMC_SEED", default_value_t = 0)]
    seed: u64,
    /// Where to store the trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Optional per-epoch loss history CSV.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct FfnnPredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated seed window, oldest value first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    window_values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct FfnnMemoryArgs {
    #[arg(long, default_value = "third-order")]
    preset: String,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0])]
    betas: Vec<f64>,
    /// Comma-separated window lengths.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 5])]
    lags: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trajectories: usize,
    #[arg(long, default_value_t = 60)]
    grid_points: usize,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 5_000)]
    m: usize,
    #[arg(long, default_value_t = 1500)]
    epochs: usize,
    #[arg(long, env = "FRACMC_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got {s}"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad value in {s}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// User error (exit 1) vs numerical failure (exit 2).
#[derive(Debug)]
enum RunError {
    User(String),
    Numerical(String),
}

impl RunError {
    fn kind(&self) -> &'static str {
        match self {
            RunError::User(_) => "user_error",
            RunError::Numerical(_) => "numerical_failure",
        }
    }

    fn message(&self) -> &str {
        match self {
            RunError::User(m) | RunError::Numerical(m) => m,
        }
    }
}

impl From<LibError> for RunError {
    fn from(e: LibError) -> Self {
        match e {
            LibError::NoConvergence { .. }
            | LibError::CancellationLoss { .. }
            | LibError::Overflow(_)
            | LibError::IntegrationFailure { .. }
            | LibError::GammaPole(_)
            | LibError::TrainingDiverged { .. } => RunError::Numerical(e.to_string()),
            _ => RunError::User(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::User(format!("io error: {e}"))
    }
}

type RunResult<T> = std::result::Result<T, RunError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report(&RunError::User(e.to_string()));
            return ExitCode::from(1);
        }
    };

    if cli.threads > 0 {
        // worker count is a throughput knob only; results are stream-keyed
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }

    let command = match (cli.command, &cli.config) {
        (Some(c), None) => c,
        (None, Some(path)) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                report(&e);
                return ExitCode::from(1);
            }
        },
        (Some(_), Some(_)) => {
            report(&RunError::User(
                "pass either a subcommand or --config, not both".into(),
            ));
            return ExitCode::from(1);
        }
        (None, None) => {
            report(&RunError::User(
                "missing subcommand; try `fracmc --help`".into(),
            ));
            return ExitCode::from(1);
        }
    };

    match run(&command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(match e {
                RunError::User(_) => 1,
                RunError::Numerical(_) => 2,
            })
        }
    }
}

fn report(e: &RunError) {
    let doc = serde_json::json!({
        "error": { "kind": e.kind(), "message": e.message() }
    });
    eprintln!("{doc}");
}

fn load_config(path: &Path) -> RunResult<Command> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::User(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RunError::User(format!("bad config {}: {e}", path.display())))
}

fn run(command: &Command) -> RunResult<()> {
    match command {
        Command::Solve(args) => cmd_solve(args, command),
        Command::Wave(args) => cmd_wave(args, command),
        Command::Sample(args) => cmd_sample(args, command),
        Command::Ml(args) => cmd_ml(args),
        Command::Transform(args) => cmd_transform(args, command),
        Command::Ffnn(args) => match &args.action {
            FfnnAction::Train(a) => cmd_ffnn_train(a, command),
            FfnnAction::Predict(a) => cmd_ffnn_predict(a, command),
            FfnnAction::MemoryExp(a) => cmd_ffnn_memory(a, command),
        },
        Command::ListPresets => cmd_list_presets(),
    }
}

/// Write `text` to the file (plus the config echo) or to stdout.
fn emit(output: &Option<PathBuf>, command: &Command, text: &str) -> RunResult<()> {
    match output {
        Some(path) => {
            fs::write(path, text)?;
            write_config_echo(path, command)?;
            Ok(())
        }
        None => {
            print!("{text}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}

fn write_config_echo(output: &Path, command: &Command) -> RunResult<()> {
    let mut echo_path = output.as_os_str().to_owned();
    echo_path.push(".config.json");
    let text = serde_json::to_string_pretty(command)
        .map_err(|e| RunError::User(format!("config echo: {e}")))?;
    fs::write(PathBuf::from(echo_path), text)?;
    Ok(())
}

fn frac_order(beta: f64) -> RunResult<FracOrder> {
    Ok(FracOrder::new(beta)?)
}

fn preset_params(pairs: &[(String, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().cloned().collect()
}

fn find_preset(name: &str) -> RunResult<&'static catalog::Preset> {
    catalog::find_preset(name)
        .ok_or_else(|| RunError::User(format!("unknown preset {name}; see `fracmc list-presets`")))
}

fn cmd_solve(args: &SolveArgs, command: &Command) -> RunResult<()> {
    let beta = frac_order(args.beta)?;
    let preset = find_preset(&args.preset)?;
    let params = preset_params(&args.param);
    let prob = preset.build(beta, &params)?;
    let grid = TimeGrid::linspace_open(args.t_max, args.points)?;
    let opts = McOptions {
        m: args.m,
        seed: args.seed,
        coupled: args.coupled,
        ..Default::default()
    };
    let estimates = solve_mc(&prob, &grid, &opts)?;
    let table = match solve_closed_form(&prob, &grid)? {
        Some(cf) => compare(&estimates, &cf)?,
        None => TrajectoryTable::from_estimates(&estimates),
    };
    let text = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&table)
            .map_err(|e| RunError::User(format!("serialize: {e}")))?
            + "\n",
        _ => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv is utf8")
        }
    };
    emit(&args.output, command, &text)
}

fn cmd_wave(args: &WaveArgs, command: &Command) -> RunResult<()> {
    let beta = frac_order(args.beta)?;
    let profile = WaveProfile::from_name(&args.profile)?;
    let prob = WaveProblem {
        speed: args.c,
        profile,
        beta,
    };
    let spec = WaveGridSpec {
        x_min: args.x_min,
        x_max: args.x_max,
        nx: args.nx,
        t_max: args.t_max,
        nt: args.nt,
    };
    let field = solve_wave(&prob, &spec, args.m, args.seed)?;
    if !max_principle_check(&field) {
        return Err(RunError::Numerical(
            "field violates the profile bounds".into(),
        ));
    }
    let mut buf = Vec::new();
    field.write_csv(&mut buf)?;
    let text = String::from_utf8(buf).expect("csv is utf8");
    emit(&args.output, command, &text)?;
    if let Some(path) = &args.output {
        let mut header_path = path.as_os_str().to_owned();
        header_path.push(".header.json");
        let header = serde_json::json!({
            "beta": args.beta,
            "c": args.c,
            "m": args.m,
            "seed": args.seed,
            "f_name": profile.name(),
        });
        fs::write(PathBuf::from(header_path), format!("{header:#}\n"))?;
    }
    Ok(())
}

fn cmd_sample(args: &SampleArgs, command: &Command) -> RunResult<()> {
    let beta = frac_order(args.beta)?;
    let batch = sample_batch(beta, args.t, args.m, RngStream::new(args.seed, 0))?;
    let mut text = String::from("s\n");
    for s in &batch.samples {
        text.push_str(&fmt17(*s));
        text.push('\n');
    }
    emit(&args.output, command, &text)
}

fn cmd_ml(args: &MlArgs) -> RunResult<()> {
    let p = MlParams::new(args.beta, args.alpha)?;
    let v = mittag_leffler(p, args.z)?;
    println!("{}", fmt17(v));
    Ok(())
}

fn cmd_transform(args: &TransformArgs, command: &Command) -> RunResult<()> {
    let beta = frac_order(args.beta)?;
    let pair = catalog::find_pair(&args.pair).ok_or_else(|| {
        let names: Vec<&str> = catalog::transform_pairs().iter().map(|p| p.name).collect();
        RunError::User(format!(
            "unknown pair {}; available: {}",
            args.pair,
            names.join(", ")
        ))
    })?;
    if args.points == 0 || !(args.t_max > 0.0) {
        return Err(RunError::User("need points >= 1 and t_max > 0".into()));
    }
    let mut text = String::from("t,f,f_beta\n");
    for i in 0..args.points {
        let t = args.t_max * i as f64 / (args.points.max(2) - 1) as f64;
        let f = pair.eval_f(t);
        let fb = catalog::eval_pair(&pair, beta, t)?;
        text.push_str(&format!("{},{},{}\n", fmt17(t), fmt17(f), fmt17(fb)));
    }
    emit(&args.output, command, &text)
}

fn cmd_ffnn_train(args: &FfnnTrainArgs, command: &Command) -> RunResult<()> {
    let beta = frac_order(args.beta)?;
    let preset = find_preset(&args.preset)?;
    let prob = preset.build(beta, &BTreeMap::new())?;
    let spec = SurrogateDataSpec {
        n_trajectories: args.trajectories,
        grid_points: args.grid_points,
        t_max: args.t_max,
        m: args.m,
        seed: args.seed,
    };
    let series = ffnn::generate_training_trajectories(&prob, &spec)?;
    let data = build_lag_dataset_from_series(&series, args.window, (0.6, 0.2, 0.2), args.seed)?;
    let config = MlpConfig {
        window: args.window,
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        seed: args.seed,
        ..Default::default()
    };
    let (model, history) = ffnn::train(&config, &data)?;
    fs::write(&args.model, model.to_json())?;
    write_config_echo(&args.model, command)?;
    if let Some(path) = &args.loss_csv {
        let mut buf = Vec::new();
        history.write_csv(&mut buf)?;
        fs::write(path, buf)?;
    }
    let (tx, ty) = data.rows(ffnn::Split::Test);
    println!("test_mse,{}", fmt17(model.mse(&tx, &ty)));
    Ok(())
}

fn cmd_ffnn_predict(args: &FfnnPredictArgs, command: &Command) -> RunResult<()> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| RunError::User(format!("cannot read {}: {e}", args.model.display())))?;
    let model = ffnn::Mlp::from_json(&text)?;
    if args.window_values.len() != model.window() {
        return Err(RunError::User(format!(
            "model expects a window of {}, got {} values",
            model.window(),
            args.window_values.len()
        )));
    }
    let rollout = ffnn::predict_rollout(&model, &args.window_values, args.steps);
    let mut out = String::from("step,value\n");
    for (i, v) in rollout.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt17(*v)));
    }
    emit(&args.output, command, &out)
}

fn cmd_ffnn_memory(args: &FfnnMemoryArgs, command: &Command) -> RunResult<()> {
    let preset = find_preset(&args.preset)?;
    // the template order is overridden per row inside the experiment
    let prob = preset.build(FracOrder::new(0.5).unwrap(), &BTreeMap::new())?;
    let spec = SurrogateDataSpec {
        n_trajectories: args.trajectories,
        grid_points: args.grid_points,
        t_max: args.t_max,
        m: args.m,
        seed: args.seed,
    };
    let config = MlpConfig {
        epochs: args.epochs,
        seed: args.seed,
        ..Default::default()
    };
    let report = ffnn::memory_length_experiment(&prob, &args.betas, &args.lags, &spec, &config)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    let text = String::from_utf8(buf).expect("csv is utf8");
    emit(&args.output, command, &text)
}

fn cmd_list_presets() -> RunResult<()> {
    println!("{:<14} {:<55} defaults", "name", "equation");
    for p in catalog::registry() {
        let defaults: Vec<String> = p
            .defaults
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let closed = if p.has_closed_form() {
            ""
        } else {
            " [no closed form]"
        };
        println!(
            "{:<14} {:<55} {}{closed}",
            p.name,
            p.equation,
            defaults.join(", ")
        );
        println!("{:<14} {}", "", p.description);
    }
    Ok(())
}
