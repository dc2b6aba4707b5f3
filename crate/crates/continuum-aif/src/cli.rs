//! Command-line front end: config assembly, scenario dispatch, artifact
//! emission, model inspection, and trace validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agents::{build_consumer, build_producer, build_worker, AgentSpec};
use crate::env::{
    builtin_profiles, ingest_traces_with_report, DeviceProfile, ProfileDoc, RequestMode,
};
use crate::error::{EnvError, HarnessError};
use crate::harness::{
    aggregate, artifact_basename, run_repetitions, timing_study, write_metrics_csv,
    write_summary_json, Backend, ExperimentConfig, MetricSeries, Scenario, SummaryDoc,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INGESTION: i32 = 3;

/// Seed fallback consulted when neither file, `--set`, nor flag supplies one.
pub const SEED_ENV_VAR: &str = "CONTINUUM_AIF_SEED";

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

/// Exit code for an error per the taxonomy above; the C bindings reuse the
/// same mapping for their status codes.
pub fn error_exit_code(error: &HarnessError) -> i32 {
    match error {
        HarnessError::InvalidConfig(_) => EXIT_CONFIG,
        HarnessError::Env(env) => match env {
            EnvError::TraceIo { .. }
            | EnvError::MalformedTrace { .. }
            | EnvError::MissingColumn { .. }
            | EnvError::EmptyTrace { .. }
            | EnvError::UnfillableGap { .. }
            | EnvError::IncompleteDevice { .. } => EXIT_INGESTION,
            EnvError::UnknownProfile { .. }
            | EnvError::InvalidProfile { .. }
            | EnvError::NoiseOutOfRange { .. } => EXIT_CONFIG,
            EnvError::InvalidAction { .. } => EXIT_RUNTIME,
        },
        HarnessError::EpisodeStep { source, .. } => error_exit_code(source),
        _ => EXIT_RUNTIME,
    }
}

impl From<HarnessError> for Failure {
    fn from(error: HarnessError) -> Self {
        Failure {
            code: error_exit_code(&error),
            message: error.to_string(),
        }
    }
}

/// Flat configuration schema: every experiment knob plus I/O paths. JSON
/// config files parse into exactly this shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    pub scenario: Scenario,
    pub policy_length: usize,
    pub steps: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub backend: Backend,
    pub request_mode: RequestMode,
    pub epsilon: f64,
    pub precision: f64,
    pub learning_rate: f64,
    pub switch_step: usize,
    pub producer_profile: String,
    pub worker_profile: String,
    pub consumer_profile: String,
    pub switch_profile: String,
    pub deadline_ms: Option<f64>,
    /// Trace CSV to derive device profiles from (backend=trace).
    pub trace_csv: Option<String>,
    /// JSON array of profile documents to register (backend=trace).
    pub profiles_json: Option<String>,
    pub out_dir: String,
    /// Worker threads for repetitions; not part of the experiment identity.
    pub jobs: usize,
}

impl Default for CliConfig {
    fn default() -> Self {
        let experiment = ExperimentConfig::default();
        CliConfig {
            scenario: experiment.scenario,
            policy_length: experiment.policy_length,
            steps: experiment.steps,
            repetitions: experiment.repetitions,
            seed: experiment.seed,
            backend: experiment.backend,
            request_mode: experiment.request_mode,
            epsilon: experiment.epsilon,
            precision: experiment.precision,
            learning_rate: experiment.learning_rate,
            switch_step: experiment.switch_step,
            producer_profile: experiment.producer_profile,
            worker_profile: experiment.worker_profile,
            consumer_profile: experiment.consumer_profile,
            switch_profile: experiment.switch_profile,
            deadline_ms: experiment.deadline_ms,
            trace_csv: None,
            profiles_json: None,
            out_dir: ".".to_string(),
            jobs: 1,
        }
    }
}

impl CliConfig {
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            scenario: self.scenario,
            policy_length: self.policy_length,
            steps: self.steps,
            repetitions: self.repetitions,
            seed: self.seed,
            backend: self.backend,
            request_mode: self.request_mode,
            epsilon: self.epsilon,
            precision: self.precision,
            learning_rate: self.learning_rate,
            switch_step: self.switch_step,
            producer_profile: self.producer_profile.clone(),
            worker_profile: self.worker_profile.clone(),
            consumer_profile: self.consumer_profile.clone(),
            switch_profile: self.switch_profile.clone(),
            deadline_ms: self.deadline_ms,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "continuum-aif",
    version,
    about = "Active-inference agents managing a video pipeline's service objectives"
)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment scenario and write CSV/JSON artifacts.
    Run(Box<RunArgs>),
    /// Build one agent's generative model and run its validators.
    ValidateModel(ValidateArgs),
    /// Report a trace CSV's measurement grid coverage per device.
    InspectTraces(InspectArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// JSON config file with flat keys mirroring the config schema.
    #[arg(long)]
    config: Option<PathBuf>,
    /// key=value override applied after the config file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    scenario: Option<String>,
    /// Policy length (planning horizon).
    #[arg(long = "pl")]
    policy_length: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long = "reps")]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long = "request-mode")]
    request_mode: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    precision: Option<f64>,
    #[arg(long = "learning-rate")]
    learning_rate: Option<f64>,
    #[arg(long = "switch-step")]
    switch_step: Option<usize>,
    #[arg(long = "deadline-ms")]
    deadline_ms: Option<f64>,
    /// Trace CSV to derive device profiles from.
    #[arg(long = "traces")]
    trace_csv: Option<PathBuf>,
    /// JSON array of device profile documents.
    #[arg(long = "profiles")]
    profiles_json: Option<PathBuf>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Worker threads for repetitions.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// One of: producer, worker, consumer.
    agent: String,
    /// Write the full model spec as JSON to this path.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InspectArgs {
    /// Trace CSV path.
    path: PathBuf,
}

/// Parses argv, dispatches, prints diagnostics, and returns the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::ValidateModel(args) => cmd_validate_model(&args),
        Command::InspectTraces(args) => cmd_inspect_traces(&args),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn set_key(object: &mut Value, key: &str, value: Value) {
    object
        .as_object_mut()
        .expect("config value is an object")
        .insert(key.to_string(), value);
}

/// Assembles the effective config: defaults, then file, then `--set` pairs,
/// then direct flags. The seed env var fills in only when nothing else set
/// the seed.
fn build_config(args: &RunArgs) -> Result<CliConfig, Failure> {
    let mut value = serde_json::to_value(CliConfig::default()).expect("defaults serialize");
    let mut seed_given = false;

    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("config `{}`: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("config `{}`: {e}", path.display())))?;
        let object = file
            .as_object()
            .ok_or_else(|| Failure::config("config file must be a JSON object"))?;
        for (key, v) in object {
            seed_given |= key == "seed";
            set_key(&mut value, key, v.clone());
        }
    }

    for pair in &args.set {
        let (key, raw) = pair
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("--set needs KEY=VALUE, got `{pair}`")))?;
        let parsed = serde_json::from_str::<Value>(raw).unwrap_or(Value::String(raw.to_string()));
        seed_given |= key == "seed";
        set_key(&mut value, key, parsed);
    }

    macro_rules! flag {
        ($field:ident, $key:literal) => {
            if let Some(v) = &args.$field {
                set_key(&mut value, $key, serde_json::to_value(v).expect("flag value"));
            }
        };
    }
    flag!(scenario, "scenario");
    flag!(policy_length, "policy_length");
    flag!(steps, "steps");
    flag!(repetitions, "repetitions");
    flag!(backend, "backend");
    flag!(request_mode, "request_mode");
    flag!(epsilon, "epsilon");
    flag!(precision, "precision");
    flag!(learning_rate, "learning_rate");
    flag!(switch_step, "switch_step");
    flag!(deadline_ms, "deadline_ms");
    flag!(jobs, "jobs");
    if let Some(seed) = args.seed {
        set_key(&mut value, "seed", Value::from(seed));
        seed_given = true;
    }
    if let Some(path) = &args.trace_csv {
        set_key(&mut value, "trace_csv", Value::String(path.display().to_string()));
    }
    if let Some(path) = &args.profiles_json {
        set_key(
            &mut value,
            "profiles_json",
            Value::String(path.display().to_string()),
        );
    }
    if let Some(path) = &args.out_dir {
        set_key(&mut value, "out_dir", Value::String(path.display().to_string()));
    }

    if !seed_given {
        if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
            let seed: u64 = raw
                .parse()
                .map_err(|_| Failure::config(format!("{SEED_ENV_VAR}=`{raw}` is not a u64")))?;
            set_key(&mut value, "seed", Value::from(seed));
        }
    }

    serde_json::from_value(value).map_err(|e| Failure::config(e.to_string()))
}

/// Builtins plus any loaded documents; loaded names shadow builtins so a
/// trace can redefine a device while the stock ones stay addressable.
fn load_profiles(config: &CliConfig) -> Result<Vec<DeviceProfile>, Failure> {
    let mut by_name: BTreeMap<String, DeviceProfile> = builtin_profiles()
        .into_iter()
        .map(|p| (p.name.clone(), p))
        .collect();
    if let Some(path) = &config.profiles_json {
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: EXIT_INGESTION,
            message: format!("profiles `{path}`: {e}"),
        })?;
        let docs: Vec<ProfileDoc> = serde_json::from_str(&text).map_err(|e| Failure {
            code: EXIT_INGESTION,
            message: format!("profiles `{path}`: {e}"),
        })?;
        for doc in docs {
            let profile = doc.into_profile().map_err(HarnessError::from)?;
            by_name.insert(profile.name.clone(), profile);
        }
    }
    if let Some(path) = &config.trace_csv {
        let (derived, _) =
            ingest_traces_with_report(Path::new(path)).map_err(HarnessError::from)?;
        for profile in derived {
            by_name.insert(profile.name.clone(), profile);
        }
    }
    Ok(by_name.into_values().collect())
}

/// Runs the configured scenario in memory and returns its summary document
/// without writing artifacts. Errors carry the exit-taxonomy code alongside
/// the message; the C bindings build their status codes on this.
pub fn run_scenario_summary(config: &CliConfig) -> Result<SummaryDoc, (i32, String)> {
    let fail = |e: HarnessError| (error_exit_code(&e), e.to_string());
    let experiment = config.experiment();
    experiment.validate().map_err(fail)?;
    let profiles = if experiment.backend == Backend::Trace {
        load_profiles(config).map_err(|f| (f.code, f.message))?
    } else {
        Vec::new()
    };
    if experiment.scenario == Scenario::CostStudy {
        let report = timing_study(&experiment, &profiles).map_err(fail)?;
        return Ok(SummaryDoc::from_timing(&experiment, &report));
    }
    let runs = run_repetitions(&experiment, &profiles, config.jobs.max(1)).map_err(fail)?;
    let series = aggregate(&runs).map_err(fail)?;
    Ok(SummaryDoc::from_series(&experiment, &series))
}

fn rate_summary_lines(series: &MetricSeries) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current: Option<(String, Vec<String>)> = None;
    for sloid in &series.sloids {
        let rate = sloid.mean.last().copied().unwrap_or(0.0);
        let cell = format!("{}={:.3}", sloid.sloid, rate);
        match &mut current {
            Some((agent, cells)) if *agent == sloid.agent => cells.push(cell),
            _ => {
                if let Some((agent, cells)) = current.take() {
                    lines.push(format!("{agent}: {}", cells.join(" ")));
                }
                current = Some((sloid.agent.clone(), vec![cell]));
            }
        }
    }
    if let Some((agent, cells)) = current {
        lines.push(format!("{agent}: {}", cells.join(" ")));
    }
    lines
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let config = build_config(args)?;
    let experiment = config.experiment();
    experiment.validate().map_err(Failure::from)?;

    let profiles = if experiment.backend == Backend::Trace {
        load_profiles(&config)?
    } else {
        Vec::new()
    };

    let out_dir = PathBuf::from(&config.out_dir);
    std::fs::create_dir_all(&out_dir).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: format!("out dir `{}`: {e}", out_dir.display()),
    })?;
    let base = out_dir.join(artifact_basename(&experiment));

    if experiment.scenario == Scenario::CostStudy {
        let report = timing_study(&experiment, &profiles).map_err(Failure::from)?;
        let json_path = base.with_extension("json");
        write_summary_json(&json_path, &SummaryDoc::from_timing(&experiment, &report))
            .map_err(Failure::from)?;
        println!(
            "planning ms/step: expert pl{} {:.3} | expert pl{} {:.3} | learning pl{} {:.3} | learning pl{} {:.3}",
            report.pl_low,
            report.conditions[0].per_step_ms,
            report.pl_high,
            report.conditions[1].per_step_ms,
            report.pl_low,
            report.conditions[2].per_step_ms,
            report.pl_high,
            report.conditions[3].per_step_ms,
        );
        println!(
            "ratios: learning/expert pl{} {:.2} | learning/expert pl{} {:.2} | expert pl{}/pl{} {:.2}",
            report.pl_low,
            report.learning_over_expert_low,
            report.pl_high,
            report.learning_over_expert_high,
            report.pl_high,
            report.pl_low,
            report.expert_high_over_low,
        );
        println!("wrote {}", json_path.display());
        return Ok(());
    }

    let runs = run_repetitions(&experiment, &profiles, config.jobs).map_err(Failure::from)?;
    let series = aggregate(&runs).map_err(Failure::from)?;
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");
    write_metrics_csv(&csv_path, &series, &runs).map_err(Failure::from)?;
    write_summary_json(&json_path, &SummaryDoc::from_series(&experiment, &series))
        .map_err(Failure::from)?;
    for line in rate_summary_lines(&series) {
        println!("{line}");
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn build_agent(name: &str) -> Option<AgentSpec> {
    let result = match name {
        "producer" => build_producer(),
        "worker" => build_worker(),
        "consumer" => build_consumer(),
        _ => return None,
    };
    Some(result.expect("shipped agents build"))
}

fn cmd_validate_model(args: &ValidateArgs) -> Result<(), Failure> {
    let spec = build_agent(&args.agent).ok_or_else(|| {
        Failure::config(format!(
            "unknown agent `{}` (expected producer, worker, or consumer)",
            args.agent
        ))
    })?;
    let problems = spec.validate();
    for factor in spec.factors.factors() {
        let name = factor.name.as_str();
        let broken = problems.iter().any(|p| p.contains(name));
        println!("factor {name}: {}", if broken { "FAIL" } else { "ok" });
    }
    for problem in &problems {
        println!("problem: {problem}");
    }
    if let Some(path) = &args.dump {
        let json = spec.to_json().map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: format!("serialize model: {e}"),
        })?;
        std::fs::write(path, json.as_bytes()).map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: format!("dump `{}`: {e}", path.display()),
        })?;
        println!("wrote {}", path.display());
    }
    if problems.is_empty() {
        println!("{}: all checks passed", spec.name);
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_RUNTIME,
            message: format!("{} validation failed ({} problems)", spec.name, problems.len()),
        })
    }
}

fn cmd_inspect_traces(args: &InspectArgs) -> Result<(), Failure> {
    let (_, reports) = ingest_traces_with_report(&args.path).map_err(HarnessError::from)?;
    for report in &reports {
        println!(
            "device {}: {}/{} cells recorded",
            report.device, report.recorded_cells, report.total_cells
        );
        if report.filled.is_empty() {
            println!("  0 cells interpolated");
        } else {
            println!("  {} cells interpolated:", report.filled.len());
            for (resolution, fps, gpu) in &report.filled {
                println!(
                    "  fill {} @ {} fps ({})",
                    resolution,
                    fps,
                    if *gpu { "gpu on" } else { "gpu off" }
                );
            }
        }
    }
    Ok(())
}
