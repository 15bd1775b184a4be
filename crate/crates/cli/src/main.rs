//! `biasnet`: command-line front end of the negotiation simulator.
//!
//! Exit codes: 0 on success, 1 for bad input (flags, config, manifest),
//! 2 when a run fails at runtime.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biasnet_core::biases::demo;
use biasnet_core::experiment::{self, emit_report, read_json, run_trials, stats, RunSpec, TrialRecord};
use biasnet_core::memory::MemoryPolicy;
use biasnet_core::negotiation::AnchorStrategy;
use biasnet_core::scenario::ScenarioKind;
use biasnet_core::{load_config, Error, ScenarioConfig};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

const MANIFEST: &str = "manifest.json";

#[derive(Parser)]
#[command(name = "biasnet", version, about = "Multi-agent resource negotiation with cognitive-bias operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inter-slice bandwidth negotiation (eMBB vs URLLC) under an anchor strategy
    RunUc1(RunArgs),
    /// RAN vs edge negotiation backed by a collective memory
    RunUc2(RunArgs),
    /// Biased vs mitigated output of every bias operator on canned inputs
    BiasesDemo {
        /// Also write `biases.csv` into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a finished run and regenerate its CSV and plot script
    Report {
        /// Run directory holding `trials.json`
        #[arg(long, default_value = "out")]
        input: PathBuf,
        /// Where to write the regenerated files; defaults to the input directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario document (TOML); the built-in preset when omitted
    #[arg(long, conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Re-run exactly what a previous run's manifest describes
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Number of trials [default: 30]
    #[arg(long, conflicts_with = "manifest")]
    trials: Option<u64>,
    /// Root seed of every random stream [default: 42]
    #[arg(long, conflicts_with = "manifest")]
    seed: Option<u64>,
    /// fixed | randomized [default: fixed]
    #[arg(long, conflicts_with = "manifest")]
    anchor_strategy: Option<AnchorStrategy>,
    /// none | vanilla | unbiased [default: vanilla for run-uc1, unbiased for run-uc2]
    #[arg(long, conflicts_with = "manifest")]
    memory: Option<MemoryPolicy>,
    #[arg(long, conflicts_with = "manifest")]
    max_rounds: Option<u32>,
    #[arg(long, conflicts_with = "manifest")]
    accept_threshold: Option<f64>,
    /// HTTP endpoint of an external negotiator model; the API key is read from
    /// the environment variable named in the README
    #[arg(long, conflicts_with = "manifest")]
    llm_endpoint: Option<String>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Everything needed to reproduce a run, written beside its outputs.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    artifact_version: String,
    csv_version: u32,
    subcommand: String,
    run: RunSpec,
    config: ScenarioConfig,
}

enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::RunUc1(args) => run(ScenarioKind::Uc1, &args),
        Command::RunUc2(args) => run(ScenarioKind::Uc2, &args),
        Command::BiasesDemo { out } => biases_demo(out.as_deref()),
        Command::Report { input, out } => report(&input, out.as_deref().unwrap_or(&input)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn subcommand(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::Uc1 => "run-uc1",
        ScenarioKind::Uc2 => "run-uc2",
    }
}

fn resolve(kind: ScenarioKind, args: &RunArgs) -> Result<(ScenarioConfig, RunSpec)> {
    if let Some(path) = &args.manifest {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest `{}`: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad manifest `{}`: {e}", path.display())))?;
        if m.subcommand != subcommand(kind) {
            return Err(CliError::Usage(format!(
                "manifest `{}` was written by `{}`",
                path.display(),
                m.subcommand
            )));
        }
        return Ok((m.config.validated()?, m.run));
    }

    let mut cfg = match &args.config {
        Some(path) => load_config(path).map_err(|e| CliError::Usage(format!("config `{}`: {e}", path.display())))?,
        None => match kind {
            ScenarioKind::Uc1 => ScenarioConfig::uc1_default(),
            ScenarioKind::Uc2 => ScenarioConfig::uc2_default(),
        },
    };
    if cfg.scenario != kind {
        return Err(CliError::Usage(format!(
            "config describes `{}`, not `{}`",
            cfg.scenario.as_str(),
            kind.as_str()
        )));
    }
    if let Some(r) = args.max_rounds {
        cfg.protocol.max_rounds = r;
    }
    if let Some(t) = args.accept_threshold {
        cfg.protocol.accept_threshold = t;
    }
    let cfg = cfg.validated()?;

    let default_memory = match kind {
        ScenarioKind::Uc1 => MemoryPolicy::Vanilla,
        ScenarioKind::Uc2 => MemoryPolicy::Unbiased,
    };
    let mut spec = RunSpec::new(
        args.trials.unwrap_or(30),
        args.seed.unwrap_or(42),
        args.anchor_strategy.unwrap_or(AnchorStrategy::Fixed),
        args.memory.unwrap_or(default_memory),
    );
    spec.llm_endpoint = args.llm_endpoint.clone();
    Ok((cfg, spec))
}

fn run(kind: ScenarioKind, args: &RunArgs) -> Result<()> {
    let (cfg, spec) = resolve(kind, args)?;
    let run = run_trials(&cfg, &spec)?;
    emit_report(&run.records, &args.out)?;

    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        csv_version: experiment::CSV_VERSION,
        subcommand: subcommand(kind).to_string(),
        run: spec,
        config: cfg,
    };
    let path = args.out.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    print!("{}", summary(&run.records)?);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn summary(records: &[TrialRecord]) -> Result<String> {
    let mut s = String::new();
    let agreed = records.iter().filter(|r| !r.distance_from_anchor.is_empty()).count();
    let violated = records.iter().filter(|r| r.result.is_failure() && !r.fallback).count();
    s += &format!(
        "trials: {}  agreed: {agreed}  sla violations: {violated}  fallbacks: {}\n",
        records.len(),
        records.iter().filter(|r| r.fallback).count()
    );

    let (lat, infeasible) = stats::latencies(records);
    if !lat.is_empty() {
        s += &format!("median latency: {:.3} ms", stats::median(&lat)?);
        if infeasible > 0 {
            s += &format!(" ({infeasible} diverged, excluded)");
        }
        s += "\n";
    }
    s += &format!(
        "median energy saving: {:.2} %\n",
        stats::median(&stats::energy_savings(records))?
    );

    let d = stats::anchor_distances(records);
    if !d.is_empty() {
        s += &format!(
            "median distance from anchor: {:.3}  share moving > 2: {:.2}\n",
            stats::median(&d)?,
            stats::fraction_above(&d, 2.0)?
        );
    }
    if let Ok(ratio) = stats::retrieval_ratio(records) {
        let age = stats::memory_age_stats(records)?;
        s += &format!(
            "retrieval success:failure ratio: {ratio:.3}  retrieved age: mean {:.2} sd {:.2} over {}\n",
            age.mean, age.sd, age.count
        );
    }
    Ok(s)
}

fn biases_demo(out: Option<&Path>) -> Result<()> {
    let rows = demo::demo_rows()?;
    print!("{}", demo::render_markdown(&rows));
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("biases.csv");
        fs::write(&path, demo::render_csv(&rows)?).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn report(input: &Path, out: &Path) -> Result<()> {
    let path = input.join("trials.json");
    let file = fs::File::open(&path).map_err(|e| CliError::Usage(format!("cannot open `{}`: {e}", path.display())))?;
    let records = read_json(std::io::BufReader::new(file))?;
    if out != input {
        emit_report(&records, out)?;
    }
    print!("{}", summary(&records)?);
    Ok(())
}
