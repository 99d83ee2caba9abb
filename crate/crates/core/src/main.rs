use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use roboloop::evalbench::synth::ReferenceResponder;
use roboloop::evalbench::{
    build_tasks, render_ablation_table, run_ablation, run_benchmark, write_tasks, BenchOptions, Dataset, MethodSpec,
    TASKS_FILE,
};
use roboloop::interpreter::{parse, render_numerical, render_semantic, run_source, to_source, DroneState, ExecConfig};
use roboloop::llm::{CassetteStore, LlmBackend, RecordingBackend};
use roboloop::pipeline::{method_label, observe, parse_method, run_task, BackendMode, ConfigFile};

#[derive(Parser)]
#[command(name = "roboloop", version, about = "Corrective drone-code generation with static text-based simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct BackendArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the backend: replay, record, live or synthetic (interpreter-driven, needs a dataset).
    #[arg(long)]
    backend: Option<String>,
    /// Override the cassette path.
    #[arg(long)]
    cassette: Option<PathBuf>,
    /// Override the model name.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the corrective loop on the tasks of a dataset file.
    Run {
        #[arg(long)]
        task_file: PathBuf,
        /// Only run this task id.
        #[arg(long)]
        task_id: Option<String>,
        /// ours, semantic, numerical or direct (defaults to the config's method).
        #[arg(long)]
        method: Option<String>,
        /// Print each LoopResult as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Print the observation a simulation backend produces for a code file.
    Simulate {
        #[arg(long)]
        code: PathBuf,
        /// llm_sim, oracle_semantic, oracle_numerical or none.
        #[arg(long = "sim", default_value = "oracle_semantic")]
        source: String,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Benchmark methods over a dataset and write a CSV report.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ours,semantic,numerical,direct")]
        methods: Vec<String>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Run the simulator-prompt ablation study.
    Ablate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Execute a code file with the interpreter and print transitions plus narration.
    Oracle {
        #[arg(long)]
        code: PathBuf,
        /// Start airborne instead of on the ground.
        #[arg(long)]
        hover: bool,
        #[arg(long, default_value_t = 2.5)]
        h_takeoff: f64,
    },
    /// Print a mutated version of a code file.
    Mutate {
        #[arg(long)]
        code: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Record a replay cassette from the interpreter-driven reference responder.
    SynthCassette {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "reference-responder")]
        model: String,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Check a task file against its manifest and reference programs.
    Validate { path: PathBuf },
    /// Regenerate tasks.jsonl from sources.json and the reference programs.
    Build { dir: PathBuf },
}

fn load_config(args: &BackendArgs) -> Result<ConfigFile> {
    let mut cfg = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(c) = &args.cassette {
        cfg.cassette = Some(c.clone());
    }
    if let Some(m) = &args.model {
        cfg.model = m.clone();
    }
    Ok(cfg)
}

fn make_backend(args: &BackendArgs, cfg: &mut ConfigFile, dataset: Option<&Dataset>) -> Result<Arc<dyn LlmBackend>> {
    match args.backend.as_deref() {
        Some("synthetic") => {
            let ds = dataset.context("the synthetic backend needs a dataset")?;
            let responder = ReferenceResponder::from_dataset(ds).map_err(anyhow::Error::msg)?;
            return Ok(Arc::new(responder.into_backend()));
        }
        Some("replay") => cfg.backend = BackendMode::Replay,
        Some("record") => cfg.backend = BackendMode::Record,
        Some("live") => cfg.backend = BackendMode::Live,
        Some(other) => bail!("unknown backend {other:?}"),
        None => {}
    }
    Ok(cfg.backend()?)
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::load(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { task_file, task_id, method, json, backend } => {
            let ds = load_dataset(&task_file)?;
            let mut cfg = load_config(&backend)?;
            if let Some(m) = method {
                cfg.method = m;
            }
            let llm = make_backend(&backend, &mut cfg, Some(&ds))?;
            let config = cfg.method_config(llm)?;
            let tasks: Vec<_> = ds.tasks.iter().filter(|t| task_id.as_ref().is_none_or(|id| &t.id == id)).collect();
            if tasks.is_empty() {
                bail!("no matching task in {}", task_file.display());
            }
            for task in tasks {
                let result = run_task(task, &config)?;
                let exec = config.exec.with_takeoff_altitude(task.h_takeoff);
                let score = roboloop::evalbench::score_code(&result.final_code, &task.ground_truth, &exec, &cfg.tolerances)?;
                if json {
                    println!("{}", serde_json::to_string(&result)?);
                } else {
                    println!(
                        "{}\t{}\t{} iteration(s)\tcompleteness {:.3}\tsuccess {}",
                        task.id, result.status, result.iterations_used, score.completeness, score.success
                    );
                    if let Some(e) = &result.error {
                        println!("\terror: {e}");
                    }
                }
            }
        }
        Command::Simulate { code, source, backend } => {
            let text = fs::read_to_string(&code).with_context(|| format!("reading {}", code.display()))?;
            let mut cfg = load_config(&backend)?;
            cfg.method = source.clone();
            let sim = parse_method(&source).map_err(anyhow::Error::msg)?;
            let llm: Arc<dyn LlmBackend> = if sim == roboloop::roles::ObservationSource::LlmSim {
                make_backend(&backend, &mut cfg, None)?
            } else {
                Arc::new(roboloop::llm::ScriptedBackend::queue(Vec::<String>::new()))
            };
            let obs = observe(&text, &cfg.method_config(llm)?)?;
            println!("{}", obs.prose);
            if let Some(s) = &obs.structured {
                println!("{} {}", roboloop::prompts::TRANSITIONS_MARKER, serde_json::to_string(s)?);
            }
        }
        Command::Bench { dataset, methods, reps, jobs, out, backend } => {
            let ds = load_dataset(&dataset)?;
            let mut cfg = load_config(&backend)?;
            let llm = make_backend(&backend, &mut cfg, Some(&ds))?;
            let mut specs = Vec::new();
            for m in &methods {
                let source = parse_method(m).map_err(anyhow::Error::msg)?;
                let mut c = cfg.clone();
                c.method = source.as_str().to_string();
                specs.push(MethodSpec { label: method_label(source).to_string(), config: c.method_config(llm.clone())? });
            }
            let report = run_benchmark(&ds.tasks, &specs, &BenchOptions { repetitions: reps, jobs, tolerance: cfg.tolerances })?;
            let csv = report.to_csv()?;
            match out {
                Some(p) => {
                    fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?;
                    print!("{}", report.render_table());
                }
                None => print!("{csv}"),
            }
        }
        Command::Ablate { dataset, reps, jobs, backend } => {
            let ds = load_dataset(&dataset)?;
            let mut cfg = load_config(&backend)?;
            cfg.method = "llm_sim".into();
            let llm = make_backend(&backend, &mut cfg, Some(&ds))?;
            let runs = run_ablation(&ds.tasks, &cfg.method_config(llm)?, &BenchOptions { repetitions: reps, jobs, tolerance: cfg.tolerances })?;
            print!("{}", render_ablation_table(&runs));
        }
        Command::Oracle { code, hover, h_takeoff } => {
            let text = fs::read_to_string(&code).with_context(|| format!("reading {}", code.display()))?;
            let initial = if hover { DroneState::hovering() } else { DroneState::grounded() };
            let trace = run_source(&text, initial, &ExecConfig::default().with_takeoff_altitude(h_takeoff))?;
            println!("{}", serde_json::to_string(&trace.transitions)?);
            println!("{}", render_semantic(&trace));
            println!("{}", render_numerical(&trace));
            if !trace.faults.is_empty() {
                println!("{}", roboloop::interpreter::render_faults(&trace));
            }
        }
        Command::Mutate { code, seed } => {
            let text = fs::read_to_string(&code).with_context(|| format!("reading {}", code.display()))?;
            let mutant = roboloop::interpreter::mutate(&parse(&text)?, seed)?;
            print!("{}", to_source(&mutant));
        }
        Command::Dataset(DatasetCommand::Validate { path }) => {
            let ds = load_dataset(&path)?;
            let problems = ds.validate();
            for p in &problems {
                eprintln!("{p}");
            }
            if !problems.is_empty() {
                bail!("{} problem(s) in {}", problems.len(), path.display());
            }
            println!("{}: {} tasks OK", path.display(), ds.tasks.len());
        }
        Command::Dataset(DatasetCommand::Build { dir }) => {
            let tasks = build_tasks(&dir)?;
            let out = dir.join(TASKS_FILE);
            fs::write(&out, write_tasks(&tasks))?;
            println!("wrote {} tasks to {}", tasks.len(), out.display());
        }
        Command::SynthCassette { dataset, out, model } => {
            let ds = load_dataset(&dataset)?;
            if out.exists() {
                fs::remove_file(&out)?;
            }
            let store = Arc::new(CassetteStore::open(&out)?.with_fixed_timestamp(0));
            let responder = ReferenceResponder::from_dataset(&ds).map_err(anyhow::Error::msg)?;
            let llm: Arc<dyn LlmBackend> = Arc::new(RecordingBackend::new(Arc::new(responder.into_backend()), store.clone()));
            let cfg = ConfigFile { model, ..ConfigFile::default() };
            let options = BenchOptions { repetitions: 1, jobs: 1, tolerance: ds.manifest.tolerance };
            let mut specs = Vec::new();
            for source in roboloop::roles::ObservationSource::ALL {
                let c = ConfigFile { method: source.as_str().to_string(), ..cfg.clone() };
                specs.push(MethodSpec { label: method_label(source).to_string(), config: c.method_config(llm.clone())? });
            }
            run_benchmark(&ds.tasks, &specs, &options)?;
            let sim = ConfigFile { method: "llm_sim".into(), ..cfg.clone() };
            run_ablation(&ds.tasks, &sim.method_config(llm)?, &options)?;
            println!("recorded {} responses to {}", store.len(), out.display());
        }
    }
    Ok(())
}
