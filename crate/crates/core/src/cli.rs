//! The `coevo` command line: run experiments, export replays, inspect
//! bodies and compare statistics files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::evolution::{run_algorithm, Algorithm, Champion, EvolutionConfig, GenerationStats, RunArtifacts};
use crate::morphology::VoxelType;
use crate::tasks::{run_episode, TaskKind, TaskSpec};
use crate::{Error, Result};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "COEVO_THREADS";

/// Exit status for unusable configuration or arguments.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "coevo", version, about = "Body and controller co-evolution for 2D voxel soft robots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one evolutionary experiment from a JSON config.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set evolution.v=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Re-run a champion with recording on and write one JSON frame per line.
    ReplayExport {
        champion: PathBuf,
        /// Task to replay on; defaults to the champion's own task.
        #[arg(long)]
        task: Option<String>,
        /// Episode length; defaults to the run's configured horizon.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Print a champion's body and voxel type counts.
    InspectBody { champion: PathBuf },
    /// Merge several stats files into one summary table.
    Compare {
        #[arg(required = true)]
        stats: Vec<PathBuf>,
        /// Write the summary here instead of standard output.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// Top-level experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    pub task: TaskKind,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Also write `replay.jsonl` for the best champion.
    #[serde(default)]
    pub record_replay: bool,
    #[serde(default)]
    pub evolution: EvolutionConfig,
}

fn default_algorithm() -> Algorithm {
    Algorithm::Hyperneat
}

impl RunConfig {
    /// Reads a config file and applies `key=value` overrides before strict
    /// parsing, so a misspelt key fails whether it comes from the file or
    /// from the command line.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.evolution.seed = cfg.seed;
        cfg.evolution.validate()?;
        Ok(cfg)
    }

    pub fn task_spec(&self) -> TaskSpec {
        self.evolution.task(self.task)
    }
}

/// Sets `a.b.c = value` inside a JSON object. The value is read as JSON when
/// it parses, otherwise as a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("override key `{key}` has an empty segment")));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one segment")
}

/// A champion together with the run that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChampionArchive {
    pub seed: u64,
    pub config: RunConfig,
    pub champion: Champion,
}

impl ChampionArchive {
    pub fn load(path: &Path) -> Result<Self> {
        let corrupt = |reason: String| Error::CorruptArchive { path: path.to_path_buf(), reason };
        let text = fs::read_to_string(path).map_err(|e| corrupt(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub complete: bool,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub task: TaskKind,
    pub generations_run: usize,
    pub evaluations: u64,
    pub best_fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: RunConfig,
}

pub const STATS_FILE: &str = "stats.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHAMPION_FILE: &str = "champion.json";
pub const CHAMPIONS_DIR: &str = "champions";
pub const REPLAY_FILE: &str = "replay.jsonl";

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Runs an experiment and writes its artifacts. On a mid-run failure the
/// files written so far are kept and the manifest is marked incomplete.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunArtifacts> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir.join(CHAMPIONS_DIR))?;
    let mut manifest = Manifest {
        complete: false,
        seed: cfg.seed,
        algorithm: cfg.algorithm,
        task: cfg.task,
        generations_run: 0,
        evaluations: 0,
        best_fitness: None,
        error: None,
        config: cfg.clone(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;

    let mut stats_file = BufWriter::new(File::create(dir.join(STATS_FILE))?);
    writeln!(stats_file, "# {}", serde_json::to_string(cfg)?)?;
    let mut stats = csv::WriterBuilder::new().has_headers(false).from_writer(stats_file);
    stats.write_record(GenerationStats::COLUMNS)?;
    stats.flush()?;

    let task = cfg.task_spec();
    let mut observer = |report: &crate::evolution::GenerationReport| -> Result<()> {
        stats.serialize(report.stats)?;
        stats.flush()?;
        if let Some(c) = report.champion {
            let archive = ChampionArchive { seed: cfg.seed, config: cfg.clone(), champion: c.clone() };
            write_json(&dir.join(CHAMPIONS_DIR).join(format!("gen_{:04}.json", c.generation)), &archive)?;
        }
        manifest.generations_run = report.stats.generation + 1;
        manifest.evaluations = report.stats.evaluations_cumulative;
        log::info!(
            "generation {} best {:.4} species {} valid {:.2}",
            report.stats.generation,
            report.stats.best,
            report.stats.species_count,
            report.stats.valid_fraction
        );
        Ok(())
    };
    let outcome = run_algorithm(cfg.algorithm, &cfg.evolution, &task, &mut observer);
    drop(stats);

    let run = match outcome {
        Ok(run) => run,
        Err(e) => {
            manifest.error = Some(e.to_string());
            write_json(&dir.join(MANIFEST_FILE), &manifest)?;
            return Err(e);
        }
    };
    if let Some(best) = &run.best {
        write_json(&dir.join(CHAMPION_FILE), &ChampionArchive { seed: cfg.seed, config: cfg.clone(), champion: best.clone() })?;
        if cfg.record_replay {
            export_replay(best, &task, &dir.join(REPLAY_FILE))?;
        }
    }
    manifest.complete = run.complete;
    manifest.best_fitness = run.best.as_ref().map(|b| b.fitness);
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(run)
}

/// Replays `champion` on `task` and writes its frames as JSON lines.
/// Returns the number of frames.
pub fn export_replay(champion: &Champion, task: &TaskSpec, out: &Path) -> Result<usize> {
    let controller = champion.controller(task)?;
    let result = run_episode(&champion.body, controller.as_ref(), task, true)?;
    let mut w = BufWriter::new(File::create(out)?);
    for f in &result.frames {
        serde_json::to_writer(&mut w, f)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(result.frames.len())
}

pub fn cmd_replay_export(path: &Path, task: Option<&str>, horizon: Option<usize>, out: &Path) -> Result<usize> {
    let archive = ChampionArchive::load(path)?;
    let kind = match task {
        Some(t) => t.parse()?,
        None => archive.champion.task,
    };
    let mut spec = archive.config.evolution.task(kind);
    if let Some(h) = horizon {
        spec.horizon = h;
    }
    export_replay(&archive.champion, &spec, out)
}

/// ASCII picture of the body followed by one `type count` line per voxel type.
pub fn inspect_body(champion: &Champion) -> String {
    let body = &champion.body;
    let mut s = body.to_ascii();
    s.push('\n');
    let counts = body.type_counts();
    for v in VoxelType::ALL {
        let name = match v {
            VoxelType::Empty => "empty",
            VoxelType::Rigid => "rigid",
            VoxelType::Soft => "soft",
            VoxelType::HorizontalActuator => "horizontal_actuator",
            VoxelType::VerticalActuator => "vertical_actuator",
        };
        s.push_str(&format!("{} {name:<20} {}\n", v.symbol(), counts[v.index()]));
    }
    s.push_str(&format!("  {:<20} {}\n", "total", counts.iter().sum::<usize>()));
    s
}

pub fn cmd_inspect_body(path: &Path) -> Result<String> {
    Ok(inspect_body(&ChampionArchive::load(path)?.champion))
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: String,
    pub generations: usize,
    pub final_best: f64,
    pub best_ever: f64,
    pub final_mean: f64,
    pub final_species: usize,
    pub evaluations: u64,
}

pub fn read_stats(path: &Path) -> Result<Vec<GenerationStats>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Summarises each stats file; runs are labelled by their directory name,
/// or by file name for files outside a run directory.
pub fn compare(paths: &[PathBuf]) -> Result<Vec<RunSummary>> {
    paths
        .iter()
        .map(|p| {
            let rows = read_stats(p)?;
            let last = rows.last().ok_or_else(|| Error::InvalidArgument(format!("{} has no rows", p.display())))?;
            let label = p
                .parent()
                .and_then(|d| d.file_name())
                .filter(|_| p.file_name().is_some_and(|f| f == STATS_FILE))
                .or_else(|| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(RunSummary {
                run: label,
                generations: rows.len(),
                final_best: last.best,
                best_ever: rows.iter().map(|r| r.best).filter(|b| !b.is_nan()).fold(f64::NEG_INFINITY, f64::max),
                final_mean: last.mean,
                final_species: last.species_count,
                evaluations: last.evaluations_cumulative,
            })
        })
        .collect()
}

pub fn cmd_compare(paths: &[PathBuf], out: Option<&Path>) -> Result<String> {
    let rows = compare(paths)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("csv output is UTF-8");
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    Ok(text)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownTask(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Configures the global thread pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

/// Runs a parsed command line; returns the process exit status.
pub fn execute(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Run { config, overrides } => RunConfig::load(&config, &overrides).and_then(|cfg| {
            let run = cmd_run(&cfg)?;
            match &run.best {
                Some(b) => println!("best fitness {} (generation {})", b.fitness, b.generation),
                None => println!("no valid individual was evaluated"),
            }
            Ok(())
        }),
        Command::ReplayExport { champion, task, horizon, out } => {
            cmd_replay_export(&champion, task.as_deref(), horizon, &out).map(|n| println!("wrote {n} frames to {}", out.display()))
        }
        Command::InspectBody { champion } => cmd_inspect_body(&champion).map(|s| print!("{s}")),
        Command::Compare { stats, out } => cmd_compare(&stats, out.as_deref()).map(|s| {
            if out.is_none() {
                print!("{s}");
            }
        }),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                0
            }
        }
    }
}
