//! Command-line front end. Every command stages its outputs in memory and
//! writes them, together with a run manifest, only once it has succeeded.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::collision::{detect_collisions, Scene};
use crate::error::{Error, Result};
use crate::field::{EncoderKind, FieldConfig, NeuralField};
use crate::io::{self, RunManifest, StagedOutputs};
use crate::kinematics::{interpolate_poses, validate_pose, LimitMode, Pose};
use crate::optim::{
    optimize_trajectory, resolution_sweep, resolve_poses, tangent_descent, ResolveConfig,
    ResolveObjective, TangentConfig, TrajConfig, TvNorm, SWEEP_LEARNING_RATES, SWEEP_THRESHOLDS,
};
use crate::sampler::{collided_poses, generate_dataset, ndf_distance_labels, SamplerConfig};
use crate::scenes;
use crate::train::{evaluate_metrics, split_dataset, train, Head, Regularizer, ScaleMode, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "collision-field", version, about = "Learned joint-space collision fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Validate a scene file and print its summary.
    #[command(subcommand)]
    Scene(SceneCommand),
    /// Dataset generation.
    #[command(subcommand)]
    Data(DataCommand),
    /// Train a field on a dataset.
    Train(TrainArgs),
    /// Held-out metrics of a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Push collided poses out of collision.
    Resolve(ResolveArgs),
    /// Optimize a straight-line trajectory between two poses.
    Traj(TrajArgs),
    /// Move toward a goal while holding the field value.
    Tangent(TangentArgs),
    /// Reproduce threshold or learning-rate sweep tables.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum SceneCommand {
    Check {
        /// Scene JSON file or built-in scene id.
        scene: String,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum DataCommand {
    Gen(DataGenArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DataGenArgs {
    #[arg(long)]
    pub scene: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Output JSONL file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub balance_tol: f64,
    /// Also attach nearest-opposite-neighbour distance labels over `k` neighbours.
    #[arg(long)]
    pub ndf_k: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Hierarchical,
    Flattened,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerArg {
    Eikonal,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleArg {
    Learned,
    Fixed,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadArg {
    Sdf,
    Ndf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub scene: String,
    /// Output directory (checkpoint.json, metrics.csv, manifest.json).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = VariantArg::Hierarchical)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = RegularizerArg::Eikonal)]
    pub regularizer: RegularizerArg,
    #[arg(long, value_enum, default_value_t = ScaleArg::Learned)]
    pub scale: ScaleArg,
    #[arg(long, value_enum, default_value_t = HeadArg::Sdf)]
    pub head: HeadArg,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 512)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 512)]
    pub trunk_width: usize,
    #[arg(long, default_value_t = 4)]
    pub trunk_depth: usize,
    #[arg(long, default_value_t = 1000)]
    pub eval_every: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Defaults to the built-in scene named in the dataset header.
    #[arg(long)]
    pub scene: Option<String>,
    /// Score only the held-out split made with this seed.
    #[arg(long)]
    pub heldout_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveArg {
    Sdf,
    Probability,
}

#[derive(Debug, Args, Serialize)]
pub struct ResolveArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub scene: String,
    /// JSON array of poses.
    #[arg(long)]
    pub poses: PathBuf,
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    pub l_thres: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Sdf)]
    pub objective: ObjectiveArg,
    /// Output directory (resolved.json, trace_<i>.csv, manifest.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TvArg {
    Euclidean,
    Squared,
}

#[derive(Debug, Args, Serialize)]
pub struct TrajArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub scene: String,
    /// Comma-separated joint angles.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub end: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 0.1)]
    pub gamma2: f64,
    #[arg(long, default_value_t = -0.05, allow_hyphen_values = true)]
    pub l_thres: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = TvArg::Euclidean)]
    pub tv: TvArg,
    /// Let the optimizer move the endpoints too.
    #[arg(long)]
    pub free_endpoints: bool,
    /// Output directory (waypoints.json, trace.csv, manifest.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TangentArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub scene: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub end: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Output directory (trace.csv, manifest.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Thresholds,
    Lrs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub scene: String,
    #[arg(long)]
    pub seed: u64,
    /// Number of collided poses drawn from the oracle.
    #[arg(long, default_value_t = 200)]
    pub n_poses: usize,
    /// Threshold used by the learning-rate sweep.
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    pub l_thres: f64,
    /// Learning rate used by the threshold sweep.
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Output directory (sweep.csv, manifest.json).
    #[arg(long)]
    pub out: PathBuf,
}

/// Outcome of a successful command: text for stdout plus staged files.
struct Run {
    stdout: String,
    outputs: StagedOutputs,
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
    manifest: Option<PathBuf>,
}

fn now_secs() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// A scene argument is a JSON path, or a built-in id when no such file exists.
/// Returns the scene, its id and the file it came from.
fn load_scene_arg(arg: &str) -> Result<(Scene, String, Option<PathBuf>)> {
    let path = Path::new(arg);
    if path.exists() {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        return Ok((io::load_scene(path)?, id, Some(path.to_path_buf())));
    }
    scenes::builtin(arg)
        .map(|s| (s, arg.to_string(), None))
        .ok_or_else(|| Error::InvalidConfig(format!("no scene file or built-in scene named {arg}")))
}

fn json_line(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string(v)? + "\n")
}

fn scene_check(arg: &str) -> Result<Run> {
    let (scene, id, file) = load_scene_arg(arg)?;
    let summary = serde_json::json!({
        "scene_id": id,
        "k": scene.robot.dof(),
        "links": scene.robot.links().len(),
        "capsules": scene.robot.links().iter().map(|l| l.capsules.len()).sum::<usize>(),
        "obstacles": scene.obstacles.len(),
        "self_pairs": scene.self_pairs().len(),
    });
    Ok(Run {
        stdout: json_line(&summary)?,
        outputs: StagedOutputs::default(),
        inputs: file.into_iter().collect(),
        seed: None,
        manifest: None,
    })
}

fn data_gen(a: &DataGenArgs) -> Result<Run> {
    let (scene, id, file) = load_scene_arg(&a.scene)?;
    let cfg = SamplerConfig::new(a.n, a.balance_tol, a.seed);
    let mut ds = generate_dataset(&scene, &id, &cfg)?;
    if let Some(k) = a.ndf_k {
        ds = ndf_distance_labels(&ds, k)?;
    }
    let (free, hit) = ds.class_counts();
    let mut outputs = StagedOutputs::default();
    outputs.add(&a.out, io::dataset_to_jsonl(&ds)?);
    Ok(Run {
        stdout: json_line(&serde_json::json!({ "n": ds.len(), "free": free, "collided": hit }))?,
        outputs,
        inputs: file.into_iter().collect(),
        seed: Some(a.seed),
        manifest: Some(a.out.with_extension("manifest.json")),
    })
}

fn train_cmd(a: &TrainArgs) -> Result<Run> {
    let (scene, _, file) = load_scene_arg(&a.scene)?;
    let ds = io::load_dataset(&a.data)?;
    let config = TrainConfig {
        iterations: a.iterations,
        batch_size: a.batch_size,
        learning_rate: a.lr,
        alpha: a.alpha,
        eval_every: a.eval_every,
        seed: a.seed,
        field: FieldConfig {
            encoder: match a.variant {
                VariantArg::Hierarchical => EncoderKind::Hierarchical,
                VariantArg::Flattened => EncoderKind::Flattened,
            },
            trunk_width: a.trunk_width,
            trunk_depth: a.trunk_depth,
            ..FieldConfig::default()
        },
        regularizer: match a.regularizer {
            RegularizerArg::Eikonal => Regularizer::Eikonal,
            RegularizerArg::None => Regularizer::None,
        },
        scale: match a.scale {
            ScaleArg::Learned => ScaleMode::Learned,
            ScaleArg::Fixed => ScaleMode::FixedOne,
        },
        head: match a.head {
            HeadArg::Sdf => Head::SdfClassifier,
            HeadArg::Ndf => Head::NdfRegression,
        },
        ..TrainConfig::default()
    };
    let out = train(&ds, &scene.robot, &config)?;
    let mut outputs = StagedOutputs::default();
    outputs.add(a.out.join("checkpoint.json"), io::checkpoint_to_json(&out.params)?);
    outputs.add(a.out.join("metrics.csv"), io::metrics_csv(&out.metrics)?);
    let last = out.metrics.last().copied();
    Ok(Run {
        stdout: json_line(&last)?,
        outputs,
        inputs: std::iter::once(a.data.clone()).chain(file).collect(),
        seed: Some(a.seed),
        manifest: Some(a.out.join("manifest.json")),
    })
}

fn eval_cmd(a: &EvalArgs) -> Result<Run> {
    let params = io::load_checkpoint(&a.ckpt)?;
    let ds = io::load_dataset(&a.data)?;
    let scene_arg = a.scene.clone().unwrap_or_else(|| ds.scene_id.clone());
    let (scene, _, file) = load_scene_arg(&scene_arg)?;
    params.check_model(&scene.robot)?;
    let samples = match a.heldout_seed {
        Some(seed) => split_dataset(&ds, 0.1, seed).1,
        None => ds.samples.clone(),
    };
    let m = evaluate_metrics(&params, &scene.robot, &samples)?;
    Ok(Run {
        stdout: json_line(&m)?,
        outputs: StagedOutputs::default(),
        inputs: [a.ckpt.clone(), a.data.clone()].into_iter().chain(file).collect(),
        seed: None,
        manifest: None,
    })
}

fn pose_arg(scene: &Scene, v: &[f64]) -> Result<Pose> {
    validate_pose(&scene.robot, &Pose(v.to_vec()), LimitMode::Reject)
}

fn resolve_cmd(a: &ResolveArgs) -> Result<Run> {
    let (scene, _, file) = load_scene_arg(&a.scene)?;
    let params = io::load_checkpoint_for(&a.ckpt, &scene.robot)?;
    let poses = io::parse_poses(&std::fs::read_to_string(&a.poses)?)?
        .iter()
        .map(|p| validate_pose(&scene.robot, p, LimitMode::Reject))
        .collect::<Result<Vec<_>>>()?;
    let field = NeuralField::new(&params, &scene.robot)?;
    let cfg = ResolveConfig {
        l_thres: a.l_thres,
        learning_rate: a.lr,
        max_iters: a.max_iters,
        objective: match a.objective {
            ObjectiveArg::Sdf => ResolveObjective::Sdf,
            ObjectiveArg::Probability => ResolveObjective::Probability,
        },
    };
    let traces = resolve_poses(&field, &scene.robot.limits(), &poses, &cfg)?;
    let mut outputs = StagedOutputs::default();
    let mut summary = Vec::new();
    for (i, (t, p0)) in traces.iter().zip(&poses).enumerate() {
        outputs.add(a.out.join(format!("trace_{i}.csv")), io::trace_csv(t)?);
        summary.push(serde_json::json!({
            "pose": t.final_pose(),
            "iterations": t.iterations,
            "converged": t.converged,
            "move_angle": t.move_angle,
            "g": t.final_g(),
            "pairs_before": detect_collisions(&scene, p0)?.pair_count,
            "pairs_after": detect_collisions(&scene, t.final_pose())?.pair_count,
        }));
    }
    outputs.add(a.out.join("resolved.json"), serde_json::to_string_pretty(&summary)? + "\n");
    let converged = traces.iter().filter(|t| t.converged).count();
    Ok(Run {
        stdout: json_line(&serde_json::json!({ "poses": traces.len(), "converged": converged }))?,
        outputs,
        inputs: [a.ckpt.clone(), a.poses.clone()].into_iter().chain(file).collect(),
        seed: None,
        manifest: Some(a.out.join("manifest.json")),
    })
}

fn traj_cmd(a: &TrajArgs) -> Result<Run> {
    let (scene, _, file) = load_scene_arg(&a.scene)?;
    let params = io::load_checkpoint_for(&a.ckpt, &scene.robot)?;
    let field = NeuralField::new(&params, &scene.robot)?;
    let start = pose_arg(&scene, &a.start)?;
    let end = pose_arg(&scene, &a.end)?;
    let path = interpolate_poses(&start, &end, a.n)?;
    let cfg = TrajConfig {
        gamma_sdf: a.gamma1,
        gamma_tv: a.gamma2,
        l_thres: a.l_thres,
        learning_rate: a.lr,
        max_iters: a.max_iters,
        endpoints_frozen: !a.free_endpoints,
        tv: match a.tv {
            TvArg::Euclidean => TvNorm::Euclidean,
            TvArg::Squared => TvNorm::Squared,
        },
    };
    let (out, trace) = optimize_trajectory(&field, &scene.robot.limits(), &path, &cfg)?;
    let count = |ps: &[Pose]| -> Result<usize> {
        let mut n = 0;
        for p in ps {
            n += usize::from(detect_collisions(&scene, p)?.collided);
        }
        Ok(n)
    };
    let mut outputs = StagedOutputs::default();
    outputs.add(a.out.join("waypoints.json"), io::poses_to_json(&out)?);
    outputs.add(a.out.join("trace.csv"), io::trace_csv(&trace)?);
    Ok(Run {
        stdout: json_line(&serde_json::json!({
            "iterations": trace.iterations,
            "converged": trace.converged,
            "collided_before": count(&path)?,
            "collided_after": count(&out)?,
        }))?,
        outputs,
        inputs: std::iter::once(a.ckpt.clone()).chain(file).collect(),
        seed: None,
        manifest: Some(a.out.join("manifest.json")),
    })
}

fn tangent_cmd(a: &TangentArgs) -> Result<Run> {
    let (scene, _, file) = load_scene_arg(&a.scene)?;
    let params = io::load_checkpoint_for(&a.ckpt, &scene.robot)?;
    let field = NeuralField::new(&params, &scene.robot)?;
    let start = pose_arg(&scene, &a.start)?;
    let end = pose_arg(&scene, &a.end)?;
    let cfg = TangentConfig {
        delta: a.delta,
        max_iters: a.max_iters,
        tolerance: a.tol,
    };
    let trace = tangent_descent(&field, &scene.robot.limits(), &start, &end, &cfg)?;
    let mut outputs = StagedOutputs::default();
    outputs.add(a.out.join("trace.csv"), io::trace_csv(&trace)?);
    Ok(Run {
        stdout: json_line(&serde_json::json!({
            "iterations": trace.iterations,
            "converged": trace.converged,
            "g_start": trace.steps[0].g,
            "g_end": trace.final_g(),
        }))?,
        outputs,
        inputs: std::iter::once(a.ckpt.clone()).chain(file).collect(),
        seed: None,
        manifest: Some(a.out.join("manifest.json")),
    })
}

fn sweep_cmd(a: &SweepArgs) -> Result<Run> {
    let (scene, _, file) = load_scene_arg(&a.scene)?;
    let params = io::load_checkpoint_for(&a.ckpt, &scene.robot)?;
    let field = NeuralField::new(&params, &scene.robot)?;
    let poses = collided_poses(&scene, a.n_poses, a.seed, a.n_poses.max(1) * 1000)?;
    let base = ResolveConfig {
        l_thres: a.l_thres,
        learning_rate: a.lr,
        max_iters: a.max_iters,
        objective: ResolveObjective::Sdf,
    };
    let (column, configs): (&str, Vec<(f64, ResolveConfig)>) = match a.kind {
        SweepKind::Thresholds => (
            "threshold",
            SWEEP_THRESHOLDS
                .iter()
                .map(|&t| (t, ResolveConfig { l_thres: t, ..base }))
                .collect(),
        ),
        SweepKind::Lrs => (
            "lr",
            SWEEP_LEARNING_RATES
                .iter()
                .map(|&lr| (lr, ResolveConfig { learning_rate: lr, ..base }))
                .collect(),
        ),
    };
    let rows = resolution_sweep(&field, &scene, &poses, &configs)?;
    let csv = io::sweep_csv(column, &rows)?;
    let mut outputs = StagedOutputs::default();
    outputs.add(a.out.join("sweep.csv"), csv.clone());
    Ok(Run {
        stdout: String::from_utf8_lossy(&csv).into_owned(),
        outputs,
        inputs: std::iter::once(a.ckpt.clone()).chain(file).collect(),
        seed: Some(a.seed),
        manifest: Some(a.out.join("manifest.json")),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Scene(_) => "scene check",
        Command::Data(_) => "data gen",
        Command::Train(_) => "train",
        Command::Eval(_) => "eval",
        Command::Resolve(_) => "resolve",
        Command::Traj(_) => "traj",
        Command::Tangent(_) => "tangent",
        Command::Sweep(_) => "sweep",
    }
}

/// Runs a parsed command. Returns what should go to stdout.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<String> {
    let started_at = now_secs();
    let run = match &cli.command {
        Command::Scene(SceneCommand::Check { scene }) => scene_check(scene)?,
        Command::Data(DataCommand::Gen(a)) => data_gen(a)?,
        Command::Train(a) => train_cmd(a)?,
        Command::Eval(a) => eval_cmd(a)?,
        Command::Resolve(a) => resolve_cmd(a)?,
        Command::Traj(a) => traj_cmd(a)?,
        Command::Tangent(a) => tangent_cmd(a)?,
        Command::Sweep(a) => sweep_cmd(a)?,
    };
    let Run {
        stdout,
        mut outputs,
        inputs,
        seed,
        manifest,
    } = run;
    if let Some(path) = manifest {
        let manifest = RunManifest {
            command: command_name(&cli.command).to_string(),
            argv: argv.to_vec(),
            config: serde_json::to_value(&cli.command)?,
            seed,
            inputs: inputs.iter().map(|p| io::hash_file(p)).collect::<Result<_>>()?,
            outputs: outputs.paths(),
            started_at,
            finished_at: now_secs(),
        };
        outputs.add(path, serde_json::to_string_pretty(&manifest)? + "\n");
    }
    outputs.commit()?;
    Ok(stdout)
}

/// Machine-readable error document printed on stderr.
pub fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

/// Full entry point: parses `argv`, runs, and returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return 2;
        }
    };
    match execute(&cli, &argv) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            1
        }
    }
}
