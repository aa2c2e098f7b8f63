//! File formats: scene JSON, dataset JSONL, checkpoint JSON, metrics/trace/
//! sweep CSV and run manifests.
//!
//! Floats are printed in shortest round-trip form and parsed back exactly, so
//! every format round-trips bit for bit.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::collision::{Obstacle, Scene};
use crate::error::{Error, Result};
use crate::field::{Dense, FieldConfig, FieldParams, Source, CHECKPOINT_VERSION};
use crate::kinematics::{Capsule, Joint, JointLimits, Link, Pose, RobotModel, Transform};
use crate::optim::{OptimTrace, SweepRow};
use crate::sampler::{Dataset, LabeledPose};
use crate::train::MetricsReport;

pub const SCENE_VERSION: u32 = 1;
pub const DATASET_VERSION: u32 = 1;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn json_error(what: &str, e: serde_json::Error) -> Error {
    Error::Format(format!("{what}: {e}"))
}

// ---------------------------------------------------------------- scenes

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    version: u32,
    robot: RobotFile,
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
    #[serde(default)]
    self_collision: SelfCollisionFile,
    #[serde(default)]
    clearance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    joints: Vec<JointFile>,
    links: Vec<LinkFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    /// Index of the link the joint is mounted on.
    parent: usize,
    origin: OriginFile,
    axis: [f64; 3],
    limits: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OriginFile {
    xyz: [f64; 3],
    /// `[w, x, y, z]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quat: Option<[f64; 4]>,
    /// Roll, pitch, yaw about fixed x, y, z.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rpy: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    #[serde(default)]
    capsules: Vec<CapsuleFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapsuleFile {
    p0: [f64; 3],
    p1: [f64; 3],
    radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case", deny_unknown_fields)]
enum ObstacleFile {
    Sphere { center: [f64; 3], radius: f64 },
    Capsule { p0: [f64; 3], p1: [f64; 3], radius: f64 },
    HalfSpace { normal: [f64; 3], offset: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelfCollisionFile {
    #[serde(default)]
    exclude_pairs: Vec<[usize; 2]>,
}

fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::from(a)
}

fn arr3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn origin_transform(o: &OriginFile, at: &str) -> Result<Transform> {
    let rotation = match (o.quat, o.rpy) {
        (Some(_), Some(_)) => {
            return Err(Error::Format(format!("{at}: give either quat or rpy, not both")))
        }
        (Some([w, x, y, z]), None) => {
            let q = Quaternion::new(w, x, y, z);
            if !(q.norm() > 0.0) {
                return Err(Error::Format(format!("{at}: quaternion has zero norm")));
            }
            UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
        }
        (None, Some([r, p, y])) => Rotation3::from_euler_angles(r, p, y).into_inner(),
        (None, None) => nalgebra::Matrix3::identity(),
    };
    Transform::new(rotation, vec3(o.xyz)).map_err(|e| Error::Format(format!("{at}: {e}")))
}

fn scene_from_file(file: SceneFile) -> Result<Scene> {
    if file.version != SCENE_VERSION {
        return Err(Error::Format(format!(
            "unsupported scene version {} (expected {SCENE_VERSION})",
            file.version
        )));
    }
    let mut joints = Vec::with_capacity(file.robot.joints.len());
    for (k, j) in file.robot.joints.iter().enumerate() {
        let at = format!("robot.joints[{k}]");
        let limits = JointLimits::new(j.limits[0], j.limits[1])
            .map_err(|e| Error::Format(format!("{at}.limits: {e}")))?;
        joints.push(Joint {
            parent_link: j.parent,
            origin: origin_transform(&j.origin, &format!("{at}.origin"))?,
            axis: vec3(j.axis),
            limits,
        });
    }
    let links = file
        .robot
        .links
        .iter()
        .map(|l| Link {
            capsules: l
                .capsules
                .iter()
                .map(|c| Capsule {
                    p0: vec3(c.p0),
                    p1: vec3(c.p1),
                    radius: c.radius,
                })
                .collect(),
        })
        .collect();
    let robot = RobotModel::new(joints, links).map_err(|e| Error::Format(format!("robot: {e}")))?;
    let mut obstacles = Vec::with_capacity(file.obstacles.len());
    for (i, o) in file.obstacles.iter().enumerate() {
        let ob = match *o {
            ObstacleFile::Sphere { center, radius } => Obstacle::Sphere {
                center: vec3(center),
                radius,
            },
            ObstacleFile::Capsule { p0, p1, radius } => Obstacle::Capsule {
                p0: vec3(p0),
                p1: vec3(p1),
                radius,
            },
            ObstacleFile::HalfSpace { normal, offset } => Obstacle::HalfSpace {
                normal: vec3(normal),
                offset,
            },
        };
        ob.validate()
            .map_err(|e| Error::Format(format!("obstacles[{i}]: {e}")))?;
        obstacles.push(ob);
    }
    let exclude: Vec<(usize, usize)> = file
        .self_collision
        .exclude_pairs
        .iter()
        .map(|[a, b]| (*a, *b))
        .collect();
    Scene::new(robot, obstacles, &exclude, file.clearance)
        .map_err(|e| Error::Format(format!("scene: {e}")))
}

/// Parses a scene document. Syntax and schema errors carry line and column;
/// model violations name the offending element.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| json_error("scene", e))?;
    scene_from_file(file)
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read_text(path)?).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Serializes a scene. Self-collision pairs are written as the exclusions
/// relative to the default non-adjacent pair set.
pub fn scene_to_json(scene: &Scene) -> Result<String> {
    let robot = &scene.robot;
    let joints = robot
        .joints()
        .iter()
        .map(|j| {
            let q = UnitQuaternion::from_matrix(&j.origin.rotation);
            let identity = j.origin.rotation == nalgebra::Matrix3::identity();
            JointFile {
                parent: j.parent_link,
                origin: OriginFile {
                    xyz: arr3(&j.origin.translation),
                    quat: if identity { None } else { Some([q.w, q.i, q.j, q.k]) },
                    rpy: None,
                },
                axis: arr3(&j.axis),
                limits: [j.limits.lo, j.limits.hi],
            }
        })
        .collect();
    let links = robot
        .links()
        .iter()
        .map(|l| LinkFile {
            capsules: l
                .capsules
                .iter()
                .map(|c| CapsuleFile {
                    p0: arr3(&c.p0),
                    p1: arr3(&c.p1),
                    radius: c.radius,
                })
                .collect(),
        })
        .collect();
    let obstacles = scene
        .obstacles
        .iter()
        .map(|o| match *o {
            Obstacle::Sphere { center, radius } => ObstacleFile::Sphere {
                center: arr3(&center),
                radius,
            },
            Obstacle::Capsule { p0, p1, radius } => ObstacleFile::Capsule {
                p0: arr3(&p0),
                p1: arr3(&p1),
                radius,
            },
            Obstacle::HalfSpace { normal, offset } => ObstacleFile::HalfSpace {
                normal: arr3(&normal),
                offset,
            },
        })
        .collect();
    let n_links = robot.links().len();
    let mut exclude = Vec::new();
    for i in 0..n_links {
        for j in (i + 1)..n_links {
            if !robot.are_adjacent(i, j) && !scene.self_pairs().iter().any(|&p| p == (i, j) || p == (j, i)) {
                exclude.push([i, j]);
            }
        }
    }
    let file = SceneFile {
        version: SCENE_VERSION,
        robot: RobotFile { joints, links },
        obstacles,
        self_collision: SelfCollisionFile {
            exclude_pairs: exclude,
        },
        clearance: scene.clearance,
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

// --------------------------------------------------------------- datasets

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetHeader {
    version: u32,
    scene_id: String,
    seed: u64,
    k: usize,
    n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetRecord {
    theta: Vec<f64>,
    /// 1 when collided.
    c: u8,
    pairs: usize,
    #[serde(default)]
    ndf: Option<f64>,
}

/// One header line, then one JSON record per sample.
pub fn dataset_to_jsonl(dataset: &Dataset) -> Result<String> {
    let mut out = serde_json::to_string(&DatasetHeader {
        version: DATASET_VERSION,
        scene_id: dataset.scene_id.clone(),
        seed: dataset.seed,
        k: dataset.dof,
        n: dataset.len(),
    })?;
    out.push('\n');
    for s in &dataset.samples {
        out.push_str(&serde_json::to_string(&DatasetRecord {
            theta: s.pose.0.clone(),
            c: u8::from(s.collided),
            pairs: s.pair_count,
            ndf: s.ndf_distance,
        })?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_dataset(reader: impl BufRead) -> Result<Dataset> {
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Format("dataset line 1: missing header".into()))??;
    let header: DatasetHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Format(format!("dataset line 1: {e}")))?;
    if header.version != DATASET_VERSION {
        return Err(Error::Format(format!(
            "dataset line 1: unsupported version {}",
            header.version
        )));
    }
    let mut samples = Vec::with_capacity(header.n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let r: DatasetRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("dataset line {lineno}: {e}")))?;
        if r.theta.len() != header.k {
            return Err(Error::Format(format!(
                "dataset line {lineno}: expected {} angles, got {}",
                header.k,
                r.theta.len()
            )));
        }
        if r.c > 1 {
            return Err(Error::Format(format!("dataset line {lineno}: label must be 0 or 1")));
        }
        samples.push(LabeledPose {
            pose: Pose(r.theta),
            collided: r.c == 1,
            pair_count: r.pairs,
            ndf_distance: r.ndf,
        });
    }
    if samples.len() != header.n {
        return Err(Error::Format(format!(
            "dataset header declares {} samples, found {}",
            header.n,
            samples.len()
        )));
    }
    Ok(Dataset {
        samples,
        scene_id: header.scene_id,
        seed: header.seed,
        dof: header.k,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    parse_dataset(BufReader::new(file))
}

// ------------------------------------------------------------ checkpoints

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    version: u32,
    k: usize,
    scene_id: String,
    seed: u64,
    config: FieldConfig,
    /// `ρ`; the scale is `exp(ρ)`.
    log_scale: f64,
    layers: Vec<LayerFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    inputs: Vec<Source>,
    rows: usize,
    cols: usize,
    activation: bool,
    /// Row-major `rows × cols`.
    weight: Vec<f64>,
    bias: Vec<f64>,
}

pub fn checkpoint_to_json(params: &FieldParams) -> Result<String> {
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        k: params.dof,
        scene_id: params.scene_id.clone(),
        seed: params.seed,
        config: params.config,
        log_scale: params.log_scale,
        layers: params
            .layers
            .iter()
            .map(|l| LayerFile {
                inputs: l.inputs.clone(),
                rows: l.out_dim(),
                cols: l.in_dim(),
                activation: l.activation,
                weight: l.weight.iter().copied().collect(),
                bias: l.bias.to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&file)? + "\n")
}

pub fn parse_checkpoint(text: &str) -> Result<FieldParams> {
    let file: CheckpointFile = serde_json::from_str(text).map_err(|e| json_error("checkpoint", e))?;
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {}",
            file.version
        )));
    }
    file.config.validate()?;
    let mut layers: Vec<Dense> = Vec::with_capacity(file.layers.len());
    for (i, l) in file.layers.into_iter().enumerate() {
        let mut expected_cols = 0;
        for src in &l.inputs {
            expected_cols += match *src {
                Source::Angle(k) if k < file.k => 1,
                Source::Layer(j) if j < i => layers[j].out_dim(),
                _ => {
                    return Err(Error::Format(format!(
                        "checkpoint layer {i}: input {src:?} is out of range"
                    )))
                }
            };
        }
        if expected_cols != l.cols || l.bias.len() != l.rows {
            return Err(Error::Format(format!("checkpoint layer {i}: inconsistent shapes")));
        }
        let weight = Array2::from_shape_vec((l.rows, l.cols), l.weight)
            .map_err(|e| Error::Format(format!("checkpoint layer {i}: {e}")))?;
        layers.push(Dense {
            inputs: l.inputs,
            weight,
            bias: Array1::from(l.bias),
            activation: l.activation,
        });
    }
    if layers.last().map(|l| l.out_dim()) != Some(1) {
        return Err(Error::Format("checkpoint head must have one output".into()));
    }
    Ok(FieldParams {
        config: file.config,
        dof: file.k,
        layers,
        log_scale: file.log_scale,
        scene_id: file.scene_id,
        seed: file.seed,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<FieldParams> {
    parse_checkpoint(&read_text(path)?)
}

/// Loads a checkpoint and checks that it was trained for `model`'s joint count.
pub fn load_checkpoint_for(path: &Path, model: &RobotModel) -> Result<FieldParams> {
    let params = load_checkpoint(path)?;
    params.check_model(model)?;
    Ok(params)
}

// -------------------------------------------------------------------- CSV

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Format(format!("csv: {e}"));
    w.write_record(header).map_err(to_err)?;
    for r in rows {
        w.write_record(&r).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(format!("csv: {e}")))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub const METRICS_COLUMNS: [&str; 5] = ["step", "bce", "eikonal", "accuracy", "grad_norm"];

pub fn metrics_csv(metrics: &[MetricsReport]) -> Result<Vec<u8>> {
    let header: Vec<String> = METRICS_COLUMNS.iter().map(|s| s.to_string()).collect();
    csv_bytes(
        &header,
        metrics.iter().map(|m| {
            vec![
                m.step.to_string(),
                fmt(m.bce),
                fmt(m.mean_eikonal),
                fmt(m.accuracy),
                fmt(m.mean_grad_norm),
            ]
        }),
    )
}

pub fn parse_metrics_csv(bytes: &[u8]) -> Result<Vec<MetricsReport>> {
    let mut r = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(format!("metrics csv: {e}")))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("metrics csv: bad column {i}")))
        };
        out.push(MetricsReport {
            step: num(0)? as usize,
            bce: num(1)?,
            mean_eikonal: num(2)?,
            accuracy: num(3)?,
            mean_grad_norm: num(4)?,
        });
    }
    Ok(out)
}

/// `iter, g, grad_norm, theta_1..theta_K`.
pub fn trace_csv(trace: &OptimTrace) -> Result<Vec<u8>> {
    let k = trace.steps.first().map_or(0, |s| s.pose.len());
    let mut header: Vec<String> = ["iter", "g", "grad_norm"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=k).map(|i| format!("theta_{i}")));
    csv_bytes(
        &header,
        trace.steps.iter().map(|s| {
            let mut row = vec![s.iteration.to_string(), fmt(s.g), fmt(s.grad_norm)];
            row.extend(s.pose.0.iter().map(|v| fmt(*v)));
            row
        }),
    )
}

/// Rows of a trace CSV as `(iter, g, grad_norm, theta)`.
pub fn parse_trace_csv(bytes: &[u8]) -> Result<Vec<(usize, f64, f64, Vec<f64>)>> {
    let mut r = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(format!("trace csv: {e}")))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("trace csv: {e}")))?;
        if vals.len() < 3 {
            return Err(Error::Format("trace csv: too few columns".into()));
        }
        out.push((vals[0] as usize, vals[1], vals[2], vals[3..].to_vec()));
    }
    Ok(out)
}

pub fn sweep_csv(swept: &str, rows: &[SweepRow]) -> Result<Vec<u8>> {
    let header: Vec<String> = [
        swept,
        "iters",
        "time",
        "delta_theta",
        "before",
        "after",
        "collision_rate",
        "converged",
    ]
        .iter()
        .map(|s| s.to_string())
        .collect();
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            vec![
                fmt(r.value),
                fmt(r.mean_iters),
                fmt(r.mean_time_secs),
                fmt(r.mean_move_angle),
                fmt(r.pairs_before),
                fmt(r.pairs_after),
                fmt(r.collision_rate_after),
                fmt(r.converged_rate),
            ]
        }),
    )
}

pub fn parse_sweep_csv(bytes: &[u8]) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(format!("sweep csv: {e}")))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("sweep csv: {e}")))?;
        if v.len() != 8 {
            return Err(Error::Format("sweep csv: expected 8 columns".into()));
        }
        out.push(SweepRow {
            value: v[0],
            mean_iters: v[1],
            mean_time_secs: v[2],
            mean_move_angle: v[3],
            pairs_before: v[4],
            pairs_after: v[5],
            collision_rate_after: v[6],
            converged_rate: v[7],
        });
    }
    Ok(out)
}

/// Pose lists: a JSON array of angle arrays.
pub fn parse_poses(text: &str) -> Result<Vec<Pose>> {
    serde_json::from_str(text).map_err(|e| json_error("poses", e))
}

pub fn poses_to_json(poses: &[Pose]) -> Result<String> {
    Ok(serde_json::to_string(poses)? + "\n")
}

// --------------------------------------------------------------- manifests

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<InputHash> {
    let bytes = fs::read(path)?;
    Ok(InputHash {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Outputs staged in memory and written together, so a failing command
/// leaves nothing behind.
#[derive(Debug, Default)]
pub struct StagedOutputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl StagedOutputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.into(), bytes.into()));
    }

    pub fn paths(&self) -> Vec<String> {
        self.files.iter().map(|(p, _)| p.display().to_string()).collect()
    }

    /// Writes every file through a temporary sibling and a rename.
    pub fn commit(self) -> Result<()> {
        let mut done: Vec<PathBuf> = Vec::new();
        let result = (|| -> Result<()> {
            for (path, bytes) in &self.files {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                let tmp = path.with_extension("partial");
                let mut f = fs::File::create(&tmp)?;
                f.write_all(bytes)?;
                f.sync_all()?;
                fs::rename(&tmp, path)?;
                done.push(path.clone());
            }
            Ok(())
        })();
        if result.is_err() {
            for p in done {
                let _ = fs::remove_file(p);
            }
        }
        result
    }
}
