//! Balanced labeled pose datasets drawn from the geometric oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collision::{detect_collisions, Scene};
use crate::error::{Error, Result};
use crate::kinematics::{JointLimits, Pose, RobotModel};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPose {
    pub pose: Pose,
    /// `true` when the oracle reports a collision.
    pub collided: bool,
    pub pair_count: usize,
    /// Signed joint-space distance to the nearest opposite-class sample.
    pub ndf_distance: Option<f64>,
}

impl LabeledPose {
    pub fn label(&self) -> f64 {
        if self.collided {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledPose>,
    pub scene_id: String,
    pub seed: u64,
    pub dof: usize,
}

impl Dataset {
    /// `(n_free, n_collided)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let collided = self.samples.iter().filter(|s| s.collided).count();
        (self.samples.len() - collided, collided)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n: usize,
    /// Allowed `|n_free - n_collided| / n`.
    pub balance_tol: f64,
    pub seed: u64,
    /// Total draw budget as a multiple of `n`.
    pub budget_factor: usize,
}

impl SamplerConfig {
    pub fn new(n: usize, balance_tol: f64, seed: u64) -> Self {
        SamplerConfig {
            n,
            balance_tol,
            seed,
            budget_factor: 100,
        }
    }
}

pub fn sample_uniform_pose<R: Rng + ?Sized>(limits: &[JointLimits], rng: &mut R) -> Pose {
    Pose(limits.iter().map(|l| rng.gen_range(l.lo..=l.hi)).collect())
}

/// Uniform pose stream over the joint limits of `model`, reproducible from `seed`.
pub fn uniform_poses(model: &RobotModel, n: usize, seed: u64) -> Vec<Pose> {
    let limits = model.limits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_uniform_pose(&limits, &mut rng)).collect()
}

/// Uniform draws kept only when the oracle reports a collision.
pub fn collided_poses(scene: &Scene, n: usize, seed: u64, max_draws: usize) -> Result<Vec<Pose>> {
    let limits = scene.robot.limits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut draws = 0;
    while out.len() < n {
        if draws == max_draws {
            return Err(Error::DegenerateScene {
                missing: "collided",
                draws,
            });
        }
        let p = sample_uniform_pose(&limits, &mut rng);
        if detect_collisions(scene, &p)?.collided {
            out.push(p);
        }
        draws += 1;
    }
    Ok(out)
}

fn label(scene: &Scene, pose: Pose) -> Result<LabeledPose> {
    let report = detect_collisions(scene, &pose)?;
    Ok(LabeledPose {
        pose,
        collided: report.collided,
        pair_count: report.pair_count,
        ndf_distance: None,
    })
}

/// Draws `n` uniform poses, then keeps drawing and swaps in minority-class
/// samples (replacing the most recent majority draw) until the classes are
/// balanced within `balance_tol * n`. Output is ordered by draw index.
pub fn generate_dataset(scene: &Scene, scene_id: &str, cfg: &SamplerConfig) -> Result<Dataset> {
    if cfg.n < 2 {
        return Err(Error::InvalidConfig("dataset needs n >= 2".into()));
    }
    if !(0.0..=1.0).contains(&cfg.balance_tol) {
        return Err(Error::InvalidConfig("balance_tol must be in [0, 1]".into()));
    }
    let limits = scene.robot.limits();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let budget = cfg.budget_factor.max(1) * cfg.n;

    // (draw index, sample) per class.
    let mut free: Vec<(usize, LabeledPose)> = Vec::new();
    let mut hit: Vec<(usize, LabeledPose)> = Vec::new();
    let mut draws = 0usize;
    while draws < cfg.n {
        let s = label(scene, sample_uniform_pose(&limits, &mut rng))?;
        if s.collided { &mut hit } else { &mut free }.push((draws, s));
        draws += 1;
    }

    let allowed = (cfg.balance_tol * cfg.n as f64).floor() as usize;
    while free.len().abs_diff(hit.len()) > allowed {
        if draws >= budget {
            if free.is_empty() || hit.is_empty() {
                return Err(Error::DegenerateScene {
                    missing: if free.is_empty() { "collision-free" } else { "collided" },
                    draws,
                });
            }
            return Err(Error::Unbalanced {
                draws,
                n_free: free.len(),
                n_collide: hit.len(),
            });
        }
        let s = label(scene, sample_uniform_pose(&limits, &mut rng))?;
        let minority_is_hit = hit.len() < free.len();
        if s.collided == minority_is_hit {
            let (minority, majority) = if minority_is_hit {
                (&mut hit, &mut free)
            } else {
                (&mut free, &mut hit)
            };
            majority.pop();
            minority.push((draws, s));
        }
        draws += 1;
    }

    let mut all: Vec<(usize, LabeledPose)> = free.into_iter().chain(hit).collect();
    all.sort_by_key(|(i, _)| *i);
    Ok(Dataset {
        samples: all.into_iter().map(|(_, s)| s).collect(),
        scene_id: scene_id.to_string(),
        seed: cfg.seed,
        dof: scene.robot.dof(),
    })
}

/// Fills `ndf_distance` with the mean L2 distance to the `k` nearest
/// opposite-class samples, positive for collided samples and negative for free ones.
pub fn ndf_distance_labels(dataset: &Dataset, k: usize) -> Result<Dataset> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let (n_free, n_hit) = dataset.class_counts();
    if n_free == 0 || n_hit == 0 {
        return Err(Error::InvalidConfig(
            "distance labels need both classes in the dataset".into(),
        ));
    }
    let free: Vec<&[f64]> = dataset
        .samples
        .iter()
        .filter(|s| !s.collided)
        .map(|s| s.pose.angles())
        .collect();
    let hit: Vec<&[f64]> = dataset
        .samples
        .iter()
        .filter(|s| s.collided)
        .map(|s| s.pose.angles())
        .collect();

    let mut out = dataset.clone();
    let mut nearest = Vec::with_capacity(k + 1);
    for s in &mut out.samples {
        let others = if s.collided { &free } else { &hit };
        let kk = k.min(others.len());
        nearest.clear();
        for o in others {
            let d2: f64 = s
                .pose
                .angles()
                .iter()
                .zip(o.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if nearest.len() < kk || d2 < nearest[kk - 1] {
                let pos = nearest.partition_point(|&x| x <= d2);
                nearest.insert(pos, d2);
                nearest.truncate(kk);
            }
        }
        let mean = nearest.iter().map(|d| d.sqrt()).sum::<f64>() / kk as f64;
        s.ndf_distance = Some(if s.collided { mean } else { -mean });
    }
    Ok(out)
}
