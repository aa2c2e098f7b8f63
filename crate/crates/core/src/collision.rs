//! Geometric ground-truth collision checking.
//!
//! Every robot link carries capsules; the world carries spheres, capsules and
//! half-spaces. A pair of primitives is "in contact" when its separation is
//! strictly below the scene clearance, and the number of such pairs is the
//! collision-point count reported for a pose.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics, Pose, RobotModel};

/// Static obstacle in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    Sphere {
        center: Vector3<f64>,
        radius: f64,
    },
    Capsule {
        p0: Vector3<f64>,
        p1: Vector3<f64>,
        radius: f64,
    },
    /// Solid region `{p : normal · p <= offset}`.
    HalfSpace { normal: Vector3<f64>, offset: f64 },
}

impl Obstacle {
    pub fn validate(&self) -> Result<()> {
        match self {
            Obstacle::Sphere { radius, .. } | Obstacle::Capsule { radius, .. } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidScene("obstacle radius must be positive".into()));
                }
            }
            Obstacle::HalfSpace { normal, offset } => {
                if (normal.norm() - 1.0).abs() > 1e-9 || !offset.is_finite() {
                    return Err(Error::InvalidScene(
                        "half-space normal must have unit norm".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn primitive(&self) -> Primitive {
        match *self {
            Obstacle::Sphere { center, radius } => Primitive::Sphere { center, radius },
            Obstacle::Capsule { p0, p1, radius } => Primitive::Capsule { p0, p1, radius },
            Obstacle::HalfSpace { normal, offset } => Primitive::HalfSpace { normal, offset },
        }
    }
}

/// A primitive placed in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Sphere {
        center: Vector3<f64>,
        radius: f64,
    },
    Capsule {
        p0: Vector3<f64>,
        p1: Vector3<f64>,
        radius: f64,
    },
    HalfSpace {
        normal: Vector3<f64>,
        offset: f64,
    },
}

/// Closest distance between segments `[p0,p1]` and `[q0,q1]`.
pub fn segment_distance(
    p0: &Vector3<f64>,
    p1: &Vector3<f64>,
    q0: &Vector3<f64>,
    q1: &Vector3<f64>,
) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    const EPS: f64 = 1e-18;

    let (s, t) = if a <= EPS && e <= EPS {
        (0.0, 0.0)
    } else if a <= EPS {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > EPS {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    let cp = p0 + d1 * s;
    let cq = q0 + d2 * t;
    (cp - cq).norm()
}

fn point_segment_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    segment_distance(p, p, a, b)
}

/// Signed separation between two placed primitives (negative = penetration).
pub fn primitive_separation(a: &Primitive, b: &Primitive) -> Result<f64> {
    use Primitive::*;
    let sep = match (a, b) {
        (Sphere { center: c1, radius: r1 }, Sphere { center: c2, radius: r2 }) => {
            (c1 - c2).norm() - r1 - r2
        }
        (Sphere { center, radius: rs }, Capsule { p0, p1, radius: rc })
        | (Capsule { p0, p1, radius: rc }, Sphere { center, radius: rs }) => {
            point_segment_distance(center, p0, p1) - rs - rc
        }
        (
            Capsule {
                p0: a0,
                p1: a1,
                radius: ra,
            },
            Capsule {
                p0: b0,
                p1: b1,
                radius: rb,
            },
        ) => segment_distance(a0, a1, b0, b1) - ra - rb,
        (HalfSpace { normal, offset }, Sphere { center, radius })
        | (Sphere { center, radius }, HalfSpace { normal, offset }) => {
            normal.dot(center) - offset - radius
        }
        (HalfSpace { normal, offset }, Capsule { p0, p1, radius })
        | (Capsule { p0, p1, radius }, HalfSpace { normal, offset }) => {
            normal.dot(p0).min(normal.dot(p1)) - offset - radius
        }
        (HalfSpace { .. }, HalfSpace { .. }) => {
            return Err(Error::UnsupportedPair("half-space vs half-space".into()))
        }
    };
    Ok(sep)
}

/// Robot, static obstacles and the self-collision pair policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub robot: RobotModel,
    pub obstacles: Vec<Obstacle>,
    self_pairs: Vec<(usize, usize)>,
    pub clearance: f64,
}

impl Scene {
    /// Builds a scene whose self-collision pairs are all link pairs except
    /// parent/child neighbours and anything listed in `exclude`.
    pub fn new(
        robot: RobotModel,
        obstacles: Vec<Obstacle>,
        exclude: &[(usize, usize)],
        clearance: f64,
    ) -> Result<Self> {
        let n_links = robot.links().len();
        for &(i, j) in exclude {
            if i >= n_links || j >= n_links {
                return Err(Error::InvalidScene(format!(
                    "excluded pair ({i}, {j}) references a missing link"
                )));
            }
        }
        let excluded =
            |i: usize, j: usize| exclude.iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i));
        let mut pairs = Vec::new();
        for i in 0..n_links {
            for j in (i + 1)..n_links {
                if !robot.are_adjacent(i, j) && !excluded(i, j) {
                    pairs.push((i, j));
                }
            }
        }
        Scene::with_self_pairs(robot, obstacles, pairs, clearance)
    }

    pub fn with_self_pairs(
        robot: RobotModel,
        obstacles: Vec<Obstacle>,
        self_pairs: Vec<(usize, usize)>,
        clearance: f64,
    ) -> Result<Self> {
        if !(clearance >= 0.0 && clearance.is_finite()) {
            return Err(Error::InvalidScene("clearance must be >= 0".into()));
        }
        for o in &obstacles {
            o.validate()?;
        }
        let n_links = robot.links().len();
        for &(i, j) in &self_pairs {
            if i >= n_links || j >= n_links || i == j {
                return Err(Error::InvalidScene(format!("invalid self pair ({i}, {j})")));
            }
            if robot.are_adjacent(i, j) {
                return Err(Error::InvalidScene(format!(
                    "self pair ({i}, {j}) joins adjacent links"
                )));
            }
        }
        Ok(Scene {
            robot,
            obstacles,
            self_pairs,
            clearance,
        })
    }

    pub fn self_pairs(&self) -> &[(usize, usize)] {
        &self.self_pairs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionReport {
    pub collided: bool,
    /// Number of primitive pairs in contact.
    pub pair_count: usize,
    /// Most negative separation over all checked pairs (`+inf` if none were checked).
    pub min_separation: f64,
}

/// World-placed capsules of every link, indexed by link.
pub fn placed_capsules(model: &RobotModel, pose: &Pose) -> Result<Vec<Vec<Primitive>>> {
    let frames = forward_kinematics(model, pose)?;
    Ok(model
        .links()
        .iter()
        .zip(&frames)
        .map(|(link, frame)| {
            link.capsules
                .iter()
                .map(|c| Primitive::Capsule {
                    p0: frame.apply(&c.p0),
                    p1: frame.apply(&c.p1),
                    radius: c.radius,
                })
                .collect()
        })
        .collect())
}

pub fn detect_collisions(scene: &Scene, pose: &Pose) -> Result<CollisionReport> {
    let placed = placed_capsules(&scene.robot, pose)?;
    let obstacles: Vec<Primitive> = scene.obstacles.iter().map(Obstacle::primitive).collect();
    let mut pair_count = 0;
    let mut min_separation = f64::INFINITY;
    let mut record = |sep: f64| {
        if sep < scene.clearance {
            pair_count += 1;
        }
        min_separation = min_separation.min(sep);
    };
    for caps in &placed {
        for c in caps {
            for o in &obstacles {
                record(primitive_separation(c, o)?);
            }
        }
    }
    for &(i, j) in scene.self_pairs() {
        for a in &placed[i] {
            for b in &placed[j] {
                record(primitive_separation(a, b)?);
            }
        }
    }
    Ok(CollisionReport {
        collided: pair_count > 0,
        pair_count,
        min_separation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionStats {
    pub mean_pair_count: f64,
    pub collision_rate: f64,
}

pub fn collision_stats(scene: &Scene, poses: &[Pose]) -> Result<CollisionStats> {
    if poses.is_empty() {
        return Err(Error::Empty("collision_stats needs at least one pose"));
    }
    let mut pairs = 0usize;
    let mut collided = 0usize;
    for p in poses {
        let r = detect_collisions(scene, p)?;
        pairs += r.pair_count;
        collided += usize::from(r.collided);
    }
    Ok(stats_from_counts(pairs, collided, poses.len()))
}

pub(crate) fn stats_from_counts(pairs: usize, collided: usize, n: usize) -> CollisionStats {
    CollisionStats {
        mean_pair_count: pairs as f64 / n as f64,
        collision_rate: collided as f64 / n as f64,
    }
}
