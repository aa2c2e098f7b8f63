//! Revolute joint chains and forward kinematics.
//!
//! Link 0 is the fixed base. Joint `k` (0-based) articulates link `k + 1`
//! and hangs off link `parent`, where `parent <= k`. Joint angles are bounded
//! reals; limits never span more than a full turn, so no wraparound occurs.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Rigid transform stored as a rotation matrix plus translation (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Transform {
    pub fn identity() -> Self {
        Transform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let t = Transform {
            rotation,
            translation,
        };
        if !t.is_rigid(ORTHONORMAL_TOL) {
            return Err(Error::InvalidModel(
                "rotation is not orthonormal with determinant +1".into(),
            ));
        }
        Ok(t)
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Transform {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Pure rotation of `angle` radians about a unit `axis`.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_unchecked(*axis), angle);
        Transform {
            rotation: rot.into_inner(),
            translation: Vector3::zeros(),
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn is_rigid(&self, tol: f64) -> bool {
        let r = &self.rotation;
        let gram = r.transpose() * r - Matrix3::identity();
        gram.iter().all(|v| v.abs() <= tol) && (r.determinant() - 1.0).abs() <= tol
    }
}

/// Closed joint interval in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub lo: f64,
    pub hi: f64,
}

impl JointLimits {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidModel(format!("limits [{lo}, {hi}] require lo < hi")));
        }
        if hi - lo > 2.0 * std::f64::consts::PI + 1e-12 {
            return Err(Error::InvalidModel(format!(
                "limits [{lo}, {hi}] span more than a full turn"
            )));
        }
        Ok(JointLimits { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Capsule in a link's local frame: a segment swept by a sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub p0: Vector3<f64>,
    pub p1: Vector3<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Link {
    pub capsules: Vec<Capsule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    /// Index of the link this joint is mounted on (0 = base).
    pub parent_link: usize,
    /// Fixed placement of the joint frame in the parent link frame.
    pub origin: Transform,
    /// Unit rotation axis in the joint frame.
    pub axis: Vector3<f64>,
    pub limits: JointLimits,
}

/// A tree of revolute joints with capsule geometry on each link.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    joints: Vec<Joint>,
    links: Vec<Link>,
}

impl RobotModel {
    /// `links` must hold `joints.len() + 1` entries, base first.
    pub fn new(joints: Vec<Joint>, links: Vec<Link>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::InvalidModel("robot needs at least one joint".into()));
        }
        if links.len() != joints.len() + 1 {
            return Err(Error::InvalidModel(format!(
                "{} joints need {} links (base first), got {}",
                joints.len(),
                joints.len() + 1,
                links.len()
            )));
        }
        for (k, joint) in joints.iter().enumerate() {
            if joint.parent_link > k {
                return Err(Error::InvalidModel(format!(
                    "joint {} mounts on link {} which is not an earlier link",
                    k + 1,
                    joint.parent_link
                )));
            }
            if (joint.axis.norm() - 1.0).abs() > ORTHONORMAL_TOL {
                return Err(Error::InvalidModel(format!(
                    "joint {} axis is not unit length",
                    k + 1
                )));
            }
            if !joint.origin.is_rigid(ORTHONORMAL_TOL) {
                return Err(Error::InvalidModel(format!(
                    "joint {} origin rotation is not a proper rotation",
                    k + 1
                )));
            }
            JointLimits::new(joint.limits.lo, joint.limits.hi)?;
        }
        for (i, link) in links.iter().enumerate() {
            for c in &link.capsules {
                if !(c.radius > 0.0 && c.radius.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "link {i} has a capsule with non-positive radius"
                    )));
                }
            }
        }
        Ok(RobotModel { joints, links })
    }

    /// Number of joints K.
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn limits(&self) -> Vec<JointLimits> {
        self.joints.iter().map(|j| j.limits).collect()
    }

    /// Parent joint of joint `k`, or `None` when it is mounted on the base.
    pub fn parent_joint(&self, k: usize) -> Option<usize> {
        self.joints[k].parent_link.checked_sub(1)
    }

    /// Parent link of link `i`, `None` for the base.
    pub fn parent_link(&self, link: usize) -> Option<usize> {
        link.checked_sub(1).map(|k| self.joints[k].parent_link)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.parent_link(a) == Some(b) || self.parent_link(b) == Some(a)
    }

    /// True when link `a` lies on the chain from the base to link `b` (or equals it).
    pub fn is_ancestor_link(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(l) = cur {
            if l == a {
                return true;
            }
            cur = self.parent_link(l);
        }
        false
    }

    /// Same model with `rotation` pre-applied to every joint mounted on the base.
    pub fn with_base_rotation(&self, rotation: &Transform) -> RobotModel {
        let mut out = self.clone();
        for j in out.joints.iter_mut().filter(|j| j.parent_link == 0) {
            j.origin = rotation.compose(&j.origin);
        }
        out.links[0].capsules = self.links[0]
            .capsules
            .iter()
            .map(|c| Capsule {
                p0: rotation.apply(&c.p0),
                p1: rotation.apply(&c.p1),
                radius: c.radius,
            })
            .collect();
        out
    }
}

/// Joint angles in radians, one per joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pose(pub Vec<f64>);

impl Pose {
    pub fn new(angles: Vec<f64>) -> Self {
        Pose(angles)
    }

    pub fn zeros(k: usize) -> Self {
        Pose(vec![0.0; k])
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Vec<f64>> for Pose {
    fn from(v: Vec<f64>) -> Self {
        Pose(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    Reject,
    Clamp,
}

fn check_shape(model: &RobotModel, pose: &Pose) -> Result<()> {
    if pose.len() != model.dof() {
        return Err(Error::DimensionMismatch {
            expected: model.dof(),
            got: pose.len(),
        });
    }
    if let Some(k) = pose.0.iter().position(|a| !a.is_finite()) {
        return Err(Error::NonFinite(format!("angle of joint {}", k + 1)));
    }
    Ok(())
}

pub fn validate_pose(model: &RobotModel, pose: &Pose, mode: LimitMode) -> Result<Pose> {
    check_shape(model, pose)?;
    match mode {
        LimitMode::Reject => {
            for (k, (a, j)) in pose.0.iter().zip(model.joints()).enumerate() {
                if !j.limits.contains(*a) {
                    return Err(Error::JointLimit {
                        joint: k + 1,
                        value: *a,
                        lo: j.limits.lo,
                        hi: j.limits.hi,
                    });
                }
            }
            Ok(pose.clone())
        }
        LimitMode::Clamp => Ok(Pose(
            pose.0
                .iter()
                .zip(model.joints())
                .map(|(a, j)| j.limits.clamp(*a))
                .collect(),
        )),
    }
}

/// World-frame placement of every link, base (identity) first.
pub fn forward_kinematics(model: &RobotModel, pose: &Pose) -> Result<Vec<Transform>> {
    check_shape(model, pose)?;
    let mut frames = Vec::with_capacity(model.dof() + 1);
    frames.push(Transform::identity());
    for (joint, angle) in model.joints().iter().zip(&pose.0) {
        let parent = frames[joint.parent_link];
        let frame = parent
            .compose(&joint.origin)
            .compose(&Transform::from_axis_angle(&joint.axis, *angle));
        frames.push(frame);
    }
    Ok(frames)
}

/// `n` poses evenly spaced on the straight segment from `start` to `end`.
pub fn interpolate_poses(start: &Pose, end: &Pose, n: usize) -> Result<Vec<Pose>> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "interpolation needs at least 2 poses, got {n}"
        )));
    }
    if start.len() != end.len() {
        return Err(Error::DimensionMismatch {
            expected: start.len(),
            got: end.len(),
        });
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                return start.clone();
            }
            if i == n - 1 {
                return end.clone();
            }
            let t = i as f64 / last;
            Pose(
                start
                    .0
                    .iter()
                    .zip(&end.0)
                    .map(|(a, b)| (a + t * (b - a)).clamp(a.min(*b), a.max(*b)))
                    .collect(),
            )
        })
        .collect())
}
