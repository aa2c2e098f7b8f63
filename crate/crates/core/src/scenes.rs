//! Built-in robots and scenes.
//!
//! `planar_arm_4` and `spatial_arm_6` are also shipped as JSON under
//! `scenes/` and are the reference setups for the acceptance suite.

use nalgebra::Vector3;

use crate::collision::{Obstacle, Scene};
use crate::kinematics::{Capsule, Joint, JointLimits, Link, RobotModel, Transform};

pub const PLANAR_ARM_4: &str = "planar_arm_4";
pub const SPATIAL_ARM_6: &str = "spatial_arm_6";

fn capsule_along_x(len: f64, radius: f64) -> Capsule {
    Capsule {
        p0: Vector3::zeros(),
        p1: Vector3::new(len, 0.0, 0.0),
        radius,
    }
}

fn joint(parent_link: usize, xyz: [f64; 3], axis: Vector3<f64>, lo: f64, hi: f64) -> Joint {
    Joint {
        parent_link,
        origin: Transform::from_translation(Vector3::from(xyz)),
        axis,
        limits: JointLimits::new(lo, hi).expect("built-in limits are valid"),
    }
}

/// Serial chain of `n` links of length `link_len` rotating about `z`, the
/// first joint at the origin. The base has no geometry.
pub fn planar_chain(n: usize, link_len: f64, radius: f64, limit: f64) -> RobotModel {
    let mut joints = Vec::with_capacity(n);
    let mut links = vec![Link::default()];
    for k in 0..n {
        let offset = if k == 0 { 0.0 } else { link_len };
        joints.push(joint(k, [offset, 0.0, 0.0], Vector3::z(), -limit, limit));
        links.push(Link {
            capsules: vec![capsule_along_x(link_len, radius)],
        });
    }
    RobotModel::new(joints, links).expect("planar chain is valid")
}

/// Four-joint arm moving in the x-z plane above a floor, with one spherical
/// block in its workspace.
pub fn planar_arm_4() -> Scene {
    let lengths = [0.45, 0.40, 0.35, 0.30];
    let mut joints = Vec::new();
    let mut links = vec![Link {
        capsules: vec![Capsule {
            p0: Vector3::new(0.0, 0.0, 0.1),
            p1: Vector3::new(0.0, 0.0, 0.3),
            radius: 0.06,
        }],
    }];
    for (k, len) in lengths.iter().enumerate() {
        let (origin, lo, hi) = if k == 0 {
            ([0.0, 0.0, 0.3], -2.8, 0.3)
        } else {
            ([lengths[k - 1], 0.0, 0.0], -2.6, 2.6)
        };
        joints.push(joint(k, origin, Vector3::y(), lo, hi));
        links.push(Link {
            capsules: vec![capsule_along_x(*len, 0.04)],
        });
    }
    let robot = RobotModel::new(joints, links).expect("planar arm is valid");
    let obstacles = vec![
        Obstacle::HalfSpace {
            normal: Vector3::z(),
            offset: 0.0,
        },
        Obstacle::Sphere {
            center: Vector3::new(0.75, 0.0, 0.45),
            radius: 0.15,
        },
    ];
    Scene::new(robot, obstacles, &[], 0.0).expect("planar scene is valid")
}

/// Six-joint spatial arm (yaw, shoulder, elbow, roll, wrist pitch, wrist roll)
/// over a floor with a spherical obstacle beside it.
pub fn spatial_arm_6() -> Scene {
    use std::f64::consts::PI;
    let links = vec![
        Link {
            capsules: vec![Capsule {
                p0: Vector3::new(0.0, 0.0, 0.1),
                p1: Vector3::new(0.0, 0.0, 0.3),
                radius: 0.07,
            }],
        },
        Link {
            capsules: vec![Capsule {
                p0: Vector3::zeros(),
                p1: Vector3::new(0.0, 0.0, 0.15),
                radius: 0.06,
            }],
        },
        Link {
            capsules: vec![capsule_along_x(0.4, 0.05)],
        },
        Link {
            capsules: vec![capsule_along_x(0.35, 0.045)],
        },
        Link {
            capsules: vec![capsule_along_x(0.1, 0.04)],
        },
        Link {
            capsules: vec![capsule_along_x(0.15, 0.035)],
        },
        Link {
            capsules: vec![capsule_along_x(0.08, 0.03)],
        },
    ];
    let joints = vec![
        joint(0, [0.0, 0.0, 0.3], Vector3::z(), -PI, PI),
        joint(1, [0.0, 0.0, 0.15], Vector3::y(), -2.6, 0.6),
        joint(2, [0.4, 0.0, 0.0], Vector3::y(), -2.6, 2.6),
        joint(3, [0.35, 0.0, 0.0], Vector3::x(), -PI, PI),
        joint(4, [0.1, 0.0, 0.0], Vector3::y(), -2.2, 2.2),
        joint(5, [0.15, 0.0, 0.0], Vector3::x(), -PI, PI),
    ];
    let robot = RobotModel::new(joints, links).expect("spatial arm is valid");
    let obstacles = vec![
        Obstacle::HalfSpace {
            normal: Vector3::z(),
            offset: 0.0,
        },
        Obstacle::Sphere {
            center: Vector3::new(0.45, 0.25, 0.35),
            radius: 0.15,
        },
    ];
    Scene::new(robot, obstacles, &[], 0.0).expect("spatial scene is valid")
}

/// Looks up a built-in scene by id.
pub fn builtin(id: &str) -> Option<Scene> {
    match id {
        PLANAR_ARM_4 => Some(planar_arm_4()),
        SPATIAL_ARM_6 => Some(spatial_arm_6()),
        _ => None,
    }
}
