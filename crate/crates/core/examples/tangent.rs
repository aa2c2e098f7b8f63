//! Slides along a level set of the field toward a goal pose. A goal off the
//! level set is approached only as far as the level set allows.
//! Optional argument: a planar-arm checkpoint.

mod common;

use collision_field::field::{CollisionField, NeuralField, RadialField};
use collision_field::kinematics::{JointLimits, Pose};
use collision_field::optim::{tangent_descent, TangentConfig};
use collision_field::scenes;

fn report(name: &str, field: &impl CollisionField, limits: &[JointLimits], start: &Pose, end: &Pose) {
    let cfg = TangentConfig {
        delta: 0.005,
        max_iters: 2000,
        tolerance: 0.05,
    };
    let t = tangent_descent(field, limits, start, end, &cfg).unwrap();
    let g: Vec<f64> = t.steps.iter().map(|s| s.g).collect();
    let drift = g.iter().map(|v| (v - g[0]).abs()).fold(0.0, f64::max);
    let worst_dot = t
        .steps
        .iter()
        .filter_map(|s| s.projection_dot)
        .map(f64::abs)
        .fold(0.0, f64::max);
    let gap: f64 = t.final_pose().0.iter().zip(end.angles()).map(|(a, b)| (a - b).abs()).sum();
    println!(
        "{name}: {} iters, converged {}, L1 gap to goal {gap:.3}, g drift {:.2e}, max |step·∇g| {:.1e}",
        t.iterations, t.converged, drift, worst_dot
    );
}

fn main() {
    // On the unit circle the level set is known exactly.
    let circle = RadialField::unit(2);
    let limits = vec![JointLimits::new(-3.0, 3.0).unwrap(); 2];
    report("unit circle", &circle, &limits, &Pose(vec![1.0, 0.0]), &Pose(vec![0.0, 1.0]));

    let params = common::field_for_planar_arm();
    let scene = scenes::planar_arm_4();
    let field = NeuralField::new(&params, &scene.robot).unwrap();
    let limits = scene.robot.limits();
    report(
        "planar arm",
        &field,
        &limits,
        &Pose(vec![-0.4, -0.6, 0.3, 0.1]),
        &Pose(vec![-0.9, 0.1, 0.5, 0.0]),
    );
}
