//! Bends a straight joint-space path around obstacles while keeping it short.
//! Optional argument: a planar-arm checkpoint.

mod common;

use collision_field::collision::detect_collisions;
use collision_field::field::{CollisionField, NeuralField};
use collision_field::kinematics::{interpolate_poses, Pose};
use collision_field::optim::{optimize_trajectory, TrajConfig};
use collision_field::sampler::uniform_poses;
use collision_field::scenes;

fn main() {
    let params = common::field_for_planar_arm();
    let scene = scenes::planar_arm_4();
    let field = NeuralField::new(&params, &scene.robot).unwrap();
    let cfg = TrajConfig {
        l_thres: -0.05,
        ..TrajConfig::default()
    };
    let hits = |path: &[Pose]| path.iter().filter(|p| detect_collisions(&scene, p).unwrap().collided).count();
    // Endpoints must be free with margin; the straight line between them must not be.
    let safe = |p: &Pose| !detect_collisions(&scene, p).unwrap().collided && field.evaluate(p).unwrap().g <= cfg.l_thres;
    let candidates: Vec<Pose> = uniform_poses(&scene.robot, 400, 5).into_iter().filter(|p| safe(p)).collect();
    let (start, end, straight) = candidates
        .windows(2)
        .find_map(|w| {
            let path = interpolate_poses(&w[0], &w[1], 100).unwrap();
            (hits(&path) > 10).then(|| (w[0].clone(), w[1].clone(), path))
        })
        .expect("some pair is blocked");
    println!("start {:.2?}\nend   {:.2?}", start.angles(), end.angles());
    println!("straight path: {} of 100 waypoints collide", hits(&straight));

    let (path, trace) = optimize_trajectory(&field, &scene.robot.limits(), &straight, &cfg).unwrap();
    println!(
        "optimized in {} iterations (converged {}), {} of 100 waypoints collide",
        trace.iterations,
        trace.converged,
        hits(&path)
    );
    let length = |p: &[Pose]| p.windows(2).map(|w| w[0].distance(&w[1])).sum::<f64>();
    println!("path length {:.3} -> {:.3} rad", length(&straight), length(&path));
}
