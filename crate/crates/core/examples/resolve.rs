//! Pushes collided poses out of collision by descending the learned field.
//! Optional argument: a planar-arm checkpoint.

mod common;

use collision_field::collision::detect_collisions;
use collision_field::field::NeuralField;
use collision_field::optim::{resolve_poses, ResolveConfig};
use collision_field::sampler::collided_poses;
use collision_field::scenes;

fn main() {
    let params = common::field_for_planar_arm();
    let scene = scenes::planar_arm_4();
    let field = NeuralField::new(&params, &scene.robot).unwrap();
    let poses = collided_poses(&scene, 20, 99, 100_000).unwrap();
    let cfg = ResolveConfig::default();
    let traces = resolve_poses(&field, &scene.robot.limits(), &poses, &cfg).unwrap();
    let mut freed = 0;
    for (i, t) in traces.iter().enumerate() {
        let after = detect_collisions(&scene, t.final_pose()).unwrap();
        freed += usize::from(!after.collided);
        println!(
            "pose {i:2}: {:4} iters, g {:+.3} -> {:+.3}, moved {:.3} rad, collided after: {}",
            t.iterations,
            t.steps[0].g,
            t.final_g(),
            t.move_angle,
            after.collided
        );
    }
    println!("{freed}/{} poses collision-free after resolution", poses.len());
}
