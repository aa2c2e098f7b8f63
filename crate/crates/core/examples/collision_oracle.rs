//! Geometric collision checks and contact statistics over random poses.

use collision_field::collision::{collision_stats, detect_collisions};
use collision_field::kinematics::Pose;
use collision_field::sampler::uniform_poses;
use collision_field::scenes;

fn main() {
    for id in [scenes::PLANAR_ARM_4, scenes::SPATIAL_ARM_6] {
        let scene = scenes::builtin(id).unwrap();
        let home = Pose::zeros(scene.robot.dof());
        let r = detect_collisions(&scene, &home).unwrap();
        println!(
            "{id}: home pose collided={} pairs={} min separation {:.4}",
            r.collided, r.pair_count, r.min_separation
        );
        let poses = uniform_poses(&scene.robot, 5000, 1);
        let stats = collision_stats(&scene, &poses).unwrap();
        println!(
            "  5000 uniform poses: {:.1}% collided, {:.3} contact pairs per pose",
            100.0 * stats.collision_rate,
            stats.mean_pair_count
        );
    }
}
