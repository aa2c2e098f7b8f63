//! Link frames of the spatial arm at a few poses.

use collision_field::kinematics::{forward_kinematics, interpolate_poses, Pose};
use collision_field::scenes;

fn main() {
    let scene = scenes::spatial_arm_6();
    let robot = &scene.robot;
    let home = Pose::zeros(robot.dof());
    let bent = Pose(vec![0.5, -0.8, 1.2, 0.3, -0.6, 0.0]);
    for (i, pose) in interpolate_poses(&home, &bent, 3).unwrap().iter().enumerate() {
        let frames = forward_kinematics(robot, pose).unwrap();
        let tip = frames.last().unwrap().translation;
        println!("pose {i} {:?}", pose.angles());
        println!("  last link origin at ({:.3}, {:.3}, {:.3})", tip.x, tip.y, tip.z);
    }
    for (k, j) in robot.joints().iter().enumerate() {
        println!("joint {} on link {}, limits [{:.2}, {:.2}]", k + 1, j.parent_link, j.limits.lo, j.limits.hi);
    }
}
