use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use collision_field::kinematics::{
    forward_kinematics, interpolate_poses, Capsule, Joint, JointLimits, Link, Pose, RobotModel, Transform,
};

type Mat4 = [[f64; 4]; 4];

fn rodrigues(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let [x, y, z] = axis;
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

fn homogeneous(r: [[f64; 3]; 3], p: [f64; 3]) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&r[i]);
        m[i][3] = p[i];
    }
    m[3][3] = 1.0;
    m
}

fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

struct RandomTree {
    model: RobotModel,
    origins: Vec<Mat4>,
    axes: Vec<[f64; 3]>,
    parents: Vec<usize>,
}

fn random_tree(seed: u64, k: usize) -> RandomTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut joints = Vec::new();
    let mut origins = Vec::new();
    let mut axes = Vec::new();
    let mut parents = Vec::new();
    let mut links = vec![Link::default()];
    for j in 0..k {
        let parent = rng.gen_range(0..=j);
        let rot = rodrigues(unit(&mut rng), rng.gen_range(-3.0..3.0));
        let xyz = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let axis = unit(&mut rng);
        let m = Matrix3::from_row_slice(&rot.concat());
        joints.push(Joint {
            parent_link: parent,
            origin: Transform::new(m, Vector3::from(xyz)).unwrap(),
            axis: Vector3::from(axis),
            limits: JointLimits::new(-3.0, 3.0).unwrap(),
        });
        origins.push(homogeneous(rot, xyz));
        axes.push(axis);
        parents.push(parent);
        links.push(Link {
            capsules: vec![Capsule {
                p0: Vector3::zeros(),
                p1: Vector3::new(0.3, 0.0, 0.0),
                radius: 0.05,
            }],
        });
    }
    RandomTree {
        model: RobotModel::new(joints, links).unwrap(),
        origins,
        axes,
        parents,
    }
}

#[test]
fn fk_matches_homogeneous_matrix_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let tree = random_tree(seed, 6);
        let pose = Pose((0..6).map(|_| rng.gen_range(-3.0..3.0)).collect());
        let frames = forward_kinematics(&tree.model, &pose).unwrap();
        let mut oracle: Vec<Mat4> = vec![homogeneous(rodrigues([0.0, 0.0, 1.0], 0.0), [0.0; 3])];
        for j in 0..6 {
            let joint = homogeneous(rodrigues(tree.axes[j], pose.0[j]), [0.0; 3]);
            let m = matmul(&matmul(&oracle[tree.parents[j]], &tree.origins[j]), &joint);
            oracle.push(m);
        }
        for (f, m) in frames.iter().zip(&oracle) {
            for i in 0..3 {
                for c in 0..3 {
                    worst = worst.max((f.rotation[(i, c)] - m[i][c]).abs());
                }
                worst = worst.max((f.translation[i] - m[i][3]).abs());
            }
            assert!(f.is_rigid(1e-9));
        }
    }
    assert!(worst < 1e-9, "max abs error {worst}");
}

proptest! {
    #[test]
    fn base_rotation_is_equivariant(seed in 0u64..1000, angle in -3.0f64..3.0, ax in 0usize..3,
                                    pose in proptest::collection::vec(-3.0f64..3.0, 5)) {
        let tree = random_tree(seed, 5);
        let mut axis = Vector3::zeros();
        axis[ax] = 1.0;
        let r = Transform::from_axis_angle(&axis, angle);
        let rotated = tree.model.with_base_rotation(&r);
        let pose = Pose(pose);
        let a = forward_kinematics(&tree.model, &pose).unwrap();
        let b = forward_kinematics(&rotated, &pose).unwrap();
        for (fa, fb) in a.iter().zip(&b).skip(1) {
            let expected = r.compose(fa);
            prop_assert!((expected.rotation - fb.rotation).abs().max() < 1e-9);
            prop_assert!((expected.translation - fb.translation).abs().max() < 1e-9);
        }
    }

    #[test]
    fn perturbing_a_joint_moves_only_descendants(seed in 0u64..1000, k in 0usize..6, delta in -1.0f64..1.0,
                                                 pose in proptest::collection::vec(-2.0f64..2.0, 6)) {
        let tree = random_tree(seed, 6);
        let pose = Pose(pose);
        let mut moved = pose.clone();
        moved.0[k] += delta;
        let a = forward_kinematics(&tree.model, &pose).unwrap();
        let b = forward_kinematics(&tree.model, &moved).unwrap();
        for link in 0..=6 {
            if !tree.model.is_ancestor_link(k + 1, link) {
                prop_assert_eq!(a[link], b[link]);
            }
        }
    }

    #[test]
    fn interpolation_is_monotone(start in proptest::collection::vec(-3.0f64..3.0, 4),
                                 end in proptest::collection::vec(-3.0f64..3.0, 4), n in 2usize..50) {
        let path = interpolate_poses(&Pose(start.clone()), &Pose(end.clone()), n).unwrap();
        prop_assert_eq!(path.len(), n);
        prop_assert_eq!(&path[0].0, &start);
        prop_assert_eq!(&path[n - 1].0, &end);
        for w in path.windows(2) {
            for j in 0..4 {
                let step = w[1].0[j] - w[0].0[j];
                prop_assert!(step * (end[j] - start[j]) >= 0.0);
            }
        }
    }
}
