use collision_field::collision::{detect_collisions, Scene};
use collision_field::sampler::{generate_dataset, ndf_distance_labels, uniform_poses, SamplerConfig};
use collision_field::scenes::{self, planar_chain};
use collision_field::Error;

#[test]
fn balanced_dataset_labels_agree_with_oracle() {
    let scene = scenes::planar_arm_4();
    let ds = generate_dataset(&scene, "planar_arm_4", &SamplerConfig::new(1000, 0.05, 11)).unwrap();
    assert_eq!(ds.len(), 1000);
    let (free, hit) = ds.class_counts();
    assert!(free.abs_diff(hit) <= 50, "{free} free vs {hit} collided");
    for s in &ds.samples {
        let r = detect_collisions(&scene, &s.pose).unwrap();
        assert_eq!(r.collided, s.collided);
        assert_eq!(r.pair_count, s.pair_count);
        for (v, l) in s.pose.angles().iter().zip(scene.robot.limits()) {
            assert!(l.contains(*v));
        }
    }
}

#[test]
fn scene_that_never_collides_is_degenerate() {
    // Two adjacent links and no obstacles: nothing can ever touch.
    let scene = Scene::new(planar_chain(2, 1.0, 0.1, 3.0), vec![], &[], 0.0).unwrap();
    let mut cfg = SamplerConfig::new(100, 0.05, 1);
    cfg.budget_factor = 5;
    match generate_dataset(&scene, "empty", &cfg) {
        Err(Error::DegenerateScene { missing, draws }) => {
            assert_eq!(missing, "collided");
            assert_eq!(draws, 500);
        }
        other => panic!("expected a degenerate scene error, got {other:?}"),
    }
}

#[test]
fn same_seed_same_dataset() {
    let scene = scenes::spatial_arm_6();
    let cfg = SamplerConfig::new(300, 0.05, 42);
    let a = generate_dataset(&scene, "s", &cfg).unwrap();
    let b = generate_dataset(&scene, "s", &cfg).unwrap();
    assert_eq!(a, b);
    let c = generate_dataset(&scene, "s", &SamplerConfig::new(300, 0.05, 43)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn nearest_neighbour_labels_match_brute_force() {
    let scene = scenes::planar_arm_4();
    let ds = generate_dataset(&scene, "p", &SamplerConfig::new(400, 0.05, 3)).unwrap();
    let labeled = ndf_distance_labels(&ds, 1).unwrap();
    for s in &labeled.samples {
        let best = ds
            .samples
            .iter()
            .filter(|o| o.collided != s.collided)
            .map(|o| s.pose.distance(&o.pose))
            .fold(f64::INFINITY, f64::min);
        let sign = if s.collided { 1.0 } else { -1.0 };
        let got = s.ndf_distance.unwrap();
        assert!((got - sign * best).abs() < 1e-12, "{got} vs {}", sign * best);
    }
}

#[test]
fn uniform_marginals_centre_on_limit_midpoints() {
    let scene = scenes::spatial_arm_6();
    let n = 20_000;
    let poses = uniform_poses(&scene.robot, n, 8);
    for (j, l) in scene.robot.limits().iter().enumerate() {
        let mean = poses.iter().map(|p| p.angles()[j]).sum::<f64>() / n as f64;
        let se = l.width() / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - l.midpoint()).abs() < 3.0 * se, "joint {j}: mean {mean}");
    }
}
