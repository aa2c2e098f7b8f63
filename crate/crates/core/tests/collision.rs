use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use collision_field::collision::{
    collision_stats, detect_collisions, primitive_separation, Obstacle, Primitive, Scene,
};
use collision_field::kinematics::Pose;
use collision_field::sampler::uniform_poses;
use collision_field::scenes::{self, planar_chain};

fn point_segment_distance(p: Vector3<f64>, a: Vector3<f64>, b: Vector3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

fn random_point(rng: &mut ChaCha8Rng, r: f64) -> Vector3<f64> {
    Vector3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

#[test]
fn capsule_separation_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 10_000;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (p0, p1) = (random_point(&mut rng, 1.0), random_point(&mut rng, 1.0));
        let (q0, q1) = (random_point(&mut rng, 1.0), random_point(&mut rng, 1.0));
        let (ra, rb) = (rng.gen_range(0.01..0.3), rng.gen_range(0.01..0.3));
        let exact = primitive_separation(
            &Primitive::Capsule { p0, p1, radius: ra },
            &Primitive::Capsule { p0: q0, p1: q1, radius: rb },
        )
        .unwrap();
        let dense = (0..=samples)
            .map(|i| {
                let p = p0 + (p1 - p0) * (i as f64 / samples as f64);
                point_segment_distance(p, q0, q1)
            })
            .fold(f64::INFINITY, f64::min)
            - ra
            - rb;
        worst = worst.max((exact - dense).abs());
    }
    assert!(worst < 1e-3, "max deviation {worst}");
}

#[test]
fn two_link_grid_agrees_with_sampling_oracle() {
    let link = 1.0;
    let (r_link, r_obs) = (0.1, 0.3);
    let center = Vector3::new(1.2, 0.8, 0.0);
    let robot = planar_chain(2, link, r_link, PI);
    let scene = Scene::new(
        robot,
        vec![Obstacle::Sphere {
            center,
            radius: r_obs,
        }],
        &[],
        0.0,
    )
    .unwrap();
    let samples = 2000;
    let mut mismatches = 0;
    let mut collided = 0;
    for i in 0..360 {
        let a = -PI + i as f64 * PI / 180.0;
        for j in 0..360 {
            let b = -PI + j as f64 * PI / 180.0;
            let elbow = Vector3::new(link * a.cos(), link * a.sin(), 0.0);
            let tip = elbow + Vector3::new(link * (a + b).cos(), link * (a + b).sin(), 0.0);
            let mut nearest = f64::INFINITY;
            for s in 0..=samples {
                let t = s as f64 / samples as f64;
                nearest = nearest
                    .min((elbow * t - center).norm())
                    .min((elbow + (tip - elbow) * t - center).norm());
            }
            let margin = nearest - r_link - r_obs;
            let report = detect_collisions(&scene, &Pose(vec![a, b])).unwrap();
            collided += usize::from(margin < 0.0);
            // Sampling overestimates the distance by at most ~1e-7 here.
            if margin.abs() > 1e-6 && report.collided != (margin < 0.0) {
                mismatches += 1;
            }
        }
    }
    assert!(collided > 1000, "grid should contain collisions");
    assert_eq!(mismatches, 0);
}

#[test]
fn stats_match_independent_recount() {
    let scene = scenes::planar_arm_4();
    let poses = uniform_poses(&scene.robot, 1000, 5);
    let stats = collision_stats(&scene, &poses).unwrap();
    let mut pairs = 0usize;
    let mut hits = 0usize;
    for p in &poses {
        let r = detect_collisions(&scene, p).unwrap();
        pairs += r.pair_count;
        hits += usize::from(r.collided);
    }
    assert_eq!(stats.mean_pair_count, pairs as f64 / 1000.0);
    assert_eq!(stats.collision_rate, hits as f64 / 1000.0);
}

#[test]
fn detection_is_deterministic() {
    let scene = scenes::spatial_arm_6();
    for p in uniform_poses(&scene.robot, 200, 9) {
        assert_eq!(detect_collisions(&scene, &p).unwrap(), detect_collisions(&scene, &p).unwrap());
    }
}

#[test]
fn separation_is_lipschitz_in_pose() {
    let scene = scenes::planar_arm_4();
    // Every point of the arm is within 1.6 m of each joint axis.
    let lipschitz = 1.6;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in uniform_poses(&scene.robot, 300, 10) {
        let mut q = p.clone();
        let mut l1 = 0.0;
        for v in q.0.iter_mut() {
            let d = rng.gen_range(-1e-3..1e-3);
            *v += d;
            l1 += f64::abs(d);
        }
        let a = detect_collisions(&scene, &p).unwrap().min_separation;
        let b = detect_collisions(&scene, &q).unwrap().min_separation;
        assert!((a - b).abs() <= lipschitz * l1 + 1e-12);
    }
}

fn primitive(kind: u8, a: [f64; 3], b: [f64; 3], r: f64) -> Primitive {
    let (a, b) = (Vector3::from(a), Vector3::from(b));
    match kind {
        0 => Primitive::Sphere { center: a, radius: r },
        1 => Primitive::Capsule { p0: a, p1: b, radius: r },
        _ => {
            let n = if a.norm() > 1e-3 { a.normalize() } else { Vector3::z() };
            Primitive::HalfSpace { normal: n, offset: b.x }
        }
    }
}

fn shrink(p: Primitive, factor: f64) -> Primitive {
    match p {
        Primitive::Sphere { center, radius } => Primitive::Sphere {
            center,
            radius: radius * factor,
        },
        Primitive::Capsule { p0, p1, radius } => Primitive::Capsule {
            p0,
            p1,
            radius: radius * factor,
        },
        h => h,
    }
}

fn coord() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0f64..2.0)
}

proptest! {
    #[test]
    fn shrinking_a_radius_never_decreases_separation(
        ka in 0u8..2, kb in 0u8..3, a0 in coord(), a1 in coord(), b0 in coord(), b1 in coord(),
        ra in 0.01f64..0.5, rb in 0.01f64..0.5, factor in 0.0f64..1.0,
    ) {
        let pa = primitive(ka, a0, a1, ra);
        let pb = primitive(kb, b0, b1, rb);
        let base = primitive_separation(&pa, &pb).unwrap();
        prop_assert!(primitive_separation(&shrink(pa, factor), &pb).unwrap() >= base);
        prop_assert!(primitive_separation(&pa, &shrink(pb, factor)).unwrap() >= base);
    }
}
