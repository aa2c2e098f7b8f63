use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use collision_field::field::{evaluate_field, EncoderKind, FieldConfig, FieldParams, Source};
use collision_field::kinematics::{Pose, RobotModel};
use collision_field::sampler::{Dataset, LabeledPose};
use collision_field::scenes::planar_chain;
use collision_field::train::{
    evaluate_metrics, regression_loss, split_dataset, train, Regularizer, TrainConfig,
};

fn toy_model() -> RobotModel {
    planar_chain(2, 1.0, 0.1, 3.0)
}

fn small_field(encoder: EncoderKind) -> FieldConfig {
    FieldConfig {
        encoder,
        trunk_width: 32,
        trunk_depth: 2,
        ..FieldConfig::default()
    }
}

/// Poses labeled collided iff `θ_1 > 0`, kept at least `margin` from the boundary.
fn half_plane_dataset(n: usize, margin: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|i| {
            let side = if i % 2 == 0 { 1.0 } else { -1.0 };
            let a = side * rng.gen_range(margin..3.0);
            let b = rng.gen_range(-3.0..3.0);
            LabeledPose {
                pose: Pose(vec![a, b]),
                collided: a > 0.0,
                pair_count: usize::from(a > 0.0),
                ndf_distance: Some(a),
            }
        })
        .collect();
    Dataset {
        samples,
        scene_id: "toy".into(),
        seed,
        dof: 2,
    }
}

fn zero_all(params: &mut FieldParams) {
    for l in &mut params.layers {
        l.weight.fill(0.0);
        l.bias.fill(0.0);
    }
}

/// Rewires the network so `g = θ_1` exactly: one positive unit per layer
/// carries `x_1 + shift` and the head undoes the shift and normalization.
fn make_identity_field(params: &mut FieldParams, model: &RobotModel) {
    zero_all(params);
    let shift = 10.0;
    let lim = model.limits()[0];
    let widths: Vec<usize> = params.layers.iter().map(|l| l.out_dim()).collect();
    let n = params.layers.len();
    let mut carrier: Option<usize> = None;
    for l in 0..n {
        let layer = &mut params.layers[l];
        let mut col = 0;
        let mut hit = None;
        for src in &layer.inputs {
            match (*src, carrier) {
                (Source::Angle(0), None) => hit = Some(col),
                (Source::Layer(p), Some(c)) if p == c => hit = Some(col),
                _ => {}
            }
            col += match *src {
                Source::Angle(_) => 1,
                Source::Layer(p) => widths[p],
            };
        }
        let Some(c) = hit else { continue };
        if l == n - 1 {
            layer.weight[[0, c]] = lim.width() / 2.0;
            layer.bias[0] = lim.midpoint() - shift * lim.width() / 2.0;
        } else {
            layer.weight[[0, c]] = 1.0;
            if carrier.is_none() {
                layer.bias[0] = shift;
            }
            carrier = Some(l);
        }
    }
}

#[test]
fn zero_iterations_returns_initial_parameters() {
    let model = toy_model();
    let ds = half_plane_dataset(200, 0.1, 1);
    let cfg = TrainConfig {
        iterations: 0,
        seed: 5,
        field: small_field(EncoderKind::Hierarchical),
        ..TrainConfig::default()
    };
    let out = train(&ds, &model, &cfg).unwrap();
    let mut init = FieldParams::init(&model, cfg.field, 5).unwrap();
    init.scene_id = "toy".into();
    assert_eq!(out.params.flat_values(), init.flat_values());
    assert_eq!(out.params.log_scale, init.log_scale);
    assert_eq!(out.metrics.len(), 1);
    assert_eq!(out.metrics[0].step, 0);
}

#[test]
fn training_is_deterministic() {
    let model = toy_model();
    let ds = half_plane_dataset(300, 0.1, 2);
    let cfg = TrainConfig {
        iterations: 50,
        batch_size: 64,
        eval_every: 10,
        seed: 3,
        field: small_field(EncoderKind::Flattened),
        ..TrainConfig::default()
    };
    let a = train(&ds, &model, &cfg).unwrap();
    let b = train(&ds, &model, &cfg).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.metrics.iter().map(|m| m.step).collect::<Vec<_>>(), vec![10, 20, 30, 40, 50]);
}

#[test]
fn constant_positive_field_classifies_all_collided() {
    let model = toy_model();
    let mut params = FieldParams::init(&model, small_field(EncoderKind::Hierarchical), 0).unwrap();
    zero_all(&mut params);
    params.head_mut().bias[0] = 5.0;
    let ds = half_plane_dataset(200, 0.1, 4);
    let hits: Vec<_> = ds.samples.into_iter().filter(|s| s.collided).collect();
    let m = evaluate_metrics(&params, &model, &hits).unwrap();
    assert_eq!(m.accuracy, 1.0);
    assert_eq!(m.mean_grad_norm, 0.0);
    assert_eq!(m.mean_eikonal, 1.0);
}

#[test]
fn unit_slope_field_has_zero_eikonal() {
    let model = toy_model();
    for encoder in [EncoderKind::Flattened, EncoderKind::Hierarchical] {
        let mut params = FieldParams::init(&model, small_field(encoder), 0).unwrap();
        make_identity_field(&mut params, &model);
        let ds = half_plane_dataset(300, 0.0, 5);
        for s in &ds.samples {
            let e = evaluate_field(&params, &model, &s.pose).unwrap();
            assert!((e.g - s.pose.angles()[0]).abs() < 1e-12);
        }
        let m = evaluate_metrics(&params, &model, &ds.samples).unwrap();
        assert!((m.mean_grad_norm - 1.0).abs() < 1e-12);
        assert!(m.mean_eikonal < 1e-20);
        assert_eq!(m.accuracy, 1.0);
    }
}

#[test]
fn metrics_do_not_depend_on_chunking() {
    let model = toy_model();
    let params = FieldParams::init(&model, small_field(EncoderKind::Hierarchical), 9).unwrap();
    let ds = half_plane_dataset(5000, 0.0, 6);
    let a = evaluate_metrics(&params, &model, &ds.samples).unwrap();
    let b = evaluate_metrics(&params, &model, &ds.samples).unwrap();
    assert_eq!(a, b);
    let (mut correct, mut norm) = (0usize, 0.0);
    for s in &ds.samples {
        let e = evaluate_field(&params, &model, &s.pose).unwrap();
        correct += usize::from((e.f > 0.5) == s.collided);
        norm += e.grad_theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    assert_eq!(a.accuracy, correct as f64 / 5000.0);
    assert!((a.mean_grad_norm - norm / 5000.0).abs() < 1e-12);
}

#[test]
fn zero_predictor_regression_loss_is_mean_label_magnitude() {
    let model = toy_model();
    let mut params = FieldParams::init(&model, small_field(EncoderKind::Flattened), 0).unwrap();
    let head = params.head_mut();
    head.weight.fill(0.0);
    head.bias.fill(0.0);
    let ds = half_plane_dataset(100, 0.0, 7);
    let expected = ds.samples.iter().map(|s| s.ndf_distance.unwrap().abs()).sum::<f64>() / 100.0;
    let got = regression_loss(&params, &model, &ds.samples).unwrap();
    assert!((got - expected).abs() < 1e-12);
}

#[test]
fn split_is_seeded_and_disjoint() {
    let ds = half_plane_dataset(1000, 0.0, 8);
    let (train_a, held_a) = split_dataset(&ds, 0.1, 1);
    let (train_b, held_b) = split_dataset(&ds, 0.1, 1);
    assert_eq!(held_a, held_b);
    assert_eq!(train_a, train_b);
    assert_eq!(held_a.len(), 100);
    assert_eq!(train_a.len(), 900);
    for h in &held_a {
        assert!(!train_a.contains(h));
    }
    assert_ne!(split_dataset(&ds, 0.1, 2).1, held_a);
}

#[test]
fn separable_toy_is_learned_exactly() {
    let model = toy_model();
    let ds = half_plane_dataset(2000, 0.2, 10);
    let cfg = TrainConfig {
        iterations: 1500,
        batch_size: 128,
        eval_every: 500,
        seed: 1,
        field: small_field(EncoderKind::Hierarchical),
        ..TrainConfig::default()
    };
    let out = train(&ds, &model, &cfg).unwrap();
    let m = evaluate_metrics(&out.params, &model, &ds.samples).unwrap();
    assert_eq!(m.accuracy, 1.0, "{m:?}");
    let without = TrainConfig {
        regularizer: Regularizer::None,
        ..cfg
    };
    let out = train(&ds, &model, &without).unwrap();
    assert_eq!(evaluate_metrics(&out.params, &model, &ds.samples).unwrap().accuracy, 1.0);
}
