//! Compares training variants on one dataset: encoder, regularizer, scale,
//! and the distance-regression head.

use collision_field::field::{EncoderKind, FieldConfig};
use collision_field::sampler::{generate_dataset, ndf_distance_labels, SamplerConfig};
use collision_field::scenes;
use collision_field::train::{train, train_ndf_baseline, Regularizer, ScaleMode, TrainConfig};

fn main() {
    let scene = scenes::planar_arm_4();
    let data = generate_dataset(&scene, scenes::PLANAR_ARM_4, &SamplerConfig::new(8000, 0.05, 7)).unwrap();
    let base = TrainConfig {
        iterations: 2000,
        batch_size: 256,
        eval_every: 2000,
        seed: 1,
        field: FieldConfig {
            trunk_width: 64,
            ..FieldConfig::default()
        },
        ..TrainConfig::default()
    };
    let variants = [
        ("hierarchical + eikonal", base),
        (
            "flattened encoder",
            TrainConfig {
                field: FieldConfig {
                    encoder: EncoderKind::Flattened,
                    ..base.field
                },
                ..base
            },
        ),
        (
            "no eikonal",
            TrainConfig {
                regularizer: Regularizer::None,
                ..base
            },
        ),
        (
            "fixed s = 1",
            TrainConfig {
                scale: ScaleMode::FixedOne,
                ..base
            },
        ),
    ];
    println!("{:24} accuracy  eikonal  |dg/dθ|  s", "variant");
    for (name, cfg) in variants {
        let out = train(&data, &scene.robot, &cfg).unwrap();
        let m = out.metrics.last().unwrap();
        println!(
            "{name:24} {:.4}    {:.4}   {:.3}    {:.2}",
            m.accuracy,
            m.mean_eikonal,
            m.mean_grad_norm,
            out.params.scale()
        );
    }
    let labeled = ndf_distance_labels(&data, 1).unwrap();
    let (_, m) = train_ndf_baseline(&labeled, &scene.robot, &base).unwrap();
    println!("{:24} {:.4}", "distance regression", m.accuracy);
}
