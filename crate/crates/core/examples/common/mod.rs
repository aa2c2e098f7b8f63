//! Shared setup for the examples that need a trained field.

use std::path::Path;

use collision_field::field::{FieldConfig, FieldParams};
use collision_field::io;
use collision_field::sampler::{generate_dataset, SamplerConfig};
use collision_field::scenes;
use collision_field::train::{train, TrainConfig};

/// Loads the checkpoint named by the first CLI argument, or trains a small
/// planar-arm field (about a minute in release mode).
pub fn field_for_planar_arm() -> FieldParams {
    if let Some(path) = std::env::args().nth(1) {
        return io::load_checkpoint(Path::new(&path)).expect("readable checkpoint");
    }
    let scene = scenes::planar_arm_4();
    let data = generate_dataset(&scene, scenes::PLANAR_ARM_4, &SamplerConfig::new(8000, 0.05, 7))
        .expect("planar arm has both classes");
    let cfg = TrainConfig {
        iterations: 3000,
        batch_size: 256,
        eval_every: 1000,
        seed: 1,
        field: FieldConfig {
            trunk_width: 64,
            ..FieldConfig::default()
        },
        ..TrainConfig::default()
    };
    eprintln!("no checkpoint given, training a small field...");
    let out = train(&data, &scene.robot, &cfg).expect("training succeeds");
    let last = out.metrics.last().unwrap();
    eprintln!("held-out accuracy {:.3}, mean |dg/dθ| {:.3}", last.accuracy, last.mean_grad_norm);
    out.params
}
