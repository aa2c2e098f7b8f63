//! Trains a collision field on the planar arm and prints the metric log.
//! Pass an output path to save the checkpoint.

use std::path::Path;

use collision_field::field::FieldConfig;
use collision_field::io;
use collision_field::sampler::{generate_dataset, SamplerConfig};
use collision_field::scenes;
use collision_field::train::{train, TrainConfig};

fn main() {
    let scene = scenes::planar_arm_4();
    let data = generate_dataset(&scene, scenes::PLANAR_ARM_4, &SamplerConfig::new(8000, 0.05, 7)).unwrap();
    let cfg = TrainConfig {
        iterations: 3000,
        batch_size: 256,
        eval_every: 500,
        seed: 1,
        field: FieldConfig {
            trunk_width: 64,
            ..FieldConfig::default()
        },
        ..TrainConfig::default()
    };
    let out = train(&data, &scene.robot, &cfg).unwrap();
    println!("step   bce     eikonal  accuracy  |dg/dθ|");
    for m in &out.metrics {
        println!(
            "{:5}  {:.4}  {:.4}   {:.4}    {:.3}",
            m.step, m.bce, m.mean_eikonal, m.accuracy, m.mean_grad_norm
        );
    }
    println!("learned scale s = {:.2}", out.params.scale());
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(Path::new(&path), io::checkpoint_to_json(&out.params).unwrap()).unwrap();
        println!("checkpoint written to {path}");
    }
}
