//! Balanced dataset generation and the nearest-neighbour distance labels.

use collision_field::io;
use collision_field::sampler::{generate_dataset, ndf_distance_labels, SamplerConfig};
use collision_field::scenes;

fn main() {
    let scene = scenes::planar_arm_4();
    let ds = generate_dataset(&scene, scenes::PLANAR_ARM_4, &SamplerConfig::new(2000, 0.05, 3)).unwrap();
    let (free, hit) = ds.class_counts();
    println!("{} samples: {free} free, {hit} collided", ds.len());

    let labeled = ndf_distance_labels(&ds, 1).unwrap();
    let mean = |collided: bool| {
        let d: Vec<f64> = labeled
            .samples
            .iter()
            .filter(|s| s.collided == collided)
            .map(|s| s.ndf_distance.unwrap())
            .collect();
        d.iter().sum::<f64>() / d.len() as f64
    };
    println!("mean signed distance: free {:.3}, collided {:.3}", mean(false), mean(true));

    let text = io::dataset_to_jsonl(&labeled).unwrap();
    println!("JSONL header: {}", text.lines().next().unwrap());
    println!("first record: {}", text.lines().nth(1).unwrap());
}
