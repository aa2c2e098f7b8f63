use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use collision_field::io::{
    hash_file, load_checkpoint, load_dataset, load_scene, parse_metrics_csv, parse_sweep_csv,
    parse_trace_csv, RunManifest,
};
use collision_field::scenes;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collision-field"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scene_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes").join(name)
}

fn error_kind(out: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"].as_str().unwrap().to_string()
}

fn gen(dir: &Path, name: &str, seed: &str) -> PathBuf {
    let out = dir.join(name);
    let o = run(&["data", "gen", "--scene", "planar_arm_4", "--n", "400", "--seed", seed, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn train_small(dir: &Path, data: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    let o = run(&[
        "train", "--data", s(data), "--scene", "planar_arm_4", "--out", s(&out), "--seed", "2",
        "--iterations", "30", "--batch-size", "32", "--trunk-width", "16", "--trunk-depth", "2",
        "--eval-every", "10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn bundled_scene_files_match_builtins() {
    assert_eq!(load_scene(&scene_file("planar_arm_4.json")).unwrap(), scenes::planar_arm_4());
    assert_eq!(load_scene(&scene_file("spatial_arm_6.json")).unwrap(), scenes::spatial_arm_6());
    let o = run(&["scene", "check", s(&scene_file("spatial_arm_6.json"))]);
    assert!(o.status.success());
}

#[test]
fn usage_errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.jsonl");
    let o = run(&["data", "gen", "--scene", "planar_arm_4", "--n", "10", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "usage");
    assert!(!out.exists());
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_scene_is_reported_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"version\": 1,\n  \"robot\": [\n").unwrap();
    let o = run(&["scene", "check", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(msg.contains("line"), "{msg}");
}

#[test]
fn data_gen_is_reproducible_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.jsonl", "4");
    let b = gen(dir.path(), "b.jsonl", "4");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let ds = load_dataset(&a).unwrap();
    assert_eq!(ds.len(), 400);
    assert_eq!(ds.dof, 4);

    let ma: RunManifest =
        serde_json::from_slice(&std::fs::read(a.with_extension("manifest.json")).unwrap()).unwrap();
    let mb: RunManifest =
        serde_json::from_slice(&std::fs::read(b.with_extension("manifest.json")).unwrap()).unwrap();
    assert_eq!(ma.seed, Some(4));
    assert_eq!(ma.command, mb.command);
    assert_eq!(ma.outputs.len(), 1);
}

#[test]
fn train_resolve_and_sweep_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", "1");
    let before = hash_file(&data).unwrap();
    let run_a = train_small(dir.path(), &data, "run_a");
    let run_b = train_small(dir.path(), &data, "run_b");
    assert_eq!(hash_file(&data).unwrap(), before, "input was modified");
    for f in ["checkpoint.json", "metrics.csv"] {
        assert_eq!(std::fs::read(run_a.join(f)).unwrap(), std::fs::read(run_b.join(f)).unwrap());
    }
    let metrics = parse_metrics_csv(&std::fs::read(run_a.join("metrics.csv")).unwrap()).unwrap();
    assert_eq!(metrics.iter().map(|m| m.step).collect::<Vec<_>>(), vec![10, 20, 30]);
    let ckpt = run_a.join("checkpoint.json");
    assert_eq!(load_checkpoint(&ckpt).unwrap().dof, 4);

    let manifest: RunManifest =
        serde_json::from_slice(&std::fs::read(run_a.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.inputs.iter().any(|i| i.sha256 == before.sha256));

    let o = run(&["eval", "--ckpt", s(&ckpt), "--data", s(&data)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["accuracy"].as_f64().is_some());

    let poses = dir.path().join("poses.json");
    std::fs::write(&poses, "[[-1.0, 0.5, 0.5, 0.5], [-0.5, 1.0, -1.0, 0.2]]").unwrap();
    let res = dir.path().join("res");
    let o = run(&[
        "resolve", "--ckpt", s(&ckpt), "--scene", "planar_arm_4", "--poses", s(&poses),
        "--max-iters", "20", "--out", s(&res),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..2 {
        let rows = parse_trace_csv(&std::fs::read(res.join(format!("trace_{i}.csv"))).unwrap()).unwrap();
        assert!(!rows.is_empty() && rows.len() <= 21);
        assert!(rows.iter().all(|r| r.3.len() == 4));
    }

    let sweep = dir.path().join("sweep");
    let o = run(&[
        "sweep", "lrs", "--ckpt", s(&ckpt), "--scene", "planar_arm_4", "--seed", "3",
        "--n-poses", "5", "--max-iters", "20", "--out", s(&sweep),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_sweep_csv(&std::fs::read(sweep.join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![0.001, 0.01, 0.1]);
}

#[test]
fn failed_command_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d.jsonl", "1");
    let out = dir.path().join("wrong_k");
    let o = run(&[
        "train", "--data", s(&data), "--scene", "spatial_arm_6", "--out", s(&out), "--seed", "1",
        "--iterations", "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "joint_count_mismatch");
    assert!(!out.join("checkpoint.json").exists());
    assert!(!out.join("manifest.json").exists());
}
