use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use tentlab::harness::{
    build_histogram, emit_report, preset, run_experiment, ExperimentConfig, ExperimentKind,
    PRESET_IDS,
};

fn files_under(dir: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap();
                out.insert(rel.to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out
}

fn small_configs() -> Vec<(String, Vec<ExperimentConfig>)> {
    let mut backward = ExperimentConfig::new("backward", ExperimentKind::Backward);
    backward.steps = 500;
    backward.seed = 9;
    let mut basin = ExperimentConfig::new("basin", ExperimentKind::Basin);
    basin.backend = "f32".into();
    let mut errsum = ExperimentConfig::new("errsum", ExperimentKind::Errsum);
    errsum.steps = 50;
    let mut hist = ExperimentConfig::new("histogram", ExperimentKind::Histogram);
    hist.steps = 2000;
    hist.bound = "100.0001".into();
    vec![
        ("five-bit-table".into(), preset("five-bit-table").unwrap()),
        ("n100-orbits".into(), preset("n100-orbits").unwrap()),
        ("backward".into(), vec![backward]),
        ("basin".into(), vec![basin]),
        ("errsum".into(), vec![errsum]),
        ("histogram".into(), vec![hist]),
    ]
}

#[test]
fn reports_are_byte_identical_and_fully_listed() {
    for (name, configs) in small_configs() {
        let runs: Vec<_> = configs.iter().map(|c| run_experiment(c).unwrap()).collect();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        emit_report(a.path(), &name, &runs).unwrap();
        let rerun: Vec<_> = configs.iter().map(|c| run_experiment(c).unwrap()).collect();
        emit_report(b.path(), &name, &rerun).unwrap();

        let listed = files_under(a.path());
        assert_eq!(listed, files_under(b.path()));
        for f in &listed {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{name}: {f} differs"
            );
        }

        let manifest: Json =
            serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
        let entries = manifest["files"].as_array().unwrap();
        let mut in_manifest = BTreeSet::new();
        for e in entries {
            let path = e["path"].as_str().unwrap();
            let bytes = fs::read(a.path().join(path)).unwrap();
            assert_eq!(e["sha256"], hex::encode(Sha256::digest(&bytes)), "{path}");
            assert_eq!(e["bytes"], bytes.len() as u64);
            in_manifest.insert(path.to_string());
        }
        in_manifest.insert("manifest.json".into());
        assert_eq!(in_manifest, listed, "{name}");
        assert!(manifest["rng_algorithm"]
            .as_str()
            .unwrap()
            .contains("ChaCha8"));
    }
}

#[test]
fn file_sets_per_kind() {
    let expect = [
        (
            "backward",
            vec!["consistency.json", "histogram.csv", "walk.csv"],
        ),
        ("basin", vec!["cycle.json", "edges.csv", "tree.txt"]),
        ("errsum", vec!["errors.csv"]),
        ("histogram", vec!["histogram.csv", "orbit.json"]),
    ];
    let configs = small_configs();
    for (name, files) in expect {
        let (_, cfgs) = configs.iter().find(|(n, _)| n == name).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let runs: Vec<_> = cfgs.iter().map(|c| run_experiment(c).unwrap()).collect();
        emit_report(dir.path(), name, &runs).unwrap();
        let mut want: BTreeSet<String> = files.iter().map(|s| s.to_string()).collect();
        want.insert("manifest.json".into());
        assert_eq!(files_under(dir.path()), want, "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let (_, cfgs) = &configs[3];
    emit_report(dir.path(), "basin", &[run_experiment(&cfgs[0]).unwrap()]).unwrap();
    let edges = fs::read_to_string(dir.path().join("edges.csv")).unwrap();
    assert!(edges.starts_with("parent,child,depth\n"));
    let hist_dir = tempfile::tempdir().unwrap();
    let (_, cfgs) = &configs[5];
    emit_report(hist_dir.path(), "h", &[run_experiment(&cfgs[0]).unwrap()]).unwrap();
    let hist = fs::read_to_string(hist_dir.path().join("histogram.csv")).unwrap();
    assert!(hist.starts_with("bin_lo,bin_hi,count\n0.0,"));
}

#[test]
fn every_preset_validates() {
    for id in PRESET_IDS {
        for c in preset(id).unwrap() {
            c.validate().unwrap_or_else(|e| panic!("{id}: {e}"));
        }
    }
}

#[test]
fn manifest_records_represented_values() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new("nonint", ExperimentKind::Cycle);
    c.bound = "100.0001".into();
    c.steps = 10;
    emit_report(dir.path(), "nonint", &[run_experiment(&c).unwrap()]).unwrap();
    let m: Json =
        serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    let run = &m["runs"][0];
    assert_eq!(run["config"]["bound"], "100.0001");
    assert_eq!(
        run["represented"]["N"],
        "100.000100000000003319655661471188068389892578125"
    );
    assert_eq!(run["backend"], "f64");
    assert_eq!(m["defaults"]["bins"], 20);
}

proptest! {
    #[test]
    fn histogram_conserves_samples(
        values in prop::collection::vec(0.0f64..=50.0, 1..400),
        bins in 2usize..60,
    ) {
        let h = build_histogram(&values, 50.0, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), values.len() as u64);
        prop_assert_eq!(h.total, values.len() as u64);
        prop_assert!(h.sup_norm >= 0.0 && h.sup_norm <= 1.0);
    }
}
