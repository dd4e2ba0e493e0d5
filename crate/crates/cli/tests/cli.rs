use std::path::Path;
use std::process::{Command, Output};

use neklab::steepness::VIOLATION_FLOOR;
use neklab_cli::config::{ExperimentConfig, Pipeline, Sweep};
use neklab_cli::manifest::MANIFEST;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn neklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neklab"))
        .args(args)
        .output()
        .expect("run neklab")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file in the directory but the manifest is listed with its hash.
fn assert_manifest_complete(dir: &Path) -> Value {
    let m = read_json(&dir.join(MANIFEST));
    let files = m["files"].as_array().unwrap();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST)
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = files.iter().map(|f| f["path"].as_str().unwrap().to_string()).collect();
    listed.sort();
    assert_eq!(listed, on_disk);
    for f in files {
        let bytes = std::fs::read(dir.join(f["path"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str().unwrap(), hex);
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    m
}

#[test]
fn steepness_on_superconductivity_reports_a_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sc.toml", "schema_version = 1\nhamiltonian = \"superconductivity\"\n");
    let out = tmp.path().join("out");
    let o = neklab(&["steepness", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&out.join("steepness.json"));
    assert_eq!(r["kind"], "violation");
    assert!(r["witness"]["margin"].as_f64().unwrap() < VIOLATION_FLOOR);
    assert_eq!(r["witness"]["point"].as_array().unwrap().len(), 2);
    let m = assert_manifest_complete(&out);
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["subcommand"], "steepness");
    assert_eq!(m["config"]["parsed"]["hamiltonian"], "superconductivity");
    assert!(m["versions"]["neklab"].is_string());
}

#[test]
fn empty_sweep_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "e.toml", "schema_version = 1\n[sweep]\nvalues = []\n");
    for pipeline in ["smooth", "geography", "stability"] {
        let o = neklab(&[pipeline, "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains("sweep non-empty"), "{}", stderr(&o));
    }
}

#[test]
fn validation_messages_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("schema_version = 1\nbogus = 2\n", "bogus"),
        ("hamiltonian = \"convex3\"\n", "schema_version"),
        ("schema_version = 7\n", "schema_version"),
        ("schema_version = 1\n[stability]\ndt = \"x\"\n", "stability.dt"),
        ("schema_version = 1\n[sweep]\nfrom = 1e-2\n", "sweep"),
        ("schema_version = 1\nhamiltonian = \"nowhere\"\n", "hamiltonian"),
        ("schema_version = 1\nhamiltonian = \"superconductivity\"\n", "n must be >= 3"),
        ("schema_version = 1\nsubcommand = \"smooth\"\n", "subcommand"),
        ("schema_version = 1\n[prefactors]\nc_r = -1.0\n", "prefactors.c_r"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("c{i}.toml"), text);
        let o = neklab(&["stability", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(stderr(&o).contains(needle), "{text}: {}", stderr(&o));
    }
    let o = neklab(&["stability", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("config"));
}

#[test]
fn exhausted_budget_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = neklab(&["stability", "--budget-secs", "1e-9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let m = assert_manifest_complete(&out);
    assert_eq!(m["exit_code"], 2);
}

#[test]
fn disjointness_failure_exits_three_with_witness() {
    // Without the hierarchy factor, line zones collide near the double
    // resonance.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "g.toml",
        "schema_version = 1\n[sweep]\nvalues = [1e-2]\n[geography]\nsamples = 2000\n[prefactors]\nhierarchy = 1.0\n",
    );
    let out = tmp.path().join("out");
    let o = neklab(&["geography", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let w = read_json(&out.join("witness.json"));
    let vs = w[0]["violations"].as_array().unwrap();
    let v = vs.iter().find(|v| v["kind"] == "disjointness").expect("a disjointness violation");
    assert_eq!(v["point"].as_array().unwrap().len(), 3);
    assert_manifest_complete(&out);
}

#[test]
fn smooth_writes_one_row_per_width_and_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = neklab(&["smooth", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("smoothing.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,p,error,fourier_norm"));
    // Seven widths times orders p = 0, 1, 2 for ell = 2.5.
    assert_eq!(lines.count(), 7 * 3);
    let j = read_json(&out.join("smoothing.json"));
    assert_eq!(j["slopes"].as_array().unwrap().len(), 3);
    assert!(j["slopes"][0].as_f64().unwrap() >= 2.3);
    assert_manifest_complete(&out);
}

#[test]
fn stability_then_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.toml",
        "schema_version = 1\n[sweep]\nfrom = 1e-2\nto = 1e-4\npoints = 4\n[stability]\ninitial_conditions = 2\n",
    );
    let out = tmp.path().join("stab");
    let o = neklab(&["stability", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(neklab::dynamics::SWEEP_HEADER));
    assert_eq!(csv.lines().count(), 5);
    let report = read_json(&out.join("drift_report.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
    assert!(report["max_ratio_eps_sixth"].as_f64().unwrap() <= 1.0);

    let fit_cfg = write_config(
        tmp.path(),
        "f.toml",
        &format!("schema_version = 1\n[fit]\ninput = {:?}\n", out.join("sweep.csv").to_string_lossy()),
    );
    let fit_out = tmp.path().join("fit");
    let o = neklab(&["fit", "--config", &fit_cfg, "--out", fit_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fit = read_json(&fit_out.join("fit.json"));
    assert_eq!(fit["points"], 4);
    let slope = fit["fit"]["fit"]["slope"].as_f64().unwrap();
    assert_eq!(slope, report["drift_fit"]["fit"]["slope"].as_f64().unwrap());

    let bad = write_config(
        tmp.path(),
        "b.toml",
        &format!(
            "schema_version = 1\n[fit]\ninput = {:?}\nquantity = \"nope\"\n",
            out.join("sweep.csv").to_string_lossy()
        ),
    );
    let o = neklab(&["fit", "--config", &bad, "--out", fit_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fit.quantity"));
    let o = neklab(&["fit", "--out", fit_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fit.input"));
}

#[test]
fn normalform_benchmarks_verify() {
    let tmp = tempfile::tempdir().unwrap();
    for bench in ["one-dof", "two-dof"] {
        let cfg = write_config(
            tmp.path(),
            &format!("{bench}.toml"),
            &format!("schema_version = 1\n[normalform]\nbenchmark = \"{bench}\"\n"),
        );
        let out = tmp.path().join(bench);
        let o = neklab(&["normalform", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v = read_json(&out.join("verification.json"));
        assert_eq!(v["displacements_ok"], true);
        assert!(v["remainder_factor"].as_f64().unwrap() <= 10.0);
        let r = neklab::normalform::NormalFormResult::from_json(
            &std::fs::read_to_string(out.join("normalform.json")).unwrap(),
        )
        .unwrap();
        assert!(!r.generators.is_empty());
    }
    let cfg = write_config(tmp.path(), "x.toml", "schema_version = 1\n[normalform]\nbenchmark = \"three\"\n");
    let o = neklab(&["normalform", "--config", &cfg, "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("normalform.benchmark"));
}

#[test]
fn hamiltonian_from_a_file() {
    let tmp = tempfile::tempdir().unwrap();
    // convex3 plus its perturbation shape, written as one TrigPoly.
    let h = neklab::benchmarks::convex3();
    let full = neklab::TrigPoly::from_poly(h.poly().clone())
        .add(&neklab::dynamics::convex3_perturbation(1.0))
        .unwrap();
    let path = tmp.path().join("h.json");
    std::fs::write(&path, full.to_json().unwrap()).unwrap();
    let p = path.to_string_lossy();
    let no_domain = write_config(tmp.path(), "a.toml", &format!("schema_version = 1\nhamiltonian = {p:?}\n"));
    let o = neklab(&["steepness", "--config", &no_domain, "--out", tmp.path().join("a").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("domain"));

    let cfg = write_config(
        tmp.path(),
        "b.toml",
        &format!(
            "schema_version = 1\nhamiltonian = {p:?}\n[domain]\ncenter = [1.0, 1.0, 1.0]\nradius = 0.6\n[sweep]\nvalues = [1e-2]\n[stability]\ninitial_conditions = 2\n"
        ),
    );
    let out = tmp.path().join("b");
    let o = neklab(&["steepness", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_json(&out.join("steepness.json"))["kind"], "profile");
    let out = tmp.path().join("c");
    let o = neklab(&["stability", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // The file carries the same perturbation shape as the built-in run.
    let builtin = tmp.path().join("d");
    let plain = write_config(tmp.path(), "d.toml", "schema_version = 1\n[sweep]\nvalues = [1e-2]\n[stability]\ninitial_conditions = 2\n");
    let o = neklab(&["stability", "--config", &plain, "--out", builtin.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(out.join("sweep.csv")).unwrap(),
        std::fs::read(builtin.join("sweep.csv")).unwrap()
    );
}

#[test]
fn sweep_ranges_resolve() {
    let s = Sweep {
        from: Some(1e-2),
        to: Some(1e-4),
        points: Some(5),
        ..Default::default()
    };
    let v = s.resolve().unwrap();
    assert_eq!(v.len(), 5);
    assert!((v[2] - 1e-3).abs() < 1e-15);
    assert!((v[4] - 1e-4).abs() < 1e-18);
    let one = Sweep {
        from: Some(0.5),
        to: Some(0.1),
        points: Some(1),
        ..Default::default()
    };
    assert_eq!(one.resolve().unwrap(), vec![0.5]);
    let err = Sweep::default().resolve().unwrap_err().to_string();
    assert!(err.contains("sweep non-empty"));
    let cfg = ExperimentConfig::parse("schema_version = 1\nsubcommand = \"fit\"\n").unwrap();
    assert!(cfg.validate(Pipeline::Fit).is_ok());
    assert!(cfg.validate(Pipeline::Smooth).is_err());
}
