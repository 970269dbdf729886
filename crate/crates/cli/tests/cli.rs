use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// CSV body without the manifest comment line.
fn body(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().filter(|l| !l.starts_with("# manifest")).collect::<Vec<_>>().join("\n")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Drude absorption table with its tail sidecar, as a user would prepare it.
fn write_metal_table(dir: &Path) -> std::path::PathBuf {
    let (wp, g) = (1.2e16f64, 1e14f64);
    let mut csv = String::from("omega_rad_s,eps_imag\n");
    let n = 400;
    for i in 0..n {
        let w = 10f64.powf(11.0 + 6.0 * i as f64 / (n - 1) as f64);
        csv.push_str(&format!("{w:e},{:e}\n", wp * wp * g / (w * (w * w + g * g))));
    }
    let table = dir.join("metal.csv");
    fs::write(&table, csv).unwrap();
    fs::write(
        dir.join("metal.json"),
        r#"{"low_tail": {"kind": "power_law", "exponent": -1.0}, "high_tail": {"kind": "power_law", "exponent": 3.0}}"#,
    )
    .unwrap();
    table
}

#[test]
fn conductor_energy_document() {
    let out = casimir(&["energy", "--material1", "pc", "--material2", "pc", "--gap", "1e-6"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = json(&out);
    assert!(rel(doc["value"].as_f64().unwrap(), -4.333e-10) < 1e-3);
    assert_eq!(doc["units"], "J/m^2");
    assert_eq!(doc["verdict"], "Attractive");
    assert!(doc["dominant_xi"].as_f64().unwrap() > 0.0);
    let manifest = &doc["manifest"];
    assert_eq!(manifest["command"], "energy");
    assert_eq!(manifest["constants_version"], "CODATA-2018");
    assert_eq!(manifest["materials"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["materials"][0]["sha256"].as_str().unwrap().len(), 64);
    // 17 significant digits in scientific notation.
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"value\"")).unwrap();
    assert!(line.contains("e-10"), "{line}");
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17, "{line}");
}

#[test]
fn zero_gap_is_a_usage_error() {
    let out = casimir(&["energy", "--material1", "pc", "--material2", "pc", "--gap", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gap must be positive"));
    let out = casimir(&["pressure", "--material1", "pc", "--material2", "pc", "--gap", "-1e-6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vacuum_partner_is_indeterminate() {
    let out = casimir(&["energy", "--material1", "pc", "--material2", "vacuum", "--gap", "1e-6"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["value"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["verdict"], "Indeterminate");
    assert!(doc["dominant_xi"].is_null());
}

#[test]
fn bad_inputs_exit_2() {
    assert_eq!(casimir(&["energy", "--material1", "nope.json", "--material2", "pc", "--gap", "1e-6"]).status.code(), Some(2));
    assert_eq!(casimir(&["energy", "--material1", "pc"]).status.code(), Some(2));
    assert_eq!(casimir(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kind": "drude", "parameters": {"omega_p": 1e16, "gamma": -1}}"#).unwrap();
    let out = casimir(&["energy", "--material1", bad.to_str().unwrap(), "--material2", "pc", "--gap", "1e-6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma"));
}

#[test]
fn non_convergence_exits_3_with_estimate() {
    let out = casimir(&[
        "energy", "--material1", "pc", "--material2", "pmc", "--gap", "1e-6", "--max-subdivisions", "1", "--rel-tol", "1e-14",
    ]);
    let dir = tempfile::tempdir().unwrap();
    let table = write_metal_table(dir.path());
    let model = dir.path().join("model.json");
    let kk = casimir(&["kk", table.to_str().unwrap(), "-o", model.to_str().unwrap()]);
    assert!(kk.status.success(), "{}", stderr(&kk));
    let hard = casimir(&[
        "energy", "--material1", model.to_str().unwrap(), "--material2", "pc", "--gap", "1e-6", "--max-subdivisions", "20",
        "--rel-tol", "1e-14",
    ]);
    assert_eq!(hard.status.code(), Some(3), "{}", stderr(&hard));
    let doc = json(&hard);
    assert_eq!(doc["converged"], false);
    assert!(doc["value"].as_f64().unwrap() < 0.0);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["converged"], false);
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn pressure_csv() {
    let out = casimir(&["pressure", "--material1", "pc", "--material2", "pc", "--gap", "1e-6", "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# manifest {"));
    assert!(lines[1].starts_with("quantity,value,error_estimate,units"));
    let value: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!(rel(value, -1.300e-3) < 1e-3);
}

#[test]
fn sweep_defaults_and_determinism() {
    let args = ["sweep", "--material1", "pc", "--material2", "pmc"];
    let a = casimir(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = casimir(&args);
    let text = body(&a);
    assert_eq!(text, body(&b));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a_m,energy_J_m2,pressure_Pa,error,verdict");
    assert_eq!(lines.len(), 41);
    let first: Vec<&str> = lines[1].split(',').collect();
    let last: Vec<&str> = lines[40].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 1e-7);
    assert_eq!(last[0].parse::<f64>().unwrap(), 5e-6);
    assert_eq!(first[4], "Repulsive");
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["sweep", "--material1", "pc", "--material2", "pc", "--points", "5"];
    let default = casimir(&args);
    let capped = Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).env("CASIMIR_THREADS", "1").output().unwrap();
    let sequential = casimir(&[&args[..], &["--sequential"]].concat());
    assert!(capped.status.success());
    assert_eq!(body(&default), body(&capped));
    assert_eq!(body(&default), body(&sequential));
    let bad = Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).env("CASIMIR_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn kk_output_round_trips_through_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_metal_table(dir.path());
    let out = casimir(&["kk", table.to_str().unwrap(), "--label", "metal"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["kind"], "tabulated");
    assert_eq!(doc["label"], "metal");
    assert_eq!(doc["parameters"]["low_tail"]["kind"], "power_law");
    assert_eq!(doc["manifest"]["command"], "kk");
    let model = dir.path().join("model.json");
    fs::write(&model, &out.stdout).unwrap();
    let m = model.to_str().unwrap();

    let runs: Vec<Vec<&str>> = vec![
        vec!["energy", "--material1", m, "--material2", m, "--gap", "1e-6"],
        vec!["pressure", "--material1", m, "--material2", "pc", "--gap", "1e-6", "--csv"],
        vec!["sweep", "--material1", m, "--material2", m, "--points", "3"],
        vec!["pfa", "--sphere", m, "--plate", m, "--radius", "1e-4", "--gap", "1e-6"],
        vec!["attraction", "--material", m, "--points", "2"],
    ];
    for args in runs {
        let out = casimir(&args);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
    }
    let e = json(&casimir(&["energy", "--material1", m, "--material2", m, "--gap", "1e-6"]));
    assert_eq!(e["manifest"]["materials"][0]["label"], "metal");
    assert!(e["value"].as_f64().unwrap() < 0.0);
}

#[test]
fn kk_rejects_bad_tables() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    fs::write(&table, "omega,eps\n1,2\n").unwrap();
    assert_eq!(casimir(&["kk", table.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&table, "omega_rad_s,eps_imag\n2,1\n1,1\n").unwrap();
    let out = casimir(&["kk", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("increasing"), "{}", stderr(&out));
}

#[test]
fn signmap_against_conductor() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let out = casimir(&["signmap", "--eps1", "10", "--mu1", "log:1:1000:4", "--conductor", "--summary", summary.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = body(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps1,mu1,eps2,mu2,z1,z2,pressure_Pa,error_Pa,verdict,unphysical");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",unphysical: non-dispersive")));
    assert!(lines[1].contains(",Attractive,") && lines[4].contains(",Repulsive,"));
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["boundaries"].as_array().unwrap().len(), 1);
    assert_eq!(s["boundaries"][0]["axis"], "mu1");
    assert_eq!(s["manifest"]["command"], "signmap");
}

#[test]
fn uvlmap_reports_assumption() {
    let out = casimir(&["uvlmap", "--mu1", "1,10", "--mu2", "1,10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&stderr(&out)).unwrap();
    assert!(summary["assumptions"].as_array().unwrap().iter().any(|a| a.as_str().unwrap().contains("eps1*mu1 = eps2*mu2")));
    let vac = casimir(&["uvlmap", "--mu1", "1,10", "--mu2", "1,10", "--mode", "vacuum-index"]);
    assert!(vac.status.success());
    assert!(stderr(&vac).contains("vacuum index"));
    assert_eq!(casimir(&["uvlmap", "--mu1", "0.5", "--mu2", "1"]).status.code(), Some(2));
}

#[test]
fn pfa_document() {
    let out = casimir(&["pfa", "--sphere", "pc", "--plate", "pc", "--radius", "1e-4", "--gap", "1e-6"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert!(rel(doc["force"].as_f64().unwrap(), -2.723e-13) < 1e-3);
    assert_eq!(doc["units"], "N");
    assert_eq!(doc["verdict"], "Attractive");
    let out = casimir(&["pfa", "--sphere", "pc", "--plate", "pmc", "--radius", "5e-6", "--gap", "1e-6"]);
    let doc = json(&out);
    assert_eq!(doc["verdict"], "Repulsive");
    assert!(doc["warnings"][0].as_str().unwrap().contains("a/R"));
}

#[test]
fn attraction_check() {
    let dir = tempfile::tempdir().unwrap();
    let drude = dir.path().join("gold.json");
    fs::write(&drude, r#"{"kind": "drude", "label": "gold", "parameters": {"omega_p": 1.37e16, "gamma": 5.32e13}}"#).unwrap();
    let plasma = dir.path().join("al.json");
    fs::write(&plasma, r#"{"kind": "plasma", "parameters": {"omega_p": 1.88e16}}"#).unwrap();
    let out = casimir(&["attraction", "--material", drude.to_str().unwrap(), "--material", plasma.to_str().unwrap(), "--points", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = body(&out);
    assert_eq!(text.lines().count(), 1 + 3 * 4);
    assert!(text.lines().skip(1).all(|l| l.contains(",Attractive,")));
    let summary: Value = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(summary["passed"], true);
    let constant = casimir(&["attraction", "--material", "pc"]);
    assert_eq!(constant.status.code(), Some(2));
    assert!(stderr(&constant).contains("use sign_map"));
}

#[test]
fn manifest_is_reproducible_apart_from_timestamp() {
    let args = ["pressure", "--material1", "pc", "--material2", "pmc", "--gap", "2e-6"];
    let mut a = json(&casimir(&args));
    let mut b = json(&casimir(&args));
    for doc in [&mut a, &mut b] {
        let ts = doc["manifest"].as_object_mut().unwrap().remove("timestamp").unwrap();
        assert!(ts.as_str().unwrap().ends_with('Z'));
    }
    assert_eq!(a, b);
}
