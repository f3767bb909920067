use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn entcorr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entcorr")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["no-such-command"],
        vec!["ising-norms", "--steps", "0"],
        vec!["ising-norms", "--j-min", "1", "--j-max", "0.5"],
        vec!["bh", "--distances", "1,0"],
        vec!["scatter", "--qubits", "5"],
        vec!["ising-norms", "--length", "3", "--distances", "1,1,1"],
    ] {
        let o = entcorr(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_entcorr"))
        .args(["verify", "--threads-env", "MY_THREADS"])
        .env("MY_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_catches_a_perturbed_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let clean = entcorr(&["verify"], dir.path());
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
    assert_eq!(stdout(&clean).lines().filter(|l| l.starts_with("PASS")).count(), 5);

    let bad = entcorr(&["verify", "--perturb-m", "1e-6"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let text = stdout(&bad);
    assert!(text.lines().any(|l| l.starts_with("FAIL free-fermion RDM equals ED RDM")), "{text}");
    assert!(String::from_utf8_lossy(&bad.stderr).contains("free-fermion RDM equals ED RDM"));
}

#[test]
fn ising_norms_csv_manifest_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = entcorr(&["ising-norms", "--j-min", "0", "--j-max", "1.2", "--steps", "13", "--out", "run"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("p=1: ||rho4|| crosses ||rho3||"));

    let csv = fs::read_to_string(dir.path().join("run/ising_norms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("J,quantity,q,d1,d2,d3,value"));
    let zero_rows: Vec<&str> = csv.lines().filter(|l| l.starts_with("0,")).collect();
    assert_eq!(zero_rows.len(), 6);
    assert!(zero_rows.iter().all(|l| l.ends_with(",0")), "{zero_rows:?}");
    assert!(!csv.contains('\r'));

    let m = manifest(&dir.path().join("run/ising_norms.manifest.json"));
    let out = &m["outputs"][0];
    assert_eq!(out["file"], "ising_norms.csv");
    assert_eq!(out["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(csv.as_bytes())));
    assert_eq!(m["grid"]["steps"], 13);
    assert_eq!(m["l_ff"]["default"], 8192);

    let r = entcorr(&["replay", "run/ising_norms.manifest.json", "--out", "again"], dir.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(stdout(&r).contains("match ising_norms.csv"));
    assert_eq!(fs::read(dir.path().join("again/ising_norms.csv")).unwrap(), csv.as_bytes());
}

#[test]
fn replay_reports_tampered_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(entcorr(&["ising-norms", "--steps", "3", "--j-max", "0.5", "--p", "1", "--out", "run"], dir.path())
        .status
        .success());
    let path = dir.path().join("run/ising_norms.manifest.json");
    let mut m = manifest(&path);
    m["outputs"][0]["sha256"] = Value::String("0".repeat(64));
    fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let r = entcorr(&["replay", "run/ising_norms.manifest.json", "--out", "again"], dir.path());
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).contains("DIFFER ising_norms.csv"));
}

#[test]
fn tangle_schemes_share_one_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = entcorr(
        &["ising-tangles", "--j-min", "0.7", "--j-max", "0.9", "--steps", "3", "--scheme", "both", "--out", "t"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for tag in ["absolute", "renormalized"] {
        assert!(text.contains(&format!("[{tag}] J2_max")), "{text}");
        let csv = fs::read_to_string(dir.path().join(format!("t/ising_tangles_{tag}.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("J,quantity,q,d1,d2,d3,value,scheme"));
        for q in ["C2", "sqrt_tau3", "sqrt_tau3_lower", "sqrt_tau3_upper", "tau4", "p1"] {
            assert!(csv.lines().any(|l| l.split(',').nth(1) == Some(q)), "{tag} lacks {q}");
        }
        assert!(csv.lines().skip(1).all(|l| l.ends_with(tag)));
    }
}

#[test]
fn bose_hubbard_rows_carry_system_size() {
    let dir = tempfile::tempdir().unwrap();
    let o = entcorr(&["bh", "--N", "4", "--L", "4", "--j-max", "0.2", "--steps", "3", "--out", "b"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("b/bh_norms_N4_L4.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("J,quantity,q,d1,d2,d3,value,N,L"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",4,4")));
    assert!(csv.contains("strong_coupling_norm1"));
    assert!(csv.contains("ideal_gas_norm2"));
}

#[test]
fn scatter_is_reproducible_from_its_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args =
        |out: &'static str| ["scatter", "--samples", "300", "--seed", "11", "--family-points", "5", "--out", out];
    assert!(entcorr(&args("a"), dir.path()).status.success());
    assert!(entcorr(&args("b"), dir.path()).status.success());
    let digest = |d: &str| manifest(&dir.path().join(d).join("scatter_q3.manifest.json"))["outputs"].clone();
    assert_eq!(digest("a"), digest("b"));

    let fam = fs::read_to_string(dir.path().join("a/families_q3.csv")).unwrap();
    assert!(fam.lines().any(|l| l.starts_with("ghz,")));
    assert!(fam.lines().any(|l| l.starts_with("w,")));

    let other = entcorr(&["scatter", "--samples", "300", "--seed", "12", "--out", "c"], dir.path());
    assert!(other.status.success());
    assert_ne!(digest("a")[0]["sha256"], digest("c")[0]["sha256"]);
}
