use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cbsim::protocols::wigner_fock_analytic;
use cbsim::{ExperimentResult, NoiseParams, C64};
use serde_json::Value;

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn cbsim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbsim"))
        .current_dir(repo(""))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> ExperimentResult {
    let o = cbsim(args, out);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in ["result.json", "result.csv", "config.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    ExperimentResult::from_json(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn wigner_fock1_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["wigner", "--fock", "1", "--alphas", "0:2.5:26", "--exact"], dir.path());
    let csv = String::from_utf8(read(dir.path(), "result.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "re,im,abs,w,std_error,flagged");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 26);
    assert!((rows[0][3] + 2.0 / std::f64::consts::PI).abs() < 1e-12);
    for r in &rows {
        let want = wigner_fock_analytic(1, C64::new(r[0], r[1]));
        assert!((r[3] - want).abs() < 1e-6, "{r:?}");
        assert_eq!(r[5], 0.0);
    }
}

#[test]
fn noon_noiseless_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let r = ok(&["noon", "--n", "2", "--noiseless"], dir.path());
    assert!((r.derived["fidelity"] - 1.0).abs() < 1e-9);
    assert!((r.derived["fisher"] - 4.0).abs() < 1e-6);
    let json: Value = serde_json::from_slice(&read(dir.path(), "result.json")).unwrap();
    assert!(json["config"]["seed"].is_u64());
    assert_eq!(json["config"]["subcommand"], "noon");
    assert_eq!(json["config"]["args"]["n"], 2);
}

#[test]
fn seed_is_recorded_when_drawn() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = ok(&["swaptest", "--m", "1", "--shots", "50"], a.path());
    let rb = ok(&["swaptest", "--m", "1", "--shots", "50"], b.path());
    let seed = |r: &ExperimentResult| r.config["seed"].as_u64().unwrap();
    assert_eq!(ra.plan.seed, seed(&ra));
    assert_ne!(seed(&ra), seed(&rb));
    let c = tempfile::tempdir().unwrap();
    let replay = ok(
        &["swaptest", "--m", "1", "--shots", "50", "--seed", &seed(&ra).to_string()],
        c.path(),
    );
    assert_eq!(replay.rows, ra.rows);
}

#[test]
fn sequence_run_is_byte_identical() {
    let seq = repo("sequences/noon2_echo.seq");
    let profile = repo("profiles/paper.profile");
    let args = [
        "run",
        seq.to_str().unwrap(),
        "--noise",
        profile.to_str().unwrap(),
        "--seed",
        "11",
    ];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let r = ok(&args, a.path());
    ok(&args, b.path());
    for f in ["result.json", "result.csv", "config.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let f = r.derived["noon_fidelity"];
    assert!(f > 0.0 && f < 1.0);
    assert_eq!(r.config["noise"], serde_json::to_value(NoiseParams::paper()).unwrap());
}

#[test]
fn sampled_sequence_is_byte_identical() {
    let seq = repo("sequences/displaced_parity.seq");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let r = ok(&["run", seq.to_str().unwrap()], a.path());
    ok(&["run", seq.to_str().unwrap()], b.path());
    assert_eq!(r.plan.shots, 1000);
    assert_eq!(r.plan.seed, 7);
    for f in ["result.json", "result.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

/// Set `CBSIM_BLESS=1` to regenerate the golden files.
#[test]
fn golden_files() {
    let cases: [(&str, &[&str]); 3] = [
        ("swaptest_fock2_m2", &["swaptest", "--psi", "fock:2", "--m", "2", "--shots", "300", "--seed", "42"]),
        ("coherent_exact", &["coherent", "--alpha", "1.3416407864998738", "--n-max", "6", "--exact", "--seed", "0"]),
        ("heating_seq", &["run", "SEQ", "--noise", "paper", "--seed", "3"]),
    ];
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (name, args) in cases {
        let args: Vec<&str> = args
            .iter()
            .map(|a| if *a == "SEQ" { "sequences/heating.seq" } else { a })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        ok(&args, dir.path());
        for f in ["result.csv", "result.json"] {
            let path = golden.join(format!("{name}.{}", f.rsplit('.').next().unwrap()));
            let got = read(dir.path(), f);
            if std::env::var_os("CBSIM_BLESS").is_some() {
                std::fs::create_dir_all(&golden).unwrap();
                std::fs::write(&path, &got).unwrap();
            }
            let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(got == want, "{name}/{f} differs from {}", path.display());
        }
    }
}

#[test]
fn bad_flags_print_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = cbsim(&["swaptest", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = cbsim(&["wigner", "--alphas", "0:1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = cbsim(&["teleport"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn file_errors_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = cbsim(&["run", "/no/such/file.seq"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/no/such/file.seq"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);

    let profile = dir.path().join("bad.profile");
    std::fs::write(&profile, "heat_a=fast\n").unwrap();
    let o = cbsim(&["noon", "--n", "1", "--noise", profile.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.profile") && err.contains("line 1"), "{err}");

    let seq = dir.path().join("bad.seq");
    std::fs::write(&seq, "set cutoffs 3 3\nFOO 1 2\n").unwrap();
    let o = cbsim(&["run", seq.to_str().unwrap()], dir.path());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2, column 1: unknown opcode FOO"), "{err}");
}

#[test]
fn calibrate_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let r = ok(&["calibrate"], dir.path());
    let text = String::from_utf8(read(dir.path(), "calibrated.profile")).unwrap();
    let p = NoiseParams::from_profile_str(&text).unwrap();
    assert_eq!(p.deph_mode_a, r.derived["gamma_a"]);
    assert_eq!(p.deph_mode_b, NoiseParams::paper().deph_mode_b);
    for row in &r.rows {
        let (n, predicted) = (row[1], row[3]);
        if n == 2.0 {
            assert!(predicted > 0.9e-3 && predicted < 1.7e-3, "{row:?}");
        }
    }
}

#[test]
fn plot_script_on_request() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["swaptest", "--m", "0", "--plot"], dir.path());
    let gp = String::from_utf8(read(dir.path(), "plot.gp")).unwrap();
    assert!(gp.contains("result.csv"));
}

#[test]
fn fredkin_noiseless_permutation() {
    let dir = tempfile::tempdir().unwrap();
    let r = ok(&["fredkin", "--noiseless", "--seed", "1"], dir.path());
    assert!((r.derived["success_probability"] - 1.0).abs() < 1e-10);
}
