mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{fixtures_dir, max_rel_diff};
use phinoise::npy::{read_npy, write_npy};
use phinoise::report::Ledger;
use phinoise::{sample_noise, Precision, Shape};
use serde_json::Value;

fn phinoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phinoise")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = phinoise(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(args: &[&str]) -> i32 {
    phinoise(args).status.code().unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn read_json(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn conditions_every_fixture() {
    let mut cases: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.join("config.json").exists())
        .collect();
    cases.sort();
    assert!(cases.len() >= 4);
    let tmp = tempfile::tempdir().unwrap();
    for case in cases {
        let name = case.file_name().unwrap().to_str().unwrap();
        let out = p(tmp.path(), &format!("{name}.npy"));
        let ledger = p(tmp.path(), &format!("{name}.json"));
        let file = |f: &str| case.join(f).to_str().unwrap().to_owned();
        ok(&[
            "condition", "--ref", &file("ref.npy"), "--noise", &file("noise.npy"),
            "--config", &file("config.json"), "--out", &out, "--ledger", &ledger,
        ]);
        let got = read_npy(Path::new(&out)).unwrap();
        let expected = read_npy(case.join("expected.npy")).unwrap();
        assert_eq!(got.shape(), expected.shape());
        let diff = max_rel_diff(got.data(), expected.data());
        assert!(diff <= 1e-8, "{name}: {diff}");

        let want: Ledger = serde_json::from_str(&std::fs::read_to_string(case.join("ledger.json")).unwrap()).unwrap();
        let have: Ledger = serde_json::from_str(&std::fs::read_to_string(&ledger).unwrap()).unwrap();
        for (a, b) in [
            (have.e_total, want.e_total),
            (have.e_low, want.e_low),
            (have.e_high, want.e_high),
            (have.beta, want.beta),
        ] {
            assert!((a - b).abs() <= 1e-10 * b.abs(), "{name}: {a} vs {b}");
        }
    }
}

fn pipeline_run(dir: &Path) -> Vec<Vec<u8>> {
    ok(&["synth", "--pattern", "moving-blob", "--shape", "16,12,12,2", "--period", "4", "--out", &p(dir, "ref.npy")]);
    ok(&[
        "condition", "--ref", &p(dir, "ref.npy"), "--seed", "42", "--k", "3", "--gamma", "30",
        "--out", &p(dir, "phi.npy"), "--report", &p(dir, "condition.json"), "--ledger", &p(dir, "ledger.json"),
    ]);
    ok(&["analyze", "--in", &p(dir, "phi.npy"), "--ref", &p(dir, "ref.npy"), "--k", "3", "--report", &p(dir, "analyze.json")]);
    ["ref.npy", "phi.npy", "condition.json", "ledger.json", "analyze.json"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn end_to_end_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline_run(a.path());
    let second = pipeline_run(b.path());
    assert_eq!(first, second);

    let report = read_json(&p(a.path(), "condition.json"));
    for key in ["version", "config", "energies", "beta", "whiteness", "band_profile"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let e = &report["energies"];
    let (input, output) = (e["input"].as_f64().unwrap(), e["output"].as_f64().unwrap());
    assert!((input - output).abs() <= 1e-9 * input);

    let analysis = read_json(&p(a.path(), "analyze.json"));
    assert!(analysis["phase_kl"].as_f64().unwrap() >= 0.0);
    assert!(analysis["phase_kl_band"].as_f64().unwrap() >= 0.0);
}

#[test]
fn seeded_noise_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let shape = Shape::new(6, 4, 4, 1).unwrap();
    let reference = sample_noise(shape, 1, Precision::F64).unwrap();
    write_npy(&reference, tmp.path().join("ref.npy")).unwrap();
    let noise = sample_noise(shape, 5, Precision::F64).unwrap();
    write_npy(&noise, tmp.path().join("noise.npy")).unwrap();
    ok(&["condition", "--ref", &p(tmp.path(), "ref.npy"), "--seed", "5", "--k", "1", "--out", &p(tmp.path(), "a.npy")]);
    ok(&["condition", "--ref", &p(tmp.path(), "ref.npy"), "--noise", &p(tmp.path(), "noise.npy"), "--k", "1", "--out", &p(tmp.path(), "b.npy")]);
    assert_eq!(std::fs::read(tmp.path().join("a.npy")).unwrap(), std::fs::read(tmp.path().join("b.npy")).unwrap());
}

#[test]
fn f32_output_is_float32() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["synth", "--pattern", "static-gradient", "--shape", "8,4,4,1", "--precision", "f32", "--out", &p(tmp.path(), "ref.npy")]);
    ok(&["condition", "--ref", &p(tmp.path(), "ref.npy"), "--seed", "1", "--precision", "f32", "--k", "1", "--out", &p(tmp.path(), "out.npy")]);
    let x = read_npy(tmp.path().join("out.npy")).unwrap();
    assert_eq!(x.precision(), Precision::F32);
    let header = std::fs::read(tmp.path().join("out.npy")).unwrap();
    assert!(String::from_utf8_lossy(&header[..128]).contains("'<f4'"));
}

#[test]
fn sweep_writes_one_output_per_setting() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["synth", "--pattern", "moving-blob", "--shape", "16,8,8,1", "--dx", "1", "--dy", "0", "--out", &p(tmp.path(), "ref.npy")]);
    let outdir = p(tmp.path(), "runs");
    ok(&["sweep", "--ref", &p(tmp.path(), "ref.npy"), "--seed", "3", "--gammas", "1,4,30", "--ks", "1,2", "--outdir", &outdir]);
    let summary = read_json(&format!("{outdir}/sweep.json"));
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 6);
    for run in runs {
        let file = run["output"].as_str().unwrap();
        let path = Path::new(&outdir).join(file);
        assert!(path.exists() || Path::new(file).exists(), "{file}");
    }
}

#[test]
fn exit_codes_follow_error_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let reference = p(tmp.path(), "ref.npy");
    ok(&["synth", "--pattern", "static-checker", "--shape", "8,4,4,1", "--out", &reference]);
    let out = p(tmp.path(), "out.npy");

    // invalid parameters
    assert_eq!(code(&["condition", "--ref", &reference, "--seed", "1", "--gamma", "0.5", "--out", &out]), 2);
    assert_eq!(code(&["condition", "--ref", &reference, "--seed", "1", "--k", "9", "--out", &out]), 2);
    assert_eq!(code(&["condition", "--ref", &reference, "--seed", "1", "--domain", "spatial", "--k", "2", "--out", &out]), 2);
    assert_eq!(code(&["condition", "--ref", &reference, "--out", &out]), 2);
    assert_eq!(code(&["synth", "--pattern", "moving-blob", "--shape", "8,4,4,1", "--dx", "3", "--dy", "0", "--no-wrap", "--out", &out]), 2);
    assert_eq!(code(&["condition", "--bogus"]), 2);

    // inputs that disagree on shape
    assert_eq!(code(&["condition", "--ref", &reference, "--seed", "1", "--shape", "8,4,4,2", "--out", &out]), 2);
    let noise = p(tmp.path(), "noise.npy");
    write_npy(&sample_noise(Shape::new(8, 4, 4, 2).unwrap(), 1, Precision::F64).unwrap(), &noise).unwrap();
    assert_eq!(code(&["condition", "--ref", &reference, "--noise", &noise, "--out", &out]), 2);

    // unreadable or unsupported files
    assert_eq!(code(&["condition", "--ref", &p(tmp.path(), "missing.npy"), "--seed", "1", "--out", &out]), 3);
    let fortran = p(tmp.path(), "fortran.npy");
    let mut bytes = std::fs::read(&reference).unwrap();
    let at = bytes.windows(5).position(|w| w == b"False").unwrap();
    bytes.splice(at..at + 5, *b"True ");
    std::fs::write(&fortran, bytes).unwrap();
    assert_eq!(code(&["condition", "--ref", &fortran, "--seed", "1", "--out", &out]), 3);

    // every bin masked leaves nothing to rebalance
    let short = p(tmp.path(), "short.npy");
    ok(&["synth", "--pattern", "static-checker", "--shape", "2,4,4,1", "--out", &short]);
    assert_eq!(code(&["condition", "--ref", &short, "--seed", "1", "--k", "1", "--out", &out]), 4);
    assert!(!Path::new(&out).exists());
}
