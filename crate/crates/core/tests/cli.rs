use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use behavioral_comm::sweep::{verify, SweepConfig, VerifyHooks, CSV_HEADER};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_behavioral-comm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("sweep.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn default_sweep_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = run(&["--out", out.to_str().unwrap(), "--samples", "20000"]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );

    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 1 + 4 * 41);

    let fig = fs::read_to_string(out.join("figure3.dat")).unwrap();
    let blocks: Vec<&str> = fig.split("\n\n").collect();
    assert_eq!(blocks.len(), 4);
    assert!(blocks[0].starts_with("# alpha=1\n"));
    let curve = |b: &str| -> Vec<f64> {
        b.lines()
            .skip(1)
            .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let floor = curve(blocks[0]);
    assert_eq!(floor.len(), 41);
    for b in &blocks[1..] {
        assert!(curve(b).iter().zip(&floor).all(|(d, f)| d >= f));
    }
    // P=1 and P=3 on the unbiased curve
    assert_eq!((floor[2], floor[6]), (0.5, 0.25));

    let meta = fs::read_to_string(out.join("metadata.txt")).unwrap();
    assert!(meta.contains("mc_seed=20180514") && meta.contains("ChaCha8"));
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[
            "--out",
            out.to_str().unwrap(),
            "--samples",
            "5000",
            "--seed",
            "3",
        ]);
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(a.join("sweep.csv")).unwrap(),
        fs::read(b.join("sweep.csv")).unwrap()
    );
}

#[test]
fn no_mc_leaves_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "alphas = [0.5]\np_grid = [0.0, 1.0]\n");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "--no-mc"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[8], row[9]), ("", ""));
    // P=0: nothing sent, distortion is the tilted prior variance
    assert_eq!(row[6].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn verify_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["--out", out.to_str().unwrap(), "--verify"]);
    let report = fs::read_to_string(out.join("verification.txt")).unwrap();
    assert!(o.status.success(), "{report}");
    assert!(report.starts_with("# tolerances:"));
    let checks: Vec<&str> = report.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(checks.iter().all(|l| l.starts_with("PASS ")));
    for name in [
        "alpha_normalizer",
        "encoder_optimality",
        "decoder_optimality",
        "mc_agreement",
        "pt_convergence",
    ] {
        assert!(checks.iter().any(|l| l.contains(name)), "no {name} check");
    }
}

#[test]
fn verify_with_unbiased_agents_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "alphas = [1.0]\np_grid = [0.0, 1.0, 4.0]\nmc_samples = 20000\n",
    );
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "--verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn corrupted_normalizer_is_named() {
    let plan = SweepConfig {
        alphas: vec![0.5],
        p_grid: vec![1.0],
        mc: false,
        ..SweepConfig::default()
    }
    .validate()
    .unwrap();
    let report = verify(
        &plan,
        VerifyHooks {
            corrupt_normalizer: true,
        },
    )
    .unwrap();
    assert!(!report.passed());
    assert!(report
        .failures()
        .all(|c| c.name.starts_with("alpha_normalizer")));
    assert!(report
        .to_text()
        .lines()
        .any(|l| l.starts_with("FAIL alpha_normalizer[alpha=0.5")));
}

#[test]
fn empty_alphas_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alphas = []\n");
    let o = run(&[
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alphas"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 0.5\n");
    assert_eq!(run(&["--config", &cfg]).status.code(), Some(1));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let o = run(&["--out", out.to_str().unwrap(), "--no-mc"]);
    assert_eq!(o.status.code(), Some(3));
}
