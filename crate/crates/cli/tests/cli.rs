use std::path::Path;
use std::process::{Command, Output};

fn tvlinf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvlinf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    let o = tvlinf(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("denoise"));
    assert_eq!(tvlinf(&[]).status.code(), Some(1));
    assert_eq!(tvlinf(&["denoise", "--alpha", "abc"]).status.code(), Some(1));
    assert_eq!(tvlinf(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn invalid_parameters_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = tvlinf(&["denoise", "--in", "synthetic:step", "--alpha", "-1", "--beta", "1", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = tvlinf(&["denoise", "--in", "/nonexistent/x.pgm", "--alpha", "1", "--beta", "1", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn denoise_1d_writes_profile_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = tvlinf(&[
        "denoise", "--in", "synthetic:affine-step", "--model", "tvlinf", "--alpha", "0.3", "--beta", "0.35",
        "--size", "400", "--tol", "1e-9", "--max-iters", "100000", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let profile = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("x,f,u,u_exact\n"));
    assert_eq!(profile.lines().count(), 401);
    // noise-free yellow-region data comes with its closed form
    let last = profile.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[2] - cols[3]).abs() < 1e-4);
    assert!(std::fs::read_to_string(out.join("history.csv")).unwrap().starts_with("outer,iteration"));
    assert!(out.join("report.txt").exists());
}

#[test]
fn denoise_2d_round_trips_through_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen");
    let o = tvlinf(&["generate", "--in", "synthetic:circle", "--size", "24", "--noise", "0.01", "--seed", "3", "--out", path(&gen)]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["clean.pgm", "noisy.pgm", "noisy.csv"] {
        assert!(gen.join(f).exists(), "{f}");
    }
    let out = dir.path().join("den");
    let noisy = gen.join("noisy.pgm");
    let o = tvlinf(&[
        "denoise", "--in", path(&noisy), "--model", "tgv", "--alpha", "0.1", "--beta", "0.2", "--tol", "1e-5",
        "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(out.join("denoised.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n24 24\n"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# step data\nmodel = tvlinf\nalpha = 0.3\nbeta = 1000\nin = synthetic:step\nsize = 200\ntol = 1e-9\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(tvlinf(&["denoise", "--config", path(&cfg), "--out", path(&a)]).status.code(), Some(0));
    assert_eq!(
        tvlinf(&["denoise", "--config", path(&cfg), "--beta", "0.2", "--out", path(&b)]).status.code(),
        Some(0)
    );
    let ra = std::fs::read_to_string(a.join("report.txt")).unwrap();
    let rb = std::fs::read_to_string(b.join("report.txt")).unwrap();
    assert!(ra.contains("1000") && rb.contains("0.2"), "{ra}\n{rb}");
    assert_ne!(
        std::fs::read(a.join("profile.csv")).unwrap(),
        std::fs::read(b.join("profile.csv")).unwrap()
    );
}

#[test]
fn verify_passes_converged_and_fails_truncated() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let base = [
        "verify", "--in", "synthetic:affine-step", "--model", "tvlinf", "--alpha", "0.3", "--beta", "0.35",
        "--size", "500", "--out", path(&out),
    ];
    let o = tvlinf(&[&base[..], &["--tol", "1e-10", "--max-iters", "100000"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let o = tvlinf(&[&base[..], &["--max-iters", "3"]].concat());
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn strict_non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = tvlinf(&[
        "denoise", "--in", "synthetic:step", "--alpha", "0.3", "--beta", "0.35", "--max-iters", "2", "--strict",
        "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_lists_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = tvlinf(&[
        "compare", "--in", "synthetic:pyramid", "--size", "24", "--noise", "0.01", "--seed", "1", "--alpha", "0.4",
        "--beta-sweep", "50,100", "--c", "2", "--tol", "1e-4", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5, "{text}");
    assert!(text.contains("ssim"));
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn seeded_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = tvlinf(&[
            "denoise", "--in", "synthetic:circle", "--size", "20", "--noise", "0.02", "--seed", "5", "--alpha", "0.1",
            "--beta", "40", "--out", path(&out),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out.join("denoised.pgm")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}
