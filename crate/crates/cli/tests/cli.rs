use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surfaug"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn tetrahedron() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/tetrahedron.off")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn laplacian_summary_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["laplacian", "--mesh", s(&tetrahedron()), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let summary = json(&a.join("summary.json"));
    assert!((summary["lambda_max"].as_f64().unwrap() - 16.0 / 3.0).abs() < 1e-9);
    assert_eq!(summary["vertices"], 4);
    for f in ["stiffness.coo", "areas.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_mesh_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["laplacian", "--mesh", "no/such/mesh.off", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/mesh.off"));
}

#[test]
fn seed_is_mandatory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["simulate", "--mesh", "icosphere:1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

fn simulate(dir: &Path) -> PathBuf {
    let out = dir.join("sim.csv");
    let o = run(&["simulate", "--mesh", "icosphere:3", "--n", "30", "--m", "30", "--seed", "4", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn c_pda_report_lists_109_bands_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path());
    let go = |tag: &str| {
        let (out, report) = (dir.path().join(format!("{tag}.bin")), dir.path().join(format!("{tag}.json")));
        let o = run(&[
            "augment", "--mesh", "icosphere:3", "--input", s(&sim), "--method", "c-pda", "--seed", "9", "--order",
            "400", "--out", s(&out), "--report", s(&report),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (out, report)
    };
    let (a, ra) = go("a");
    let (b, rb) = go("b");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (mut ja, mut jb) = (json(&ra), json(&rb));
    assert_eq!(ja["bank"]["bands"], 109);
    assert_eq!(ja["output_observations"], 60);
    assert!(ja["max_mean_deviation"].as_f64().unwrap() < 1e-8);
    // everything but the wall-clock figures repeats
    ja.as_object_mut().unwrap().remove("timings_s");
    jb.as_object_mut().unwrap().remove("timings_s");
    assert_eq!(ja, jb);
}

#[test]
fn lb_eigda_full_basis_preserves_means_and_stats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path());
    let (out, report) = (dir.path().join("aug.csv"), dir.path().join("r.json"));
    let o = run(&[
        "augment", "--mesh", "icosphere:3", "--input", s(&sim), "--method", "lb-eigda", "--seed", "2", "--out",
        s(&out), "--report", s(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&report);
    assert_eq!(r["basis"]["modes"], 642);
    assert!(r["max_mean_deviation"].as_f64().unwrap() < 1e-8);
    for stage in ["load", "eigendecomposition", "augment", "write"] {
        assert!(r["timings_s"][stage].as_f64().unwrap() >= 0.0, "{stage}");
    }

    let st = dir.path().join("stats");
    let o = run(&["stats", "--real", s(&sim), "--augmented", s(&out), "--class", "1", "--out", s(&st)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&st.join("summary.json"))["max_mean_deviation"].as_f64().unwrap() < 1e-8);
    let sorted = std::fs::read_to_string(st.join("sorted_means.csv")).unwrap();
    let real: Vec<f64> = sorted.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(real.len(), 642);
    assert!(real.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn stats_on_a_copy_and_on_constant_signals() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path());
    let st = dir.path().join("copy");
    assert!(run(&["stats", "--real", s(&sim), "--augmented", s(&sim), "--out", s(&st)]).status.success());
    let c = json(&st.join("correlations.json"));
    assert_eq!(c["real"], c["augmented"]);

    let flat = dir.path().join("flat.csv");
    let row = vec!["2.5"; 642].join(",");
    std::fs::write(&flat, format!("a,{row}\na,{row}\n")).unwrap();
    let st = dir.path().join("flat");
    let o = run(&["stats", "--real", s(&flat), "--augmented", s(&flat), "--out", s(&st)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let c = json(&st.join("correlations.json"));
    assert!(c["real"].as_array().unwrap().iter().all(Value::is_null));
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "lambda-max = 8.0\norder = 321\nlevels = 2\n").unwrap();
    let out = dir.path().join("bank.json");
    let o = run(&["--config", s(&cfg), "bank", "--lambda-max", "3.0", "--order", "50", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = json(&out);
    assert_eq!(b["K"], 321);
    assert_eq!(b["lambda_max"], 8.0);

    std::fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    let o = run(&["--config", s(&cfg), "bank", "--lambda-max", "3.0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_rejects_zero_order_and_writes_timings() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = run(&["bench", "--mesh", "icosphere:2", "--orders", "0,100", "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(2));

    let fit = dir.path().join("fit.json");
    let o = run(&[
        "bench", "--mesh", "icosphere:2", "--orders", "100,200,400", "--modes", "20,40", "--trials", "1", "--out",
        s(&csv), "--fit", s(&fit),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 + 2);
    assert!(json(&fit)["c_pda_affine"]["r_squared"].is_number());
}

#[test]
fn exit_codes_separate_input_from_computation() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("s.csv");
    let report = dir.path().join("r.json");
    let augment = |modes: &str| {
        run(&[
            "augment", "--mesh", s(&tetrahedron()), "--input", s(&sig), "--method", "lb-eigda", "--modes", modes,
            "--seed", "1", "--out", s(&dir.path().join("o.csv")), "--report", s(&report),
        ])
    };
    // one observation cannot be permuted
    std::fs::write(&sig, "a,1,2,3,4\n").unwrap();
    assert_eq!(augment("4").status.code(), Some(1));
    std::fs::write(&sig, "a,1,2,3,4\na,4,3,2,1\n").unwrap();
    assert_eq!(augment("4").status.code(), Some(0));
    assert_eq!(augment("9").status.code(), Some(2));
}
