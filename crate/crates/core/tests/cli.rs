use std::path::Path;
use std::process::{Command, Output};

use gframe_lab::cli::bench;
use gframe_lab::generate::ExperimentConfig;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gframe-lab"))
        .args(args)
        .output()
        .expect("spawn gframe-lab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"{"seed": 5, "dim_h": 6, "block_dims": [2, 3, 2], "condition_target": 20.0,
    "controller_kind": "jacobi", "symbol_kind": {"kind": "decaying"}, "tol": 1e-9}"#;

// Mercedes frame scaled to be Parseval: three unit vectors at 120 degrees times sqrt(2/3).
const PARSEVAL: &str = r#"{"dim_h": 2, "blocks": [
    {"rows": 1, "entries_re": [0.0, 0.816496580927726], "entries_im": [0.0, 0.0]},
    {"rows": 1, "entries_re": [-0.7071067811865476, -0.408248290463863], "entries_im": [0.0, 0.0]},
    {"rows": 1, "entries_re": [0.7071067811865476, -0.408248290463863], "entries_im": [0.0, 0.0]}
]}"#;

#[test]
fn gen_then_verify_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out_dir = tmp.path().join("out");
    assert_eq!(code(&run(&["gen", "--config", p(&cfg), "--out", p(&out_dir)])), 0);
    for f in ["frame.json", "controller.json", "symbol.json"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let out = run(&[
        "verify",
        "--frame",
        p(&out_dir.join("frame.json")),
        "--controller",
        p(&out_dir.join("controller.json")),
        "--symbol",
        p(&out_dir.join("symbol.json")),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_parseval_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let frame = tmp.path().join("parseval.json");
    std::fs::write(&frame, PARSEVAL).unwrap();
    let out = run(&["verify", "--frame", p(&frame), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,passed,failures,runs,worst_measured,tolerance,min_slack\n"));
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("true")));
}

#[test]
fn verify_non_frame_fails_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let frame = tmp.path().join("deficient.json");
    std::fs::write(
        &frame,
        r#"{"dim_h": 2, "blocks": [{"rows": 1, "entries_re": [1.0, 0.0], "entries_im": [0.0, 0.0]}]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["verify", "--frame", p(&frame)])), 1);
}

#[test]
fn malformed_inputs_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let truncated = tmp.path().join("truncated.json");
    std::fs::write(&truncated, &PARSEVAL[..PARSEVAL.len() / 2]).unwrap();
    assert_eq!(code(&run(&["verify", "--frame", p(&truncated)])), 2);

    let missing = tmp.path().join("missing.json");
    assert_eq!(code(&run(&["verify", "--frame", p(&missing)])), 2);

    let bad_cfg = tmp.path().join("bad.json");
    std::fs::write(&bad_cfg, r#"{"seed": 1, "dim_h": 9, "block_dims": [2, 2], "condition_target": 2.0,
        "controller_kind": "identity", "symbol_kind": {"kind": "ones"}, "tol": 1e-9}"#)
        .unwrap();
    assert_eq!(code(&run(&["bench", "--config", p(&bad_cfg)])), 2);

    // controller whose stored certificate disagrees with its spectrum
    let ctl = tmp.path().join("controller.json");
    std::fs::write(
        &ctl,
        r#"{"rows": 2, "cols": 2, "entries_re": [2.0, 0.0, 0.0, 2.0], "entries_im": [0.0, 0.0, 0.0, 0.0],
            "cert": {"m": 1.0, "M": 2.0}}"#,
    )
    .unwrap();
    let frame = tmp.path().join("parseval.json");
    std::fs::write(&frame, PARSEVAL).unwrap();
    assert_eq!(code(&run(&["verify", "--frame", p(&frame), "--controller", p(&ctl)])), 2);

    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["bench", "--format", "xml"])), 2);
    assert_eq!(code(&run(&["bench", "--tol", "-1"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn verify_generated_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let report_path = tmp.path().join("report.json");
    let out = run(&["verify", "--config", p(&cfg), "--instances", "4", "--out", p(&report_path)]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["instances"], 4);
    assert_eq!(report["passed"], true);
}

#[test]
fn multiplier_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = run(&["multiplier", "--config", p(&cfg), "--p", "1,2,4"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schatten"].as_array().unwrap().len(), 3);
    assert!(report["controlled_op_norm"].as_f64().unwrap() <= report["norm_bound"].as_f64().unwrap() + 1e-9);

    let frame = tmp.path().join("parseval.json");
    std::fs::write(&frame, PARSEVAL).unwrap();
    let out = run(&["multiplier", "--frame", p(&frame), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("quantity,value\n"));
}

#[test]
fn bench_output_is_byte_identical_and_well_formed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = run(&["bench", "--config", p(&cfg), "--seed", "11"]);
    let b = run(&["bench", "--config", p(&cfg), "--seed", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("kind,kappa_S,kappa_L,iterations_plain,iterations_precond,final_residual,status")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7);
        // 17 significant digits in scientific notation
        let mantissa = cols[1].split('e').next().unwrap();
        assert_eq!(mantissa.replace(['.', '-'], "").len(), 17, "{}", cols[1]);
        assert_eq!(cols[6], "ok");
    }
    assert!(!text.contains('\r'));
}

#[test]
fn plain_iterations_grow_with_conditioning() {
    let mut previous = 0;
    for kappa in [10.0, 100.0, 1000.0] {
        let cfg = ExperimentConfig {
            seed: 3,
            dim_h: 10,
            block_dims: vec![4, 4, 4],
            condition_target: kappa,
            tol: 1e-8,
            ..ExperimentConfig::default()
        };
        let rows = bench(&cfg).unwrap();
        let plain = rows[0].iterations_plain;
        assert!(plain > previous, "kappa {kappa}: {plain} <= {previous}");
        previous = plain;
        let exact = rows.iter().find(|r| r.kind == "exact_sqrt_inverse").unwrap();
        assert!(exact.iterations_precond <= 2);
        assert!(exact.final_residual <= 10.0 * cfg.tol);
    }
}
