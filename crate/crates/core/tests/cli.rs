use std::io::Write;
use std::process::Command;

use pencilkit::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["pencilkit"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn list_names_every_fixture() {
    let (code, out, _) = call(&["examples", "list"]);
    assert_eq!(code, 0);
    for name in pencilkit::fixtures::fixture_names() {
        assert!(out.contains(name), "{name}");
    }
}

#[test]
fn missing_file_exits_with_input_error() {
    let (code, _, err) = call(&["analyze", "/nonexistent/pencil.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("/nonexistent/pencil.json"));
}

#[test]
fn analyze_reads_a_pencil_file() {
    let dir = std::env::temp_dir().join(format!("pencilkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("l1.json");
    let json = r#"{"format":1,"space_in":{"finite":2},"space_out":{"finite":1},
        "E":{"op":"dense","row_start":1,"col_start":1,"rows":[[[1,0],[0,0]]]},
        "A":{"op":"dense","row_start":1,"col_start":1,"rows":[[[0,0],[1,0]]]}}"#;
    std::fs::File::create(&path)
        .unwrap()
        .write_all(json.as_bytes())
        .unwrap();
    let (code, out, err) = call(&["analyze", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["right_minimal_index"], 1);
    assert_eq!(v["points"][0]["verdict"], "point_singular");
}

#[test]
fn spectra_csv_has_one_row_per_node() {
    let (code, out, _) = call(&[
        "spectra",
        "--fixture",
        "mult_by_E",
        "--n",
        "4",
        "--steps",
        "3,2",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "re,im,sigma_min,sigma_min_adjoint,verdict");
    assert_eq!(rows.len(), 7);
}

#[test]
fn distance_reports_caveat_for_infinite_spaces() {
    let (code, out, _) = call(&[
        "distance",
        "--fixture",
        "diag_reciprocal",
        "--sections",
        "2,4",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("# "));
    assert!(out.contains("2,1.4142135623730951e0") || out.contains("2,7.0710678118654757e-1"));
}

#[test]
fn dh_check_uses_the_dh_casting() {
    let (code, out, _) = call(&["dh-check", "--fixture", "diag_reciprocal", "--n", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("structure ok: true"));
    let (code, _, err) = call(&["dh-check", "--fixture", "mult_by_E"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
}

#[test]
fn simulate_writes_csv() {
    let (code, out, _) = call(&[
        "simulate",
        "--fixture",
        "shift_identity",
        "--times",
        "0,0.5,1",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("t,x1_re,x1_im"));
    assert_eq!(lines.count(), 3);
    let (code, _, err) = call(&["simulate", "--fixture", "facfac", "--times", "0,0.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("radius"));
}

#[test]
fn chains_and_approx_run() {
    let (code, out, _) = call(&["chains", "--fixture", "kronecker_L", "--k", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("right: minimal index 3"));
    let (code, out, _) = call(&[
        "approx",
        "--fixture",
        "approxchain",
        "--n",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        out.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 3 * 4
    );
}

#[test]
fn binary_matches_in_process_run() {
    let exe = env!("CARGO_BIN_EXE_pencilkit");
    let o = Command::new(exe)
        .args(["examples", "run", "kronecker_L"])
        .output()
        .unwrap();
    let (code, out, _) = call(&["examples", "run", "kronecker_L"]);
    assert_eq!(o.status.code(), Some(code));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), out);
    let bad = Command::new(exe)
        .args(["examples", "run", "nope"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
