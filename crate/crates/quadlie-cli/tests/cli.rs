//! Drives the installed binary end to end: emit/verify roundtrips, witness
//! reporting, exit codes, and the full battery through the `suite` command.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exactlin::{int, Mat, Scalar};
use num_traits::Zero;
use tempfile::TempDir;

use quadlie::doublecentral::oscillator_context;
use quadlie::nilpotent2::{builtin_example, FixtureKind};
use quadlie_cli::format::{
    context_to_file, load_structure, read_json, show_matrix, structure_to_file, write_json,
    AlgebraFile, BracketEntry, ContextFile, DerivationsFile,
};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadlie"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf8")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("temp paths are utf8")
}

fn emit_example(dir: &TempDir, name: &str, file: &str) -> PathBuf {
    let path = dir.path().join(file);
    let out = run(&["example", name, "--emit", path_str(&path)]);
    assert_eq!(code(&out), 0, "emit failed: {}", stderr(&out));
    path
}

fn write_rows(dir: &TempDir, file: &str, rows: &Mat) -> PathBuf {
    let path = dir.path().join(file);
    write_json(&path, &show_matrix(rows)).expect("write matrix");
    path
}

#[test]
fn example_emit_then_verify_passes() {
    let dir = TempDir::new().unwrap();
    let n6 = emit_example(&dir, "N6", "n6.json");
    let out = run(&["verify", path_str(&n6)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("nilpotency class 2"), "{text}");
    assert!(text.contains("5 of 5 checks passed"), "{text}");
}

#[test]
fn emitted_file_reloads_to_identical_tensors() {
    let dir = TempDir::new().unwrap();
    let n6 = emit_example(&dir, "N6", "n6.json");
    let file: AlgebraFile = read_json(&n6).unwrap();
    for e in &file.brackets {
        assert!(e.j < e.k, "emitted entries are normalized to j < k");
    }
    let (data, form) = load_structure(&file).unwrap();

    let fixture = builtin_example("N6").unwrap();
    let FixtureKind::Quadratic(expected) = &fixture.kind else {
        panic!("N6 is quadratic");
    };
    assert_eq!(data.c, expected.alg().data().c);
    assert_eq!(form.as_ref().unwrap(), expected.form().matrix());

    let again = structure_to_file(&file.name, &data, form.as_ref(), file.tags.clone());
    assert_eq!(
        serde_json::to_string(&again).unwrap(),
        serde_json::to_string(&file).unwrap(),
        "re-emitting the loaded data is byte-stable"
    );
}

#[test]
fn verify_reports_jacobi_witness() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    let entry = |j, k, i, value: &str| BracketEntry {
        j,
        k,
        i,
        value: value.into(),
    };
    let file = AlgebraFile {
        name: "broken".into(),
        dim: 3,
        basis: vec!["x".into(), "y".into(), "z".into()],
        brackets: vec![
            entry(0, 1, 2, "1"),
            entry(1, 2, 0, "1"),
            entry(0, 2, 0, "-1"),
        ],
        form: None,
        tags: None,
    };
    write_json(&path, &file).unwrap();
    let out = run(&["verify", path_str(&path)]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("FAIL"), "{text}");
    assert!(text.contains("Jacobi"), "{text}");
    assert!(text.contains("triple (0,1,2)"), "{text}");
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    let out = run(&["verify", path_str(&garbage)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("input error"), "{}", stderr(&out));

    let base = AlgebraFile {
        name: "t".into(),
        dim: 2,
        basis: vec!["x".into()],
        brackets: vec![],
        form: None,
        tags: None,
    };
    let labels = dir.path().join("labels.json");
    write_json(&labels, &base).unwrap();
    let out = run(&["verify", path_str(&labels)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("labels"), "{}", stderr(&out));

    let zero_denom = AlgebraFile {
        name: "t".into(),
        dim: 2,
        basis: vec!["x".into(), "y".into()],
        brackets: vec![BracketEntry {
            j: 0,
            k: 1,
            i: 0,
            value: "1/0".into(),
        }],
        form: None,
        tags: None,
    };
    let denom = dir.path().join("denom.json");
    write_json(&denom, &zero_denom).unwrap();
    let out = run(&["verify", path_str(&denom)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("denominator"), "{}", stderr(&out));

    let contradictory = AlgebraFile {
        name: "t".into(),
        dim: 2,
        basis: vec!["x".into(), "y".into()],
        brackets: vec![
            BracketEntry {
                j: 0,
                k: 1,
                i: 0,
                value: "1".into(),
            },
            BracketEntry {
                j: 1,
                k: 0,
                i: 0,
                value: "1".into(),
            },
        ],
        form: None,
        tags: None,
    };
    let skew = dir.path().join("skew.json");
    write_json(&skew, &contradictory).unwrap();
    let out = run(&["verify", path_str(&skew)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("skew"), "{}", stderr(&out));
}

#[test]
fn verify_plain_algebra_without_form() {
    let dir = TempDir::new().unwrap();
    let heis = emit_example(&dir, "heis(1)", "heis.json");
    let out = run(&["verify", path_str(&heis)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("nilpotency class 2"), "{text}");
    assert!(text.contains("2 of 2 checks passed"), "{text}");
}

#[test]
fn extend_rejects_a_map_that_is_not_a_derivation() {
    let dir = TempDir::new().unwrap();
    let sl2 = emit_example(&dir, "sl2", "sl2.json");
    let ders = dir.path().join("ders.json");
    write_json(
        &ders,
        &DerivationsFile {
            dim: 3,
            maps: vec![show_matrix(&Mat::identity(3))],
        },
    )
    .unwrap();
    let out = run(&["extend", path_str(&sl2), "--derivations", path_str(&ders)]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("FAIL"), "{text}");
    assert!(text.contains("skew derivations"), "{text}");
}

#[test]
fn classify_detects_mixed_kernel_and_reduces() {
    let dir = TempDir::new().unwrap();
    let base = AlgebraFile {
        name: "ab2".into(),
        dim: 2,
        basis: vec!["x".into(), "y".into()],
        brackets: vec![],
        form: Some(show_matrix(&Mat::identity(2))),
        tags: None,
    };
    let base_path = dir.path().join("base.json");
    write_json(&base_path, &base).unwrap();

    let ders_path = dir.path().join("ders.json");
    write_json(
        &ders_path,
        &DerivationsFile {
            dim: 2,
            maps: vec![show_matrix(&Mat::zeros(2, 2)); 2],
        },
    )
    .unwrap();

    let metric = Mat::from_int_rows(&[
        &[1, 0, 1, 0],
        &[0, 1, 0, 0],
        &[1, 0, 0, 0],
        &[0, 0, 0, 1],
    ]);
    let metric_path = write_rows(&dir, "metric.json", &metric);

    let out = run(&[
        "classify",
        path_str(&base_path),
        "--derivations",
        path_str(&ders_path),
        "--metric",
        path_str(&metric_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("kernel class: Mixed"), "{text}");
    assert!(text.contains("kernel radical has dimension 1"), "{text}");
    assert!(
        text.contains("pass  mixed kernel reduces to an isotropic sub-extension"),
        "{text}"
    );
}

#[test]
fn extract_rebuilds_the_nine_dimensional_extension() {
    let dir = TempDir::new().unwrap();
    let fixture = builtin_example("G9").unwrap();
    let FixtureKind::Extension(ext, form) = &fixture.kind else {
        panic!("G9 is an extension");
    };

    let base_path = dir.path().join("base.json");
    write_json(
        &base_path,
        &structure_to_file(
            "N6",
            ext.base().alg().data(),
            Some(ext.base().form().matrix()),
            None,
        ),
    )
    .unwrap();

    let ders_path = dir.path().join("ders.json");
    write_json(
        &ders_path,
        &DerivationsFile {
            dim: ext.base().dim(),
            maps: ext.derivations().iter().map(|d| show_matrix(&d.matrix)).collect(),
        },
    )
    .unwrap();

    let metric_path = write_rows(&dir, "metric.json", form.matrix());

    let out = run(&[
        "extract",
        path_str(&base_path),
        "--derivations",
        path_str(&ders_path),
        "--metric",
        path_str(&metric_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("core dimension 3, kernel rank 3"), "{text}");
    assert!(
        text.contains("pass  rebuilt bracket matches the original through the isometry"),
        "{text}"
    );
    assert!(
        text.contains("pass  rebuilt form matches the original through the isometry"),
        "{text}"
    );
}

fn oscillator_context_file(m: usize) -> ContextFile {
    let d = Mat::from_fn(2 * m, 2 * m, |i, j| {
        if i == j + m {
            int(1)
        } else if j == i + m {
            int(-1)
        } else {
            Scalar::zero()
        }
    });
    let ctx = oscillator_context(m, &d).expect("oscillator context is valid");
    let h = structure_to_file(
        "core",
        ctx.h().alg().data(),
        Some(ctx.h().form().matrix()),
        None,
    );
    let phi: Vec<Mat> = ctx.phi().iter().map(|l| l.matrix.clone()).collect();
    context_to_file(h, ctx.r(), &phi, ctx.psi(), ctx.omega())
}

#[test]
fn double_extend_certifies_the_missing_quotient_metric() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ctx1.json");
    write_json(&path, &oscillator_context_file(1)).unwrap();
    let out = run(&["double-extend", path_str(&path), "--search-metric"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("total dimension 4"), "{text}");
    assert!(text.contains("no: candidate space"), "{text}");
}

#[test]
fn double_extend_is_inconclusive_past_the_certificate_bound() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ctx6.json");
    write_json(&path, &oscillator_context_file(6)).unwrap();
    let out = run(&["double-extend", path_str(&path), "--search-metric"]);
    assert_eq!(code(&out), 3, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("total dimension 14"), "{text}");
    assert!(text.contains("undecided"), "{text}");
}

#[test]
fn two_step_recovers_the_matrix_algebra() {
    let dir = TempDir::new().unwrap();
    let n6 = emit_example(&dir, "N6", "n6.json");
    let mu = write_rows(&dir, "mu.json", &Mat::identity(3));
    let out = run(&["two-step", path_str(&n6), "--mu", path_str(&mu)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("matrix algebra has dimension 3"), "{text}");
    assert!(text.contains("perfect: true"), "{text}");
    assert!(text.contains("centerless: true"), "{text}");
    assert!(text.contains("A_1 = [["), "{text}");
}

#[test]
fn json_report_is_stable_across_reruns() {
    let dir = TempDir::new().unwrap();
    let n6 = emit_example(&dir, "N6", "n6.json");
    let first = run(&["verify", path_str(&n6), "--json"]);
    let second = run(&["--json", "verify", path_str(&n6)]);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&second));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(parsed["checks"].as_array().unwrap().len(), 5);
    assert!(parsed["command"].as_str().unwrap().starts_with("verify"));
    assert!(!stdout(&first).contains(" ms"));
}

#[test]
fn suite_command_runs_the_battery_green() {
    let out = run(&["suite"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("criterion 8"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    assert!(text.contains("8 of 8 checks passed"), "{text}");
}

#[test]
fn unknown_example_exits_two() {
    let out = run(&["example", "does-not-exist"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("input error"), "{}", stderr(&out));
}
