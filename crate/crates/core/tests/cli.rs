use std::path::PathBuf;
use std::process::Command;

use catq::cli::{run_with, EXIT_DIAGNOSTICS, EXIT_INCONSISTENT, EXIT_OK, EXIT_RESOURCE_LIMIT};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("catq").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn with_extra(base: &str, extra: &str) -> tempfile::NamedTempFile {
    let mut src = std::fs::read_to_string(data(base)).unwrap();
    src.push_str(extra);
    let f = tempfile::Builder::new().suffix(".catq").tempfile().unwrap();
    std::fs::write(f.path(), src).unwrap();
    f
}

#[test]
fn empty_file_checks_silently() {
    let f = tempfile::NamedTempFile::new().unwrap();
    let (code, out, err) = run(&["check", f.path().to_str().unwrap()]);
    assert_eq!((code, out.as_str(), err.as_str()), (EXIT_OK, "", ""));
}

#[test]
fn collision_exits_three() {
    let (code, _, err) = run(&["check", data("collide.catq").to_str().unwrap()]);
    assert_eq!(code, EXIT_INCONSISTENT);
    assert!(err.contains("Collision(20,30)"), "{err}");
}

#[test]
fn binary_reports_collision() {
    let status = Command::new(env!("CARGO_BIN_EXE_catq"))
        .arg("check")
        .arg(data("collide.catq"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_INCONSISTENT));
    assert!(String::from_utf8_lossy(&status.stderr).contains("Collision(20,30)"));
}

#[test]
fn eval_sigma_markdown() {
    let f = with_extra("running.catq", "\ninstance J = sigma F I\n");
    let (code, out, err) = run(&[
        "eval",
        f.path().to_str().unwrap(),
        "--show",
        "J",
        "--format",
        "markdown",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.starts_with("## N\n"), "{out}");
    for row in [
        "| 1 | Alice | 100 | 20 |",
        "| 2 | Bob | 250 | 20 |",
        "| 3 | Sue | 300 | 30 |",
    ] {
        assert!(out.contains(row), "{out}");
    }
}

#[test]
fn eval_json_of_several_instances() {
    let (code, out, _) = run(&[
        "eval",
        data("triptych.catq").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["PiI"]["entities"]["N"].as_array().unwrap().len(), 9);
    assert_eq!(v["SigmaI"]["entities"]["N"][0]["age"], "age(1)");
    assert_eq!(v["DeltaJ"]["entities"]["N2"][2]["age"], 30);
}

#[test]
fn unknown_instance_is_an_error() {
    let (code, _, err) = run(&[
        "eval",
        data("running.catq").to_str().unwrap(),
        "--show",
        "F",
    ]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(err.contains("`F` is not an instance"), "{err}");
}

#[test]
fn syntax_errors_carry_positions() {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(
        f.path(),
        "schema S = literal : Ty {\n  entities\n    N1 ->\n}\n",
    )
    .unwrap();
    let (code, _, err) = run(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(err.contains(":3:"), "{err}");
}

#[test]
fn match_prints_a_valid_mapping() {
    let (code, out, _) = run(&[
        "match",
        "--source",
        "S",
        "--target",
        "T",
        data("running.catq").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("N1 -> N"), "{out}");
    assert!(out.contains("f -> lambda x:N. x"), "{out}");
    assert!(out.contains("// validated"), "{out}");
}

#[test]
fn match_rejects_bad_cutoff() {
    let (code, _, err) = run(&[
        "match",
        "--source",
        "S",
        "--target",
        "T",
        "--cutoff",
        "2",
        data("running.catq").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(err.contains("cutoff"), "{err}");
}

#[test]
fn invert_reports_absence() {
    let (code, out, _) = run(&[
        "invert",
        "--mapping",
        "F",
        data("running.catq").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("no inverse within depth 3"), "{out}");
}

#[test]
fn invert_identity() {
    let f = with_extra("running.catq", "\nmapping G = identity S\n");
    let (code, out, _) = run(&["invert", "--mapping", "G", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("mapping G_inv = literal : S -> S"), "{out}");
}

#[test]
fn resource_limits_exit_two() {
    let f = with_extra("running.catq", "\ninstance J = sigma F I\n");
    let (code, _, err) = run(&["--max-classes", "2", "check", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_RESOURCE_LIMIT, "{err}");
}

#[test]
fn export_writes_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&[
        "export",
        data("triptych.catq").to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(dir.path().join("PiI.N.csv")).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("ID,name,salary,age\n"));
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("eval"));
}

#[test]
fn eval_reports_collision() {
    let (code, out, err) = run(&["eval", data("collide.catq").to_str().unwrap()]);
    assert_eq!(code, EXIT_INCONSISTENT);
    assert!(out.contains("| ID | age |"), "{out}");
    assert!(err.contains("I: inconsistent: Collision(20,30)"), "{err}");
}

#[test]
fn output_is_deterministic() {
    let file = data("triptych.catq");
    for format in ["markdown", "csv", "json"] {
        let args = ["eval", file.to_str().unwrap(), "--format", format];
        assert_eq!(run(&args), run(&args));
    }
}

#[test]
fn zero_limits_are_rejected() {
    let (code, _, err) = run(&[
        "--max-rounds",
        "0",
        "check",
        data("running.catq").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(err.starts_with("error:"), "{err}");
}
