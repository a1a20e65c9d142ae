use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn tfock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfock"))
        .args(args)
        .env_remove("TFOCK_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = tfock(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| v.to_string().parse().unwrap())
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn schema(name: &str) -> Value {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "schemas",
        &format!("{name}.schema.json"),
    ]
    .iter()
    .collect();
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(name: &str, instance: &Value) {
    let validator = jsonschema::validator_for(&schema(name)).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{instance}");
}

#[test]
fn measure_bernoulli() {
    let v = json(&["measure", "--m", "1", "--t", "0.5"]);
    let atoms = v["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    for (a, z) in atoms.iter().zip([-1.0, 1.0]) {
        assert!((f(&a["z"]) - z).abs() < 1e-12 && (f(&a["b"]) - 0.5).abs() < 1e-12);
    }
    assert_eq!(v["m"], 1);
}

#[test]
fn measure_csv_free_case() {
    let text = ok_stdout(&["measure", "--m", "2", "--t", "1", "--format", "csv"]);
    assert!(text.starts_with("z,b\n") && !text.contains('\r'));
    let rows = csv_rows(&text);
    let expect = [(-2f64.sqrt(), 0.25), (0.0, 0.5), (2f64.sqrt(), 0.25)];
    for (row, (z, b)) in rows.iter().zip(expect) {
        assert!((row[0].parse::<f64>().unwrap() - z).abs() < 1e-12);
        assert!((row[1].parse::<f64>().unwrap() - b).abs() < 1e-12);
    }
}

/// Weights from the 3×3 Jacobi matrix with off-diagonal (1, 2): eigenvalues
/// 0, ±√5 with first eigenvector components² 4/5 and 1/10.
#[test]
fn measure_large_t() {
    let v = json(&["measure", "--m", "2", "--t", "4"]);
    let atoms = v["atoms"].as_array().unwrap();
    let s5 = 5f64.sqrt();
    for (a, (z, b)) in atoms.iter().zip([(-s5, 0.1), (0.0, 0.8), (s5, 0.1)]) {
        assert!((f(&a["z"]) - z).abs() < 1e-12 && (f(&a["b"]) - b).abs() < 1e-12);
    }
}

#[test]
fn spectrum_examples() {
    let v = json(&["spectrum", "--m", "2", "--t", "0.25", "--L", "3"]);
    let pts: Vec<f64> = v["points"].as_array().unwrap().iter().map(f).collect();
    let s = 1.25f64.sqrt();
    for (p, e) in pts.iter().zip([-s, -0.5, 0.0, 0.5, s]) {
        assert!((p - e).abs() < 1e-12);
    }
    assert_eq!(v["verified_window"], 3);

    let v = json(&["spectrum", "--full", "--t", "0.25"]);
    assert!((f(&v["band"][0]) + 1.0).abs() < 1e-15 && (f(&v["band"][1]) - 1.0).abs() < 1e-15);
    assert!((f(&v["outliers"][1]) - 1.1547005383792515).abs() < 1e-12);

    let v = json(&["spectrum", "--m", "1", "--t", "9"]);
    let pts: Vec<f64> = v["points"].as_array().unwrap().iter().map(f).collect();
    assert_eq!(pts.len(), 3);
    assert!((pts[0] + 1.0).abs() < 1e-12 && pts[1].abs() < 1e-12 && (pts[2] - 1.0).abs() < 1e-12);
}

#[test]
fn cesaro_examples() {
    let v = json(&[
        "cesaro", "--word", "c0", "--m", "1", "--t", "1", "--n", "4,16,64", "--L", "80",
    ]);
    let norms: Vec<f64> = v["curve"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| f(&p["norm"]))
        .collect();
    for (x, e) in norms.iter().zip([0.5, 0.25, 0.125]) {
        assert!((x - e).abs() < 1e-12);
    }
    assert!((f(&v["slope"]) + 0.5).abs() < 1e-9);

    let v = json(&[
        "cesaro", "--word", "c0 a0", "--m", "2", "--t", "0.25", "--n", "64", "--L", "80",
    ]);
    let sqrt_nt = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["form"] == "sqrt-nt")
        .unwrap();
    assert!((f(&sqrt_nt["bound"]) - 4.0).abs() < 1e-12);
    assert!(f(&sqrt_nt["measured_norm"]) <= 4.0);
    assert_eq!(sqrt_nt["holds"], true);

    let v = json(&[
        "cesaro", "--word", "p1", "--m", "2", "--t", "0.5", "--n", "1,8,64",
    ]);
    assert_eq!(v["fixed_point"], true);
    assert!(v["curve"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| (f(&p["norm"]) - 1.0).abs() < 1e-12));
    assert!(v["reports"].as_array().unwrap().is_empty());
}

#[test]
fn expectation_and_state() {
    let v = json(&["expectation", "--word", "a1 c1", "--m", "3", "--t", "0.7"]);
    let c: Vec<f64> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| f(&x["re"]))
        .collect();
    assert_eq!(c.len(), 4);
    assert!(
        (c[0] - 1.0).abs() < 1e-15
            && (c[1] - 0.7).abs() < 1e-15
            && (c[2] - 0.7).abs() < 1e-15
            && c[3] == 0.0
    );

    let v = json(&["expectation", "--full", "--word", "a1 c1", "--t", "1"]);
    assert_eq!(v["scalar"], true);
    let v = json(&["expectation", "--full", "--word", "c1", "--t", "0.5"]);
    assert_eq!(f(&v["vacuum"]["re"]), 0.0);

    // ω = 0.2 ω_0 + 0.3 ω_1 + 0.5 ω_2 on a1 a1† = P_0 + 0.5 P_1: 0.2 + 0.15.
    let v = json(&[
        "state",
        "--word",
        "a1 c1",
        "--m",
        "2",
        "--t",
        "0.5",
        "--weights",
        "0.2,0.3,0.5",
    ]);
    assert!((f(&v["value"]["re"]) - 0.35).abs() < 1e-15);
}

#[test]
fn outputs_validate_against_schemas() {
    let cases: &[(&str, &[&str])] = &[
        ("measure", &["measure", "--m", "3", "--t", "0.3"]),
        ("spectrum", &["spectrum", "--m", "2", "--t", "2"]),
        ("spectrum", &["spectrum", "--full", "--t", "0.1"]),
        (
            "cesaro",
            &[
                "cesaro", "--word", "c0 a1", "--m", "2", "--t", "0.5", "--n", "2,4",
            ],
        ),
        (
            "cesaro",
            &[
                "cesaro", "--word", "p0", "--m", "1", "--t", "0.5", "--n", "3",
            ],
        ),
        (
            "expectation",
            &[
                "expectation",
                "--word",
                "a0 p1 c0",
                "--m",
                "2",
                "--t",
                "0.5",
            ],
        ),
        (
            "expectation",
            &[
                "expectation",
                "--full",
                "--word",
                "a1 a2 c2 c1",
                "--t",
                "0.3",
            ],
        ),
        (
            "state",
            &[
                "state",
                "--word",
                "p1",
                "--m",
                "1",
                "--t",
                "2",
                "--weights",
                "0.5,0.5",
            ],
        ),
        ("check", &["check", "--suite", "wick", "--seed", "3"]),
    ];
    for (name, args) in cases {
        assert_valid(name, &json(args));
    }
    // Schemas reject a mangled measure.
    let mut v = json(&["measure", "--m", "1", "--t", "1"]);
    v["atoms"][0].as_object_mut().unwrap().remove("b");
    assert!(!jsonschema::is_valid(&schema("measure"), &v));
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        &["check", "--suite", "all", "--seed", "7"][..],
        &[
            "cesaro", "--word", "c0 a1", "--m", "2", "--t", "0.3", "--n", "4,8", "--seed", "5",
            "--format", "csv",
        ],
        &["measure", "--m", "7", "--t", "0.6"],
    ] {
        assert_eq!(tfock(args).stdout, tfock(args).stdout, "{args:?}");
    }
}

#[test]
fn check_all_passes_and_mutation_fails() {
    let out = tfock(&["check", "--suite", "all", "--seed", "7"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);

    let out = tfock(&["check", "--suite", "wick", "--mutation", "contraction-t"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn csv_conventions() {
    let text = ok_stdout(&["check", "--suite", "spectral", "--format", "csv"]);
    assert!(text.starts_with("suite,name,status,detail\n"));
    assert!(!text.contains('\r'));
    let text = ok_stdout(&["spectrum", "--full", "--t", "0.25", "--format", "csv"]);
    assert_eq!(text.lines().next(), Some("kind,value"));
    for line in text.lines().skip(1) {
        let value = line.split(',').nth(1).unwrap();
        assert!(
            value.contains('.') && value.parse::<f64>().is_ok(),
            "{value}"
        );
    }
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("tfock-out-{}.json", std::process::id()));
    let out = tfock(&[
        "measure",
        "--m",
        "1",
        "--t",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["atoms"].as_array().unwrap().len(), 2);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["measure", "--t", "1"][..],
        &["measure", "--m", "0", "--t", "1"],
        &["measure", "--m", "1", "--t", "-1"],
        &["cesaro", "--word", "x7", "--m", "1", "--t", "1", "--n", "2"],
        &[
            "cesaro", "--word", "c5", "--m", "1", "--t", "1", "--n", "4", "--L", "6",
        ],
        &[
            "state",
            "--word",
            "p0",
            "--m",
            "1",
            "--t",
            "1",
            "--weights",
            "0.7,0.7",
        ],
        &["frobnicate"],
    ] {
        assert_eq!(tfock(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn dimension_cap_from_environment() {
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_tfock"))
            .args(["spectrum", "--m", "2", "--t", "1", "--L", "3"])
            .env("TFOCK_DIM_CAP", cap)
            .output()
            .unwrap()
    };
    assert_eq!(run("10").status.code(), Some(2));
    assert_eq!(run("100").status.code(), Some(0));
}
