use std::path::Path;
use std::process::{Command, Output};

use p4lab_core::io::{read_csv, TrajectoryDocument};
use p4lab_core::{integrate_equation, EquationId, Span, State, StepControl};
use serde_json::Value;
use tempfile::TempDir;

fn p4lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p4lab"))
        .args(args)
        .env_remove("P4LAB_CONFIG")
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn integrate_writes_document_and_summary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run.json");
    let o = p4lab(&[
        "integrate",
        "--eq",
        "phalf",
        "--t0",
        "0",
        "--y0",
        "0",
        "--v0",
        "0.5",
        "--to",
        "-40",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("termination: ReachedEnd"));
    let doc = TrajectoryDocument::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.equation, EquationId::Phalf);
    assert_eq!(doc.samples.last().unwrap().t, -40.0);

    let direct = integrate_equation(
        EquationId::Phalf,
        State::new(0.0, 0.0, 0.5),
        Span::new(0.0, -40.0).unwrap(),
        &StepControl::default(),
    )
    .unwrap();
    assert_eq!(doc.trajectory().unwrap(), direct);
}

#[test]
fn full_equation_at_zero_is_refused_with_hint() {
    let o = p4lab(&[
        "integrate",
        "--eq",
        "p",
        "--t0",
        "0",
        "--y0",
        "0",
        "--v0",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("near-zero denominator"), "{err}");
    assert!(err.contains("--eq phalf"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn blow_up_summary_carries_estimate() {
    let o = p4lab(&[
        "integrate",
        "--eq",
        "phalf",
        "--y0",
        "0",
        "--v0",
        "2",
        "--to",
        "5",
    ]);
    assert!(o.status.success());
    let err = text(&o.stderr);
    assert!(err.contains("termination: BlowUp(t_est="), "{err}");
    let doc = TrajectoryDocument::from_json(&text(&o.stdout)).unwrap();
    assert!(doc.termination.is_blow_up());
}

#[test]
fn bisect_finds_origin_threshold_deterministically() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = p4lab(&[
            "bisect",
            "--eq",
            "phalf",
            "--t0",
            "0",
            "--y0",
            "0",
            "--lo",
            "1.0",
            "--hi",
            "1.3",
            "--out",
            path_str(&out),
        ]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        assert!(text(&o.stdout).starts_with("bracket: [1.169868"));
        std::fs::read(out).unwrap()
    };
    let first = run("a.json");
    assert_eq!(first, run("b.json"));
    let v: Value = serde_json::from_slice(&first).unwrap();
    let lo = v["threshold"]["bracket"][0].as_f64().unwrap();
    let hi = v["threshold"]["bracket"][1].as_f64().unwrap();
    assert!(
        lo >= 1.1698680 && hi <= 1.1698692 && hi - lo <= 1e-10,
        "[{lo}, {hi}]"
    );
    assert_eq!(v["family"]["window"]["t1"], -40.0);
}

#[test]
fn bisect_failures_exit_one_or_two() {
    let same = p4lab(&["bisect", "--y0", "0", "--lo", "0.2", "--hi", "0.6"]);
    assert_eq!(same.status.code(), Some(1));
    assert!(text(&same.stderr).contains("both ends classify as OscLower"));
    let missing = p4lab(&["bisect", "--y0", "0", "--lo", "0.2"]);
    assert_eq!(missing.status.code(), Some(2));
    let reversed = p4lab(&["bisect", "--y0", "0", "--lo", "1.3", "--hi", "1.0"]);
    assert_eq!(reversed.status.code(), Some(2));
}

#[test]
fn regions_emit_five_polylines() {
    let o = p4lab(&["regions", "--tmin", "-10", "--tmax", "1", "--n", "500"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let lines = v["polylines"].as_array().unwrap();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0]["points"].as_array().unwrap().len(), 500);
    for line in &lines[1..] {
        let pts = line["points"].as_array().unwrap();
        assert!(!pts.is_empty());
        assert!(pts
            .iter()
            .all(|p| p[0].as_f64().unwrap() <= 0.0 && p[1].is_f64()));
    }
    let csv = p4lab(&[
        "regions", "--tmin", "-1", "--tmax", "1", "--n", "3", "--format", "csv",
    ]);
    assert!(text(&csv.stdout).starts_with("curve,t,y\nsigma=0,-1,0\n"));
    assert_eq!(p4lab(&["regions", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn classify_unit_family() {
    let o = p4lab(&[
        "classify", "--eq", "phalf", "--t0", "0", "--y0", "1", "--v0", "0.0", "--to", "-40",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class"]["tag"], "OscUpper");
    assert_eq!(v["schema"], "p4lab/1");
    assert!(text(&o.stderr).contains("class: OscUpper"));
    let csv = p4lab(&["classify", "--v0", "0.5", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(2));
}

#[test]
fn flags_override_config_file_and_env_fallback() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "eq = \"phalf\"\ny0 = 0.0\nv0 = 0.5\nto = -40.0\nrtol = 1e-10\n",
    )
    .unwrap();

    let tag = |o: &Output| {
        assert!(o.status.success(), "{}", text(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["class"]["tag"].as_str().unwrap().to_string()
    };
    let from_file = p4lab(&["classify", "--config", path_str(&cfg)]);
    assert_eq!(tag(&from_file), "OscLower");
    let overridden = p4lab(&["classify", "--config", path_str(&cfg), "--v0", "1.2"]);
    assert_eq!(tag(&overridden), "BlowUpNeg");

    let via_env = Command::new(env!("CARGO_BIN_EXE_p4lab"))
        .args(["classify", "--v0", "1.2"])
        .env("P4LAB_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(tag(&via_env), "BlowUpNeg");
    let v: Value = serde_json::from_slice(&via_env.stdout).unwrap();
    assert_eq!(v["span"]["t1"], -40.0);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "v0 = 0.5\nspeed = 3\n").unwrap();
    assert_eq!(
        p4lab(&["classify", "--config", path_str(&bad)])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        p4lab(&["classify", "--config", path_str(&missing)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn csv_and_json_round_trips_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("run.csv");
    let json = dir.path().join("run.json");
    let base = ["integrate", "--y0", "0.3", "--v0", "-0.4", "--to", "-12"];
    let o = p4lab(&[&base[..], &["--format", "csv", "--out", path_str(&csv)]].concat());
    assert!(o.status.success());
    let o = p4lab(&[&base[..], &["--out", path_str(&json)]].concat());
    assert!(o.status.success());
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    let doc = TrajectoryDocument::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rows.len(), doc.samples.len());
    for (r, s) in rows.iter().zip(&doc.samples) {
        assert_eq!(
            (r.t.to_bits(), r.y.to_bits(), r.v.to_bits()),
            (s.t.to_bits(), s.y.to_bits(), s.v.to_bits())
        );
    }
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("t,y,v\n"));
}

#[test]
fn downsampled_integration_respects_limit() {
    let o = p4lab(&["integrate", "--v0", "0.65", "--max-samples", "300"]);
    assert!(o.status.success());
    let doc = TrajectoryDocument::from_json(&text(&o.stdout)).unwrap();
    assert!(doc.samples.len() <= 300);
    assert!(text(&o.stderr).contains("samples: "));
}

#[test]
fn sweep_table() {
    let o = p4lab(&[
        "sweep",
        "--y0",
        "0",
        "--values",
        "0.2,0.65,1.1,1.2,2.0",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let table = text(&o.stdout);
    let classes: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(
        classes,
        ["OscLower", "OscLower", "OscLower", "BlowUpNeg", "BlowUpNeg"]
    );
    let grid = p4lab(&["sweep", "--vmin", "0.1", "--vmax", "0.3", "--steps", "3"]);
    let v: Value = serde_json::from_slice(&grid.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(p4lab(&["sweep"]).status.code(), Some(2));
}

#[test]
fn transform_and_zero_checks() {
    let dir = TempDir::new().unwrap();
    let sigma = dir.path().join("sigma.json");
    let s = dir.path().join("s.json");
    let back = dir.path().join("back.json");
    assert!(p4lab(&[
        "integrate",
        "--y0",
        "1",
        "--v0",
        "1",
        "--to",
        "-15",
        "--out",
        path_str(&sigma)
    ])
    .status
    .success());

    let o = p4lab(&[
        "transform",
        "--input",
        path_str(&sigma),
        "--op",
        "square",
        "--out",
        path_str(&s),
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("phalf -> p"));
    assert_eq!(json_file(&s)["equation"], "p");

    let z = p4lab(&["zeros", "--input", path_str(&s)]);
    assert!(z.status.success());
    let v: Value = serde_json::from_slice(&z.stdout).unwrap();
    assert_eq!(v["zeros"].as_array().unwrap().len(), 1);
    assert_eq!(v["zeros"][0]["sign_change"], false);
    assert!(v["report"]["violations"].as_array().unwrap().is_empty());

    let load = |p: &Path| {
        TrajectoryDocument::from_json(&std::fs::read_to_string(p).unwrap())
            .unwrap()
            .trajectory()
            .unwrap()
    };
    let original = load(&sigma);
    for (sign, factor) in [("minus", 1.0), ("plus", -1.0)] {
        let o = p4lab(&[
            "transform",
            "--input",
            path_str(&s),
            "--op",
            "signed-sqrt",
            "--left-sign",
            sign,
            "--out",
            path_str(&back),
        ]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        let rooted = load(&back);
        for t in [-0.5, -3.0, -10.0] {
            let (a, b) = (rooted.eval(t).unwrap().0, original.eval(t).unwrap().0);
            assert!((a - factor * b).abs() < 1e-6, "{sign} t={t}: {a} vs {b}");
        }
    }

    let rev = p4lab(&["transform", "--input", path_str(&sigma), "--op", "reverse"]);
    assert_eq!(
        serde_json::from_slice::<Value>(&rev.stdout).unwrap()["equation"],
        "pbarhalf"
    );
    let sq_of_p = p4lab(&["transform", "--input", path_str(&s), "--op", "square"]);
    assert_eq!(sq_of_p.status.code(), Some(2));
    let missing = p4lab(&[
        "transform",
        "--input",
        "/nonexistent.json",
        "--op",
        "negate",
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn zeros_of_integrated_half_run() {
    let o = p4lab(&["zeros", "--y0", "1", "--v0", "1.5", "--to", "-15"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["zeros"][0]["sign_change"], true);
    assert!(v["report"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["integrate", "--bogus"][..],
        &["integrate", "--v0", "x"],
        &["integrate"],
        &["integrate", "--v0", "1", "--rtol", "-1"],
        &["integrate", "--v0", "1", "--eq", "q"],
        &["integrate", "--v0", "1", "--to", "0"],
        &[],
    ] {
        assert_eq!(p4lab(args).status.code(), Some(2), "{args:?}");
    }
    assert!(p4lab(&["--help"]).status.success());
}
