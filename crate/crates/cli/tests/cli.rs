use std::fs;
use std::path::Path;
use std::process::Command;

use horizon_lab::config::{parse_config, to_json, ChartConfig, HomogeneityConfig};
use horizon_lab::examples::{emit_example, list_examples, ExampleParams};
use horizon_lab::{build_problem, ConfigError};
use serde_json::Value;

const MINIMAL: &str = r#"{
  "schema": 1,
  "field": {"variables": ["y"], "components": [[{"coeff": 1, "exponents": [2]}]]},
  "homogeneity": {"mode": "explicit", "alpha": [1], "k": 1},
  "chart": {"kind": "parabolic"},
  "runs": [{"initial": [1.0]}]
}"#;

fn pointer(e: ConfigError) -> String {
    match e {
        ConfigError::Schema { pointer, .. } => pointer,
        other => panic!("expected a schema error, got {other}"),
    }
}

fn edit(f: impl FnOnce(&mut Value)) -> Vec<u8> {
    let mut v: Value = serde_json::from_str(MINIMAL).unwrap();
    f(&mut v);
    serde_json::to_vec(&v).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_horizon-lab"))
}

#[test]
fn minimal_config_takes_defaults() {
    let c = parse_config(MINIMAL.as_bytes()).unwrap();
    let r = &c.runs[0];
    assert_eq!(
        (r.rel_tol, r.abs_tol, r.horizon_eps, r.tau_max),
        (1e-10, 1e-12, 1e-12, 200.0)
    );
    assert_eq!(c.homogeneity, HomogeneityConfig::Explicit { alpha: vec![1], k: 1.0 });
    build_problem(&c).unwrap();
}

#[test]
fn zero_type_is_a_schema_error() {
    let e = parse_config(&edit(|v| v["homogeneity"]["alpha"] = serde_json::json!([0]))).unwrap_err();
    assert_eq!(pointer(e), "/homogeneity/alpha");
}

#[test]
fn unknown_keys_are_rejected() {
    let e = parse_config(&edit(|v| v["runs"][0]["tolerance"] = 1.0.into())).unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("tolerance"), "{msg}");
    assert_eq!(pointer(e), "/runs/0/tolerance");
    let e = parse_config(&edit(|v| v["extra"] = true.into())).unwrap_err();
    assert!(e.to_string().contains("extra"));
}

#[test]
fn type_errors_carry_a_json_pointer() {
    let e = parse_config(&edit(|v| v["runs"][0]["tau_max"] = "long".into())).unwrap_err();
    assert_eq!(pointer(e), "/runs/0/tau_max");
    let e = parse_config(&edit(|v| {
        v["field"]["components"][0][0]["exponents"] = serde_json::json!([2, 1])
    }))
    .unwrap_err();
    assert_eq!(pointer(e), "/field/components/0/0/exponents");
    let e = parse_config(&edit(|v| v["schema"] = 2.into())).unwrap_err();
    assert_eq!(pointer(e), "/schema");
    let e = parse_config(b"{ not json").unwrap_err();
    assert_eq!(pointer(e), "");
}

#[test]
fn semantic_checks_point_at_the_offending_entry() {
    let e = parse_config(&edit(|v| {
        v["chart"] = serde_json::json!({"kind": "directional", "index": 0, "sign": 2})
    }))
    .unwrap_err();
    assert_eq!(pointer(e), "/chart/sign");
    // y' = y^3 is not of order 2 for type (1)
    let c = parse_config(&edit(|v| {
        v["field"]["components"][0][0]["exponents"] = serde_json::json!([3])
    }))
    .unwrap();
    assert_eq!(pointer(build_problem(&c).unwrap_err()), "/homogeneity");
    // y = -1 lies outside the directional chart y > 0
    let c = parse_config(&edit(|v| {
        v["chart"] = serde_json::json!({"kind": "directional", "index": 0, "sign": 1});
        v["runs"][0]["initial"] = serde_json::json!([-1.0]);
    }))
    .unwrap();
    assert_eq!(pointer(build_problem(&c).unwrap_err()), "/runs/0/initial");
}

#[test]
fn inferred_type_is_used() {
    let c = parse_config(&edit(|v| v["homogeneity"] = serde_json::json!({"mode": "infer"}))).unwrap();
    let p = build_problem(&c).unwrap();
    assert_eq!(p.htype.alpha(), &[1]);
    assert_eq!(p.htype.k(), 1.0);
}

#[test]
fn examples_round_trip_byte_stably() {
    for name in list_examples() {
        let c = emit_example(name, &ExampleParams::default()).unwrap();
        let text = to_json(&c);
        let back = parse_config(text.as_bytes()).unwrap();
        assert_eq!(back, c, "{name}");
        assert_eq!(to_json(&back), text, "{name}");
        build_problem(&back).unwrap();
    }
}

#[test]
fn example_types_and_charts() {
    let expect = |name: &str, params: ExampleParams, alpha: &[u32], k: f64, chart: ChartConfig| {
        let c = emit_example(name, &params).unwrap();
        assert_eq!(
            c.homogeneity,
            HomogeneityConfig::Explicit {
                alpha: alpha.to_vec(),
                k
            },
            "{name}"
        );
        assert_eq!(c.chart, chart, "{name}");
        c
    };
    expect(
        "painleve1",
        ExampleParams::default(),
        &[0, 2, 3],
        1.0,
        ChartConfig::Parabolic,
    );
    let mems = ExampleParams {
        n_dim: Some(3.0),
        p: Some(2.0),
        q: Some(1.0),
        ..Default::default()
    };
    expect(
        "mems",
        mems,
        &[0, 2, 5],
        3.0,
        ChartConfig::Directional { index: 1, sign: -1 },
    );
    let kk = ExampleParams {
        epsilon: Some(0.0),
        ..Default::default()
    };
    let c = expect(
        "kk_dafermos",
        kk,
        &[0, 1, 2, 1, 2],
        1.0,
        ChartConfig::Directional { index: 2, sign: 1 },
    );
    assert!(c.field.components[0].is_empty() && c.field.components[3].is_empty());

    let ss = ExampleParams {
        m: Some(-1.0),
        beta: Some(-1.0),
        ..Default::default()
    };
    let c = expect(
        "selfsimilar",
        ss,
        &[0, 1, 1],
        2.0,
        ChartConfig::Directional { index: 1, sign: 1 },
    );
    // v' = -beta chi u^2 v - alpha_ss u with alpha_ss = -1/2
    assert_eq!(c.field.components[2][1].coeff, 0.5);
}

#[test]
fn example_parameter_domains() {
    let bad = |name: &str, p: ExampleParams| {
        assert!(
            matches!(emit_example(name, &p), Err(ConfigError::Domain(_))),
            "{name} {p:?}"
        );
    };
    bad(
        "selfsimilar",
        ExampleParams {
            m: Some(0.5),
            ..Default::default()
        },
    );
    bad(
        "selfsimilar",
        ExampleParams {
            beta: Some(1.0),
            ..Default::default()
        },
    );
    bad(
        "mems",
        ExampleParams {
            p: Some(3.0),
            ..Default::default()
        },
    );
    bad(
        "kk_dafermos",
        ExampleParams {
            epsilon: Some(-0.1),
            ..Default::default()
        },
    );
    bad(
        "painleve1",
        ExampleParams {
            epsilon: Some(0.1),
            ..Default::default()
        },
    );
    assert!(matches!(
        emit_example("lorenz", &ExampleParams::default()),
        Err(ConfigError::UnknownExample(_))
    ));
}

fn write_config(dir: &Path, value: &Value) -> std::path::PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    p
}

fn painleve_value() -> Value {
    let c = emit_example("painleve1", &ExampleParams::default()).unwrap();
    serde_json::from_str(&to_json(&c)).unwrap()
}

#[test]
fn analyze_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &painleve_value());
    let out = dir.path().join("out");
    let status = bin()
        .arg("analyze")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));

    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let run = &report["runs"][0];
    assert_eq!(run["stop_reason"], "horizon_reached");
    assert_eq!(run["blowup"]["type1_confirmed"], true);

    let csv = fs::read_to_string(out.join("run_000.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "tau,t,coord_0,coord_1,coord_2,horizon_gap");
    let rows: Vec<&str> = lines.collect();
    // initial state plus one row per accepted step
    assert_eq!(rows.len() as u64, run["accepted_steps"].as_u64().unwrap() + 1);
    for row in &rows {
        let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 6);
    }
    assert!(fs::read_to_string(out.join("equilibria.csv"))
        .unwrap()
        .starts_with("slice,index,coord_0"));
}

#[test]
fn report_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = painleve_value();
    let run = v["runs"][0].clone();
    let mut other = run.clone();
    other["initial"] = serde_json::json!([0.0, 12.0, 2.0 * 12f64.powf(1.5)]);
    v["runs"] = serde_json::json!([run, other, run]);
    let cfg = write_config(dir.path(), &v);
    let mut outputs = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(format!("out{jobs}"));
        let status = bin()
            .args(["--jobs", jobs, "analyze"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push((
            fs::read(out.join("report.json")).unwrap(),
            fs::read(out.join("run_001.csv")).unwrap(),
        ));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn truncated_run_exits_with_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = painleve_value();
    v["runs"][0]["tau_max"] = 1.0.into();
    let cfg = write_config(dir.path(), &v);
    let out = dir.path().join("out");
    let status = bin()
        .env("HORIZON_LAB_LOG", "error")
        .arg("analyze")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"][0]["stop_reason"], "tau_exhausted");
    assert_eq!(report["runs"][0]["status"], "failed");
    assert!(out.join("run_000.csv").exists());
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = painleve_value();
    v["homogeneity"]["alpha"] = serde_json::json!([0, 0, 0]);
    let cfg = write_config(dir.path(), &v);
    for cmd in ["analyze", "validate", "equilibria"] {
        let o = bin().arg(cmd).arg(&cfg).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("/homogeneity/alpha"));
    }
    let o = bin()
        .args(["example", "selfsimilar", "--m", "0.5", "--emit-config"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn emitted_config_validates() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["example", "kk_dafermos", "--epsilon", "0", "--emit-config"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        parse_config(text.as_bytes()).unwrap(),
        emit_example("kk_dafermos", &ExampleParams::default()).unwrap()
    );
    let p = dir.path().join("kk.json");
    fs::write(&p, &text).unwrap();
    let o = bin().arg("validate").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(0));

    let o = bin().arg("list-examples").output().unwrap();
    let listing = String::from_utf8(o.stdout).unwrap();
    for name in list_examples() {
        assert!(listing.contains(name));
    }
}

#[test]
fn equilibria_subcommand_skips_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &painleve_value());
    let out = dir.path().join("out");
    let status = bin()
        .arg("equilibria")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert!(out.join("equilibria.csv").exists());
    assert!(!out.join("run_000.csv").exists());
    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 0);
    assert_eq!(report["curves"][0]["points"].as_array().unwrap().len(), 5);
}
