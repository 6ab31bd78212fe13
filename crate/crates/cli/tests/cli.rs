use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use causal_ops::{load, parse_scenario, render::render, to_json, Scenario};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

const FIXTURES: [&str; 3] = ["sorkin_bell.json", "bfr_template.json", "hybrid_equiv.json"];

fn causal_ops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causal-ops")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes `text` to a fresh file under the system temp directory.
fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("causal-ops-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn edited(name: &str, edit: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
    edit(&mut v);
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn fixtures_round_trip() {
    for f in FIXTURES {
        let text = std::fs::read_to_string(fixture(f)).unwrap();
        let first = parse_scenario(f, &text).unwrap();
        let again: Scenario = parse_scenario(f, &to_json(&first)).unwrap();
        assert_eq!(first, again, "{f}");
        load(&fixture(f)).unwrap();
    }
}

#[test]
fn bundled_commands_pass() {
    let runs: [(&str, &[&str]); 3] = [
        ("sorkin_bell.json", &["check-geometry", "classify-channel", "sorkin"]),
        ("bfr_template.json", &["check-geometry", "simulate-fv"]),
        ("hybrid_equiv.json", &["check-geometry", "classify-channel"]),
    ];
    for (f, commands) in runs {
        let path = fixture(f).display().to_string();
        for cmd in commands {
            let out = causal_ops(&[cmd, &path]);
            assert_eq!(out.status.code(), Some(0), "{cmd} {f}: {}", stderr(&out));
            let report: Value = serde_json::from_slice(&out.stdout).unwrap();
            assert_eq!(report["schema"], "causal-ops/1");
            assert_eq!(report["command"], *cmd);
            assert_eq!(report["passed"], true);
            assert_eq!(report["scenario_sha256"].as_str().unwrap().len(), 64);
        }
    }
}

#[test]
fn sorkin_report_holds_charlies_states() {
    let out = causal_ops(&["sorkin", &fixture("sorkin_bell.json").display().to_string()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let states = report["result"]["sorkin"]["charlie_states"].as_array().unwrap();
    let names: Vec<&str> = states.iter().map(|s| s["alternative"].as_str().unwrap()).collect();
    assert_eq!(names, ["abstain", "flip"]);
    let flip = &states[1]["state"]["mat"];
    assert_eq!(flip[0][0][0].as_f64().unwrap(), 1.0);
    assert!((report["result"]["sorkin"]["max_distance"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn verify_bfr_without_scenario() {
    let out = causal_ops(&["verify", "bfr", "--trials", "200", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["result"]["max_deviation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["scenario_sha256"], Value::Null);
    assert_eq!(report["trials"], 200);
}

#[test]
fn failed_expectation_exits_one_and_still_reports() {
    let text = edited("sorkin_bell.json", |v| {
        v["commands"]["classify_channel"]["targets"][1]["expect_a_to_c"] = "signalling".into();
    });
    let path = scratch("wrong_expectation.json", &text);
    let report_path = path.with_extension("report.json");
    let out = causal_ops(&["classify-channel", path.to_str().unwrap(), "--out", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert!(stderr(&out).contains("classify-channel: FAILED"));
}

#[test]
fn non_causal_worldline_names_the_vertices() {
    let text = edited("sorkin_bell.json", |v| {
        v["systems"][0]["worldline"]["vertices"] = serde_json::json!([{"t": "0", "x": "3"}, {"t": "1", "x": "5"}]);
    });
    let path = scratch("bad_worldline.json", &text);
    let out = causal_ops(&["check-geometry", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("systems[0].worldline.vertices"), "{err}");
    assert!(err.contains("vertex 0 (0, 3) to vertex 1 (1, 5)"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn parse_errors_carry_position_and_path() {
    let text = edited("sorkin_bell.json", |v| {
        v["regions"][2]["diamond"]["bottom"]["t"] = "three".into();
    });
    let path = scratch("bad_rational.json", &text);
    let out = causal_ops(&["sorkin", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("regions[2].diamond.bottom.t"), "{err}");
    let located = format!("{}:", path.display());
    let rest = err.split(&located).nth(1).expect("file name in diagnostic");
    let mut parts = rest.split(':');
    assert!(parts.next().unwrap().parse::<usize>().is_ok(), "{err}");
    assert!(parts.next().unwrap().parse::<usize>().is_ok(), "{err}");
}

#[test]
fn unknown_fields_and_bad_schema_are_input_errors() {
    let typo = scratch("typo.json", &edited("sorkin_bell.json", |v| v["sytems"] = serde_json::json!([])));
    let out = causal_ops(&["sorkin", typo.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sytems"), "{}", stderr(&out));

    let schema = scratch("schema.json", &edited("sorkin_bell.json", |v| v["schema"] = "causal-ops/0".into()));
    let out = causal_ops(&["sorkin", schema.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("schema"), "{}", stderr(&out));
}

#[test]
fn missing_inputs_are_input_errors() {
    let out = causal_ops(&["sorkin", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/scenario.json"));

    let out = causal_ops(&["sorkin"]);
    assert_eq!(out.status.code(), Some(2));

    let out = causal_ops(&["verify", "axioms"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_and_svg_are_byte_identical() {
    let path = fixture("sorkin_bell.json").display().to_string();
    let svg = scratch("a.svg", "");
    let a = causal_ops(&["sorkin", &path, "--seed", "3", "--svg", svg.to_str().unwrap()]);
    let first_svg = std::fs::read(&svg).unwrap();
    let b = causal_ops(&["sorkin", &path, "--seed", "3", "--svg", svg.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first_svg, std::fs::read(&svg).unwrap());
    assert_eq!(causal_ops(&["render", &path]).stdout, first_svg);
}

#[test]
fn empty_scenario_renders_axes_only() {
    let out = causal_ops(&["render"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    assert_eq!(svg, render(None));
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("class=\"axis\"").count(), 2);
    for shape in ["<polygon", "<polyline", "<circle"] {
        assert!(!svg.contains(shape), "{shape}");
    }

    let minimal = parse_scenario("empty", r#"{"schema": "causal-ops/1"}"#).unwrap();
    let resolved = causal_ops::resolve(minimal).unwrap();
    assert_eq!(render(Some(&resolved)), svg);
}

fn view_box(svg: &str) -> [f64; 4] {
    let start = svg.find("viewBox=\"").unwrap() + 9;
    let end = start + svg[start..].find('"').unwrap();
    let v: Vec<f64> = svg[start..end].split(' ').map(|s| s.parse().unwrap()).collect();
    [v[0], v[1], v[2], v[3]]
}

#[test]
fn sorkin_diagram_snapshot() {
    let svg = render(Some(&load(&fixture("sorkin_bell.json")).unwrap().resolved));
    assert_eq!(svg.matches("<polygon class=\"region\"").count(), 3);
    assert_eq!(svg.matches("<polyline class=\"worldline\"").count(), 2);
    assert_eq!(svg.matches("<polyline class=\"route\"").count(), 1);
    assert_eq!(svg.matches("<polyline class=\"cone\"").count(), 6);
    assert_eq!(svg.matches("<polyline class=\"cauchy\"").count(), 1);
    for name in ["O_A", "O_B", "O_C", ">A<", ">C<"] {
        assert!(svg.contains(name), "{name}");
    }

    // Extremes: diamond corners at x = -5/2 and 7/2, route crossings at t = -25/8 (on C) and 57/8 (on A).
    // Spans 6 and 41/4 plus 10% on each side, scaled by 100 with t pointing up.
    let [x, y, w, h] = view_box(&svg);
    assert_eq!([x, w], [-310.0, 720.0]);
    assert_eq!([y, h], [-815.0, 1230.0]);
    assert!(svg.contains("<circle class=\"event\" cx=\"300.000\" cy=\"312.500\""));
    assert!(svg.contains("<circle class=\"event\" cx=\"-200.000\" cy=\"-712.500\""));
}

#[test]
fn probe_measurement_diagram_marks_events() {
    let svg = render(Some(&load(&fixture("bfr_template.json")).unwrap().resolved));
    assert_eq!(svg.matches("<polygon class=\"region zone\"").count(), 1);
    assert_eq!(svg.matches("<polyline class=\"worldline probe\"").count(), 1);
    assert!(svg.matches("<circle class=\"event\"").count() >= 2);
}
