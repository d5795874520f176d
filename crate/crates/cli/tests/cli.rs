use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mssp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mssp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn values(v: &Value) -> Vec<f64> {
    v["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| match &n["value"] {
            Value::String(s) if s == "inf" => f64::INFINITY,
            x => x.as_f64().unwrap(),
        })
        .collect()
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn fig1_value_iteration_reaches_two() {
    let o = mssp(&["solve", "--generate", "fig1", "--method", "vi", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let u = values(&v);
    assert!(
        (u[0] - 2.0).abs() < 1e-8 && (u[1] - 2.0).abs() < 1e-8 && u[2] == 0.0,
        "{u:?}"
    );
    assert_eq!(v["method"], "vi");
    assert_eq!(v["verification"]["pass"], true);
}

#[test]
fn fig1_dijkstra_stalls_and_fails_verification() {
    let o = mssp(&[
        "solve",
        "--generate",
        "fig1",
        "--method",
        "dijkstra",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(values(&v)[..2], [f64::INFINITY, f64::INFINITY]);
    assert_eq!(
        v["verification"]["infinite_inside_reachable"],
        serde_json::json!([0, 1])
    );
}

#[test]
fn auto_picks_dial_on_eight_stencil_grid() {
    let n = 21;
    let o = mssp(&[
        "solve",
        "--eikonal-grid",
        "21",
        "--stencil",
        "eight",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["method"], "dial");
    assert_eq!(v["reupdates_after_acceptance"], 0);
    let h = 1.0 / (n - 1) as f64;
    let delta = v["certificate"]["delta"].as_f64().unwrap();
    assert!((delta - h / 2f64.sqrt()).abs() < 1e-6 * h, "{delta}");
    // the eight-point stencil is exact for the distance to the boundary
    let u = values(&v);
    let worst = (0..n * n)
        .map(|k| {
            let (x, y) = ((k % n) as f64 * h, (k / n) as f64 * h);
            (u[k] - x.min(y).min(1.0 - x).min(1.0 - y)).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn certify_reports_verdicts() {
    let o = mssp(&["certify", "--generate", "rg-game2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("dijkstra_ok, Δ=0"), "{}", stdout(&o));

    let o = mssp(&["certify", "--hexagon", "8", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "dial_ok");
    assert!(v["delta"].as_f64().unwrap() >= 0.5 / 8.0 - 1e-6);
}

#[test]
fn certify_unknown_lists_reasons() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "bowl.json");
    std::fs::write(
        &p,
        r#"{"format": "mssp", "version": 1, "nodes": 2,
            "modes": [[{"successors": [1, 2], "cost": {"kind": "polynomial", "coeffs": [2, -4, 4]}}],
                      [{"successors": [2], "cost": {"kind": "linear", "coeffs": [1]}}]]}"#,
    )
    .unwrap();
    let o = mssp(&["certify", "--problem", &p]);
    assert_eq!(o.status.code(), Some(4));
    let out = stdout(&o);
    assert!(out.starts_with("unknown"), "{out}");
    assert!(out.contains("node 0 mode 0: uncertified ("), "{out}");

    let o = mssp(&["solve", "--problem", &p, "--require-certificate"]);
    assert_eq!(o.status.code(), Some(4));
    let o = mssp(&["solve", "--problem", &p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn compare_flags_infinite_differences() {
    let o = mssp(&[
        "compare",
        "--generate",
        "fig1",
        "--methods",
        "vi,dijkstra,sweep",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[2]["ok"], false);
    assert!(rows[2]["error"].as_str().unwrap().contains("cycle"));
    assert_eq!(v["max_diff"][0][1], "inf");
    assert_eq!(v["max_diff"][0][2], Value::Null);

    let o = mssp(&[
        "compare",
        "--generate",
        "rg-game2",
        "--methods",
        "vi,dijkstra,auto",
        "--json",
    ]);
    let v = json(&o);
    for row in v["max_diff"].as_array().unwrap() {
        for d in row.as_array().unwrap() {
            assert!(d.as_f64().unwrap() < 1e-8, "{d}");
        }
    }
}

#[test]
fn compare_agrees_where_solvers_apply() {
    let o = mssp(&[
        "compare",
        "--eikonal-grid",
        "11",
        "--stencil",
        "eight",
        "--methods",
        "vi,dijkstra,dial",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    for row in v["max_diff"].as_array().unwrap() {
        for d in row.as_array().unwrap() {
            assert!(d.as_f64().unwrap() <= 1e-8, "{d}");
        }
    }
    let o = mssp(&[
        "compare",
        "--generate",
        "multitask",
        "--methods",
        "vi,sweep",
        "--json",
    ]);
    let v = json(&o);
    assert!(v["max_diff"][0][1].as_f64().unwrap() <= 1e-10);
}

#[test]
fn result_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let r = path(&dir, "r.json");
    let o = mssp(&[
        "solve",
        "--generate",
        "fig1",
        "--method",
        "vi",
        "--output",
        &r,
        "--record-time",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("not finitely convergent"));
    let text = std::fs::read_to_string(&r).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(
        v["residual_history"].as_array().unwrap().len() as u64,
        v["iterations"].as_u64().unwrap()
    );
    assert_eq!(
        serde_json::from_str::<Value>(&serde_json::to_string(&v).unwrap()).unwrap(),
        v
    );

    let o = mssp(&[
        "solve",
        "--generate",
        "fig1",
        "--method",
        "vi",
        "--max-iter",
        "3",
    ]);
    assert!(stdout(&o).contains("not finitely convergent"));
}

#[test]
fn oracle_finds_violation_only_for_bowl() {
    let o = mssp(&["oracle", "--cost", "c1", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("none"));

    let o = mssp(&[
        "oracle",
        "--cost",
        "polynomial:2,-4,4",
        "--dim",
        "2",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    let viol = &v["violation"];
    let w: Vec<f64> = viol["w"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let xi: Vec<f64> = viol["xi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let j = viol["j"].as_u64().unwrap() as usize;
    // independent recomputation of the reported violation
    let cost = 2.0 - 4.0 * xi[0] * xi[1] + 4.0 * (xi[0] * xi[1]).powi(2);
    let cost = if (cost - (2.0 - 4.0 * xi[0] + 4.0 * xi[0] * xi[0])).abs() < 1e-12 {
        cost
    } else {
        2.0 - 4.0 * xi[0] + 4.0 * xi[0] * xi[0]
    };
    let value = cost + xi[0] * w[0] + xi[1] * w[1];
    assert!(xi[j] > 1e-9);
    assert!(value <= w[j] + 1e-6, "{value} vs {}", w[j]);

    let o = mssp(&["oracle", "--generate", "rg-game2", "--node", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn parse_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "bad.json");
    std::fs::write(&p, "{\n  \"format\": \"mssp\",\n  \"nodes\": x\n}").unwrap();
    let o = mssp(&["solve", "--problem", &p]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3, column 12"), "{}", stderr(&o));

    std::fs::write(
        &p,
        "{\"format\": \"mssp\", \"version\": 1, \"nodes\": 1,\n\"modes\": [[{\"successors\": [1], \"cost\": {\"kind\": \"bogus\"}}]]}",
    )
    .unwrap();
    let o = mssp(&["solve", "--problem", &p]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(
        e.contains("line 2") && e.contains("unknown variant `bogus`"),
        "{e}"
    );

    std::fs::write(
        &p,
        r#"{"format": "mssp", "version": 1, "nodes": 1, "modes": [[{"successors": [0], "cost": {"kind": "linear", "coeffs": [1]}}]]}"#,
    )
    .unwrap();
    let o = mssp(&["solve", "--problem", &p]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("invalid problem"), "{}", stderr(&o));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        ["solve", "--generate", "multitask", "--json"].as_slice(),
        ["certify", "--hexagon", "6", "--json"].as_slice(),
        ["oracle", "--cost", "c3", "--dim", "2", "--json"].as_slice(),
    ] {
        assert_eq!(mssp(args).stdout, mssp(args).stdout, "{args:?}");
    }
}

#[test]
fn file_round_trip_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    for g in ["fig1", "circular-list", "rg-game2", "multitask-distraction"] {
        let p = path(&dir, &format!("{g}.json"));
        assert_eq!(
            mssp(&["generate", "--generate", g, "--out", &p])
                .status
                .code(),
            Some(0)
        );
        let a = mssp(&["solve", "--problem", &p, "--json"]);
        let b = mssp(&["solve", "--generate", g, "--json"]);
        assert_eq!(a.stdout, b.stdout, "{g}");
    }
    let p = path(&dir, "hex.json");
    mssp(&["generate", "--hexagon", "4", "--out", &p]);
    let a = mssp(&["solve", "--problem", &p, "--json"]);
    let b = mssp(&["solve", "--hexagon", "4", "--json"]);
    assert_eq!(values(&json(&a)), values(&json(&b)));
}

#[test]
fn verify_and_emit_values() {
    let dir = tempfile::tempdir().unwrap();
    let r = path(&dir, "r.json");
    let csv = path(&dir, "v.csv");
    let o = mssp(&[
        "solve",
        "--eikonal-grid",
        "5",
        "--output",
        &r,
        "--emit-values",
        &csv,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(Path::new(&r).exists());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node,x0,x1,value"));
    assert_eq!(lines.next(), Some("0,0,0,0"));
    assert_eq!(text.lines().count(), 1 + 26);

    assert_eq!(
        mssp(&["verify", "--eikonal-grid", "5", "--values", &r])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        mssp(&["verify", "--eikonal-grid", "5", "--f", "2", "--values", &r])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn stored_values_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let r = path(&dir, "r.json");
    let csv = path(&dir, "v.csv");
    let o = mssp(&[
        "solve",
        "--hexagon",
        "5",
        "--method",
        "vi",
        "--output",
        &r,
        "--emit-values",
        &csv,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    let from_json = values(&v);
    let from_csv: Vec<f64> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(from_json.len(), from_csv.len());
    for (a, b) in from_json.iter().zip(&from_csv) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert!(from_json
        .iter()
        .any(|x| x.fract() != 0.0 && x.to_string().len() > 15));
}

#[test]
fn usage_errors() {
    let o = mssp(&["solve", "--generate", "fig1", "--eikonal-grid", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(mssp(&["--help"]).status.code(), Some(0));
    let o = mssp(&["solve", "--generate", "fig1", "--method", "dial"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bucket-width"), "{}", stderr(&o));
    let o = mssp(&["solve", "--generate", "rg-game2", "--cost", "c1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
