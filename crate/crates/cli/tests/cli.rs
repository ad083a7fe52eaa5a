use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const CIRCLE: &str = r#"{ "p": 1, "q": 0, "c": [0.4], "d": [0.9], "alpha": [1.5] }"#;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn cache(&self) -> PathBuf {
        self.path("cache")
    }

    fn config(&self, name: &str, body: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn circle(&self) -> PathBuf {
        self.config("run.json", &format!(r#"{{ "spectral": {CIRCLE} }}"#))
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_mchgap"))
            .args(args)
            .env("MCHGAP_CACHE_DIR", self.cache())
            .output()
            .unwrap()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_lists_cuts() {
    let sb = Sandbox::new();
    let o = sb.run(&["validate", s(&sb.circle())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("genus 3, 4 cuts, OK"), "{out}");
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn empty_spectrum_is_a_config_error() {
    let sb = Sandbox::new();
    let cfg = sb.config("empty.json", r#"{ "spectral": { "p": 0, "q": 0 } }"#);
    let o = sb.run(&["validate", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config error"));
}

#[test]
fn malformed_field_is_named() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "bad.json",
        r#"{ "spectral": { "p": 1, "q": 0, "c": ["x"], "d": [0.9], "alpha": [1.5] } }"#,
    );
    let o = sb.run(&["validate", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("spectral.c[0]"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_rejected() {
    let sb = Sandbox::new();
    let cfg = sb.config("bad.json", &format!(r#"{{ "spectral": {CIRCLE}, "tua": 1e-12 }}"#));
    let o = sb.run(&["validate", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tua"));
}

#[test]
fn out_of_range_tau_is_rejected() {
    let sb = Sandbox::new();
    let cfg = sb.config("bad.json", &format!(r#"{{ "spectral": {CIRCLE}, "tau": 1e-3 }}"#));
    let o = sb.run(&["validate", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tau"));
}

#[test]
fn usage_errors_exit_two() {
    let sb = Sandbox::new();
    let cfg = sb.circle();
    assert_eq!(sb.run(&["sample", s(&cfg), "--formta", "csv"]).status.code(), Some(2));
    assert_eq!(sb.run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sb.run(&["sample", s(&cfg), "--format", "xml"]).status.code(), Some(2));
    assert_eq!(sb.run(&["--help"]).status.code(), Some(0));
    let missing = sb.path("missing.json");
    assert_eq!(sb.run(&["validate", s(&missing)]).status.code(), Some(2));
}

#[test]
fn periods_cache_round_trip() {
    let sb = Sandbox::new();
    let cfg = sb.circle();
    let first = sb.path("p1.json");
    let second = sb.path("p2.json");
    let third = sb.path("p3.json");

    let o = sb.run(&["periods", s(&cfg), "--out", s(&first)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("cache miss"));

    let o = sb.run(&["periods", s(&cfg), "--out", s(&second)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("cache hit"));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let entries: Vec<PathBuf> = fs::read_dir(sb.cache()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1);
    let name = entries[0].file_stem().unwrap().to_str().unwrap().to_string();
    assert_eq!(name.len(), 64);
    assert!(name.chars().all(|c| c.is_ascii_hexdigit()));

    fs::write(&entries[0], "{ not json").unwrap();
    let o = sb.run(&["periods", s(&cfg), "--out", s(&third)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("unreadable"), "{}", stderr(&o));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&third).unwrap());

    let doc: Value = serde_json::from_slice(&fs::read(&first).unwrap()).unwrap();
    assert_eq!(doc["genus"], 3);
    assert_eq!(doc["cache_key"].as_str().unwrap(), name);
    assert_eq!(doc["verification"]["overall"], true);
}

#[test]
fn tolerances_do_not_change_the_cache_key() {
    let sb = Sandbox::new();
    let a = sb.circle();
    let b = sb.config(
        "relaxed.json",
        &format!(r#"{{ "spectral": {CIRCLE}, "tolerances": {{ "relax": 2.0 }} }}"#),
    );
    assert_eq!(
        sb.run(&["periods", s(&a), "--out", s(&sb.path("a.json"))])
            .status
            .code(),
        Some(0)
    );
    let o = sb.run(&["periods", s(&b), "--out", s(&sb.path("b.json"))]);
    assert!(stderr(&o).contains("cache hit"));
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn sample_csv_is_deterministic() {
    let sb = Sandbox::new();
    let cfg = sb.circle();
    let a = sb.path("a.csv");
    let b = sb.path("b.csv");
    let o = sb.run(&["sample", s(&cfg), "--out", s(&a)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = sb.run(&["sample", s(&cfg), "--out", s(&b)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());

    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        [
            "y",
            "t",
            "x",
            "u",
            "q",
            "m",
            "im_u",
            "im_x",
            "denominator_margin",
            "error"
        ]
    );
    assert_eq!(rows.len(), 121);
    for r in &rows {
        assert_eq!(r.len(), 10);
        assert!(r[9].is_empty());
        let mantissa = r[3].split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{}", r[3]);
        let q: f64 = r[4].parse().unwrap();
        let m: f64 = r[5].parse().unwrap();
        assert!((q * q - m * m - 1.0).abs() < 1e-8);
        assert!(r[6].parse::<f64>().unwrap().abs() < 1e-6);
    }
}

#[test]
fn sample_json_and_x_coordinates() {
    let sb = Sandbox::new();
    let cfg = sb.circle();
    let out = sb.path("s.json");
    let o = sb.run(&[
        "sample",
        s(&cfg),
        "--out",
        s(&out),
        "--format",
        "json",
        "--coords",
        "x",
        "--ny",
        "7",
        "--nt",
        "3",
        "--t0",
        "-0.5",
        "--t1",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let samples: Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    let samples = samples.as_array().unwrap();
    assert_eq!(samples.len(), 21);
    for key in ["y", "t", "x", "u", "q", "m", "im_u", "im_x", "denominator_margin"] {
        assert!(samples[0].get(key).is_some(), "{key}");
    }

    let pairs: Value = serde_json::from_slice(&fs::read(sb.path("s.xu.json")).unwrap()).unwrap();
    let pairs = pairs.as_array().unwrap();
    assert_eq!(pairs.len(), 21);
    let key = |p: &Value| (p["t"].as_f64().unwrap(), p["x"].as_f64().unwrap());
    for w in pairs.windows(2) {
        let (t0, x0) = key(&w[0]);
        let (t1, x1) = key(&w[1]);
        assert!(t0 < t1 || (t0 == t1 && x0 <= x1));
    }
    assert_eq!(key(&pairs[0]).0, -0.5);
}

#[test]
fn verify_quick_writes_a_report() {
    let sb = Sandbox::new();
    let cfg = sb.circle();
    let a = sb.path("r1.json");
    let b = sb.path("r2.json");
    let o = sb.run(&["verify", s(&cfg), "--level", "quick", "--report", s(&a)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("overall PASS"));
    assert_eq!(sb.run(&["verify", s(&cfg), "--report", s(&b)]).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let report: Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(report["level"], "quick");
    assert_eq!(report["overall"], true);
    assert_eq!(report["fingerprint"].as_str().unwrap().len(), 64);
    let sections: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["section"].as_str().unwrap())
        .collect();
    for sec in ["periods", "theta", "divisor", "rhp"] {
        assert!(sections.contains(&sec), "{sec}");
    }
}

#[test]
fn relative_outputs_resolve_against_the_config() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "run.json",
        &format!(r#"{{ "spectral": {CIRCLE}, "grid": {{ "y0": 0, "y1": 1, "ny": 2, "t0": 0, "t1": 1, "nt": 2 }}, "output": {{ "samples": "out/g.csv" }} }}"#),
    );
    let o = sb.run(&["sample", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = parse_csv(&fs::read_to_string(sb.path("out/g.csv")).unwrap());
    assert_eq!(rows.len(), 4);
}

fn schema() -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/run-config.schema.json");
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

/// Builds a config that sets every property the schema lists.
fn from_schema(schema: &Value) -> Value {
    let props = schema["properties"].as_object().unwrap();
    let mut cfg = serde_json::Map::new();
    for (key, prop) in props {
        let value = match key.as_str() {
            "spectral" => serde_json::from_str(CIRCLE).unwrap(),
            "grid" => json!({ "y0": -1.0, "y1": 1.0, "ny": 3, "t0": -1.0, "t1": 1.0, "nt": 3 }),
            "output" | "cache_dir" if prop.get("properties").is_none() => Value::Null,
            _ => match prop.get("properties") {
                Some(inner) => Value::Object(
                    inner
                        .as_object()
                        .unwrap()
                        .iter()
                        .map(|(k, v)| (k.clone(), v.get("default").cloned().unwrap_or(Value::Null)))
                        .collect(),
                ),
                None => prop["default"].clone(),
            },
        };
        cfg.insert(key.clone(), value);
    }
    Value::Object(cfg)
}

#[test]
fn schema_matches_the_config_format() {
    let schema = schema();
    let sb = Sandbox::new();
    let full = from_schema(&schema);
    let cfg = sb.config("full.json", &full.to_string());
    let o = sb.run(&["validate", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    // spelling every default out must not move the cache entry
    let minimal = sb.circle();
    assert_eq!(
        sb.run(&["periods", s(&minimal), "--out", s(&sb.path("a.json"))])
            .status
            .code(),
        Some(0)
    );
    let o = sb.run(&["periods", s(&cfg), "--out", s(&sb.path("b.json"))]);
    assert!(stderr(&o).contains("cache hit"), "{}", stderr(&o));

    for (key, prop) in schema["properties"].as_object().unwrap() {
        let Some(inner) = prop.get("properties") else { continue };
        if key == "spectral" {
            continue;
        }
        let mut extra = full.clone();
        extra[key.as_str()]["not_in_schema"] = json!(1);
        let bad = sb.config("extra.json", &extra.to_string());
        assert_eq!(sb.run(&["validate", s(&bad)]).status.code(), Some(2), "{key}");
        assert!(!inner.as_object().unwrap().is_empty());
    }
}
