//! Sample tables as CSV or JSON.

use mchgap::solution::{SolutionError, SolutionSample};
use serde::Serialize;

pub const COLUMNS: [&str; 9] = ["y", "t", "x", "u", "q", "m", "im_u", "im_x", "denominator_margin"];

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub type Row = ((f64, f64), Result<SolutionSample, SolutionError>);

pub fn csv(rows: &[Row]) -> String {
    let mut out = COLUMNS.join(",");
    out.push_str(",error\n");
    for ((y, t), r) in rows {
        match r {
            Ok(s) => {
                let vals = [s.y, s.t, s.x, s.u, s.q, s.m, s.im_u, s.im_x, s.denominator_margin];
                let line: Vec<String> = vals.iter().map(|&v| num(v)).collect();
                out.push_str(&line.join(","));
                out.push_str(",\n");
            }
            Err(e) => {
                out.push_str(&format!(
                    "{},{},,,,,,,,{}\n",
                    num(*y),
                    num(*t),
                    csv_field(&e.to_string())
                ));
            }
        }
    }
    out
}

#[derive(Serialize)]
#[serde(untagged)]
enum Record<'a> {
    Sample(&'a SolutionSample),
    Error { y: f64, t: f64, error: String },
}

pub fn json(rows: &[Row]) -> Vec<u8> {
    let recs: Vec<Record> = rows
        .iter()
        .map(|((y, t), r)| match r {
            Ok(s) => Record::Sample(s),
            Err(e) => Record::Error {
                y: *y,
                t: *t,
                error: e.to_string(),
            },
        })
        .collect();
    crate::cache::to_json(&recs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XPair {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

/// `(x, u)` per t-slice, sorted by x within each slice; failed points skipped.
pub fn x_pairs(rows: &[Row]) -> Vec<XPair> {
    let mut out: Vec<XPair> = rows
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().map(|s| XPair { t: s.t, x: s.x, u: s.u }))
        .collect();
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.x.total_cmp(&b.x)));
    out
}

pub fn x_pairs_csv(pairs: &[XPair]) -> String {
    let mut out = String::from("t,x,u\n");
    for p in pairs {
        out.push_str(&format!("{},{},{}\n", num(p.t), num(p.x), num(p.u)));
    }
    out
}
