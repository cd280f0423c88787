//! Artifact writers. Every command drops its set as intervals.txt and
//! intervals.csv plus a report.json; plots are a fixed 1000-unit viewport
//! with one lane per layer.

use cantor_forge_core::{Error, Interval, IntervalUnion, Result, Scalar};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

pub fn scalar_json(s: &Scalar) -> Value {
    match s.as_exact() {
        Some(_) => Value::String(s.to_string()),
        None => json!(s.to_f64()),
    }
}

pub fn opt_scalar_json(s: &Option<Scalar>) -> Value {
    match s {
        Some(v) => scalar_json(v),
        None => Value::Null,
    }
}

pub fn interval_json(iv: &Interval) -> Value {
    json!([scalar_json(iv.lo()), scalar_json(iv.hi())])
}

fn write_file(path: &Path, data: &str) -> Result<()> {
    std::fs::write(path, data).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn write_intervals(dir: &Path, u: &IntervalUnion) -> Result<()> {
    write_file(&dir.join("intervals.txt"), &u.to_text())?;
    let mut csv = String::new();
    if u.is_exact() {
        csv.push_str("lo_num,lo_den,hi_num,hi_den\n");
        for p in u.parts() {
            let lo = p.lo().to_rational();
            let hi = p.hi().to_rational();
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                lo.numer(),
                lo.denom(),
                hi.numer(),
                hi.denom()
            );
        }
    } else {
        csv.push_str("lo,hi\n");
        for p in u.parts() {
            let (lo, hi) = p.to_f64_pair();
            let _ = writeln!(csv, "{lo},{hi}");
        }
    }
    write_file(&dir.join("intervals.csv"), &csv)
}

pub fn write_report(dir: &Path, report: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Internal(format!("report serialization: {e}")))?;
    text.push('\n');
    write_file(&dir.join("report.json"), &text)
}

pub struct Lane<'a> {
    pub label: &'a str,
    pub set: &'a IntervalUnion,
    pub color: &'a str,
}

pub fn write_svg(path: &Path, hull: &Interval, lanes: &[Lane]) -> Result<()> {
    let (lo, hi) = hull.to_f64_pair();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |t: f64| 10.0 + 980.0 * (t - lo) / span;
    let height = 30 + lanes.len() * 40;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 {height}\" font-family=\"monospace\" font-size=\"11\">"
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"{height}\" fill=\"#ffffff\"/>"
    );
    for (k, lane) in lanes.iter().enumerate() {
        let y = 30 + k * 40;
        let _ = writeln!(
            s,
            "<text x=\"10\" y=\"{}\" fill=\"#333333\">{} ({} parts)</text>",
            y - 5,
            lane.label,
            lane.set.count()
        );
        let _ = writeln!(
            s,
            "<line x1=\"10\" y1=\"{mid}\" x2=\"990\" y2=\"{mid}\" stroke=\"#dddddd\"/>",
            mid = y + 9
        );
        for p in lane.set.parts() {
            let (a, b) = p.to_f64_pair();
            let x0 = x(a);
            let w = (x(b) - x0).max(0.5);
            let _ = writeln!(
                s,
                "<rect x=\"{x0:.2}\" y=\"{y}\" width=\"{w:.2}\" height=\"18\" fill=\"{}\"/>",
                lane.color
            );
        }
    }
    let _ = writeln!(s, "</svg>");
    write_file(path, &s)
}
