//! CSV and JSON writers with fixed number formatting.

use interfersim_core::experiment::{ResultTable, TableMeta};
use interfersim_core::measurement::{ClickPattern, OutcomeDistribution};
use serde_json::{json, Map, Value};

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest text that round-trips the 15-digit rounding of `x`. Plain
/// decimal in `[1e-5, 1e15)`, exponent form otherwise; never `-0`.
pub fn format_number(x: f64) -> String {
    let r = round15(x);
    let a = r.abs();
    if r == 0.0 || (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(round15(x)).map(Value::Number).unwrap_or(Value::Null)
}

fn json_meta(meta: &TableMeta) -> Value {
    json!({
        "graphHash": meta.graph_hash,
        "convention": meta.convention,
        "version": meta.version,
        "parameter": meta.parameter,
    })
}

pub fn table_csv(table: &ResultTable) -> String {
    let mut out = String::from("theta");
    for c in &table.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format_number(row.theta));
        for v in &row.values {
            out.push(',');
            out.push_str(&format_number(*v));
        }
        out.push('\n');
    }
    out
}

pub fn table_json(table: &ResultTable) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            obj.insert("theta".into(), json_number(row.theta));
            for (c, v) in table.columns.iter().zip(&row.values) {
                obj.insert(c.clone(), json_number(*v));
            }
            Value::Object(obj)
        })
        .collect();
    pretty(&json!({ "meta": json_meta(&table.meta), "rows": rows }))
}

/// Metadata for outputs that are not sweeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeta {
    pub graph_hash: String,
    pub convention: String,
    pub version: String,
}

fn run_meta_json(meta: &RunMeta) -> Value {
    json!({ "graphHash": meta.graph_hash, "convention": meta.convention, "version": meta.version })
}

pub fn distribution_csv(dist: &OutcomeDistribution) -> String {
    let mut out = String::from("pattern,probability\n");
    for e in dist.entries() {
        out.push_str(&format!("{},{}\n", e.pattern, format_number(e.probability)));
    }
    out
}

pub fn distribution_json(dist: &OutcomeDistribution, meta: &RunMeta) -> String {
    let rows: Vec<Value> = dist
        .entries()
        .iter()
        .map(|e| json!({ "pattern": e.pattern.to_string(), "probability": json_number(e.probability) }))
        .collect();
    pretty(&json!({ "meta": run_meta_json(meta), "rows": rows }))
}

pub fn counts_csv(counts: &[(ClickPattern, u64)]) -> String {
    let mut out = String::from("pattern,count\n");
    for (p, k) in counts {
        out.push_str(&format!("{p},{k}\n"));
    }
    out
}

pub fn counts_json(counts: &[(ClickPattern, u64)], meta: &RunMeta, shots: u64, seed: u64) -> String {
    let rows: Vec<Value> = counts.iter().map(|(p, k)| json!({ "pattern": p.to_string(), "count": k })).collect();
    let mut meta = run_meta_json(meta);
    meta["shots"] = json!(shots);
    meta["seed"] = json!(seed);
    pretty(&json!({ "meta": meta, "rows": rows }))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
