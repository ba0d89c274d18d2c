//! CSV emitters for run traces and sweep summaries, and the model snapshot
//! format.
//!
//! Run CSV:
//! `step,phase,f,z,e,w_norm,w_0,...,w_9,node_0,node_1,node_2`
//!
//! Sweep summary CSV:
//! `seed,method,train_mse,predict_mse,converge_step,diverged`
//!
//! Missing values (no prediction phase, no convergence, diverged run) are
//! written as empty fields. Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use crate::config::Method;
use crate::error::{Error, Result};
use crate::harness::{convergence_step, RunRecord, Spread, SweepResult, SAMPLED_NODES, SAMPLED_WEIGHTS};
use crate::linalg::{DenseVector, SparseMatrix};
use crate::reservoir::{EsnModel, EsnParams};

/// Relative tolerance used for the `converge_step` column.
pub const SUMMARY_REL_TOL: f64 = 1e-3;

pub fn run_csv_header() -> String {
    let mut cols: Vec<String> = ["step", "phase", "f", "z", "e", "w_norm"].iter().map(|s| s.to_string()).collect();
    cols.extend((0..SAMPLED_WEIGHTS).map(|i| format!("w_{i}")));
    cols.extend((0..SAMPLED_NODES).map(|i| format!("node_{i}")));
    cols.join(",")
}

pub fn run_csv(record: &RunRecord) -> String {
    let mut out = run_csv_header();
    out.push('\n');
    for row in &record.rows {
        let _ = write!(out, "{},{},{},{},{},{}", row.step, row.phase.as_str(), row.f, row.z, row.e, row.w_norm);
        for w in row.weights {
            let _ = write!(out, ",{w}");
        }
        for n in row.nodes {
            let _ = write!(out, ",{n}");
        }
        out.push('\n');
    }
    out
}

pub const SUMMARY_HEADER: &str = "seed,method,train_mse,predict_mse,converge_step,diverged";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line per run across all sweeps, in the given order.
pub fn summary_csv(sweeps: &[SweepResult]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for sweep in sweeps {
        for r in &sweep.records {
            let conv = if r.diverged() { None } else { convergence_step(&r.train_norms(), SUMMARY_REL_TOL) };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.seed,
                r.method,
                opt(r.train_mse),
                opt(r.predict_mse),
                opt(conv),
                r.diverged()
            );
        }
    }
    out
}

pub const COMPARE_HEADER: &str =
    "method,runs,diverged,train_mse_median,train_mse_min,train_mse_max,predict_mse_median,predict_mse_min,predict_mse_max";

/// Method-by-metric table of medians with their spread.
pub fn compare_csv(sweeps: &[SweepResult]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    let cells = |s: Option<Spread>| match s {
        Some(s) => format!("{},{},{}", s.median, s.min, s.max),
        None => ",,".to_string(),
    };
    for s in sweeps {
        let a = &s.aggregate;
        let _ = writeln!(out, "{},{},{},{},{}", s.method, a.runs, a.diverged, cells(a.train_mse), cells(a.predict_mse));
    }
    out
}

/// The comparison as an aligned text table of medians.
pub fn compare_text(sweeps: &[SweepResult]) -> String {
    let fmt = |s: Option<Spread>| s.map(|s| format!("{:.4e}", s.median)).unwrap_or_else(|| "n/a".into());
    let mut out = format!("{:<16} {:>16} {:>18} {:>9}\n", "method", "training MSE", "prediction MSE", "diverged");
    for s in sweeps {
        let a = &s.aggregate;
        let _ = writeln!(
            out,
            "{:<16} {:>16} {:>18} {:>5}/{:<3}",
            s.method.as_str(),
            fmt(a.train_mse),
            fmt(a.predict_mse),
            a.diverged,
            a.runs
        );
    }
    out
}

/// Parses `"composite-rls"` etc; kept here for CSV readers.
pub fn parse_method(s: &str) -> Result<Method> {
    s.parse().map_err(|reason| Error::Validation { key: "method".into(), reason })
}

const SNAPSHOT_MAGIC: &str = "esn-force-snapshot";
const SNAPSHOT_VERSION: u32 = 1;

/// Writes the model as versioned plain text.
///
/// ```text
/// esn-force-snapshot 1
/// n <N>
/// connectivity <p>
/// chaos_factor <g>
/// leak_rate <alpha>
/// leak_uses_current_x <bool>
/// w_in <N values>
/// w_fb <N values>
/// w_out <N values>
/// w <nnz>
/// <row> <col> <value>      (nnz lines, row-major)
/// ```
///
/// Values are space-separated and printed in shortest round-trip form, so a
/// reloaded model is bit-identical.
pub fn write_snapshot(model: &EsnModel) -> String {
    let p = model.params;
    let vec_line = |name: &str, v: &DenseVector| {
        let vals: Vec<String> = v.as_slice().iter().map(|x| format!("{x:?}")).collect();
        format!("{name} {}\n", vals.join(" "))
    };
    let mut out = format!("{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}\n");
    let _ = writeln!(out, "n {}", p.n);
    let _ = writeln!(out, "connectivity {:?}", p.connectivity);
    let _ = writeln!(out, "chaos_factor {:?}", p.chaos_factor);
    let _ = writeln!(out, "leak_rate {:?}", p.leak_rate);
    let _ = writeln!(out, "leak_uses_current_x {}", p.leak_uses_current_x);
    out += &vec_line("w_in", model.input_weights());
    out += &vec_line("w_fb", model.feedback_weights());
    out += &vec_line("w_out", &model.w_out);
    let _ = writeln!(out, "w {}", model.internal().nnz());
    for (r, c, v) in model.internal().triplets() {
        let _ = writeln!(out, "{r} {c} {v:?}");
    }
    out
}

/// Inverse of [`write_snapshot`].
pub fn read_snapshot(text: &str) -> Result<EsnModel> {
    let bad = |msg: String| Error::Snapshot(msg);
    let mut lines = text.lines();
    let mut next = |what: &str| lines.next().ok_or_else(|| bad(format!("missing {what}")));

    let header = next("header")?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        [SNAPSHOT_MAGIC, v] if *v == SNAPSHOT_VERSION.to_string() => {}
        _ => return Err(bad(format!("unrecognized header `{header}`"))),
    }
    fn field<'a>(line: &'a str, name: &str) -> Result<&'a str> {
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' ').or(if rest.is_empty() { Some("") } else { None }))
            .ok_or_else(|| Error::Snapshot(format!("expected `{name}`, got `{line}`")))
    }
    fn num<T: std::str::FromStr>(s: &str, name: &str) -> Result<T> {
        s.trim().parse().map_err(|_| Error::Snapshot(format!("bad value for {name}: `{s}`")))
    }
    fn floats(s: &str, name: &str) -> Result<Vec<f64>> {
        s.split_whitespace().map(|t| num(t, name)).collect()
    }

    let n: usize = num(field(next("n")?, "n")?, "n")?;
    let connectivity = num(field(next("connectivity")?, "connectivity")?, "connectivity")?;
    let chaos_factor = num(field(next("chaos_factor")?, "chaos_factor")?, "chaos_factor")?;
    let leak_rate = num(field(next("leak_rate")?, "leak_rate")?, "leak_rate")?;
    let leak_uses_current_x = num(field(next("leak_uses_current_x")?, "leak_uses_current_x")?, "leak_uses_current_x")?;
    let w_in = floats(field(next("w_in")?, "w_in")?, "w_in")?;
    let w_fb = floats(field(next("w_fb")?, "w_fb")?, "w_fb")?;
    let w_out = floats(field(next("w_out")?, "w_out")?, "w_out")?;
    let nnz: usize = num(field(next("w")?, "w")?, "w")?;
    let mut triplets = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let line = next("w entry")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad(format!("bad w entry `{line}`")));
        }
        triplets.push((num(parts[0], "w row")?, num(parts[1], "w col")?, num(parts[2], "w value")?));
    }
    let params = EsnParams { n, connectivity, chaos_factor, leak_rate, leak_uses_current_x };
    let w = SparseMatrix::from_triplets(n, &triplets)?;
    if w.nnz() != nnz {
        return Err(bad("zero-valued w entry".into()));
    }
    EsnModel::from_parts(params, w, w_in.into(), w_fb.into(), w_out.into())
}
