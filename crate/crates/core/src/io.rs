//! CSV ingestion and serialization.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back parses to the identical binary float and equal inputs always
//! produce equal bytes.

use std::fs;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

use crate::bootstrap::ReplicateMatrix;
use crate::estimands::{IvRecord, ObsRecord, ProxyRecord, SampleError, Scenario, ScenarioSample};
use crate::experiments::{McRow, RunFailure};
use crate::selection::SelectionResult;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}, column `{column}`: cannot parse `{value}`")]
    Parse { line: usize, column: String, value: String },
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Shortest decimal that parses back to exactly `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn parse_err(line: usize, column: &str, raw: &str) -> DataError {
    DataError::Parse { line, column: column.to_string(), value: raw.to_string() }
}

fn real(line: usize, column: &str, raw: &str) -> Result<f64, DataError> {
    raw.trim().parse().map_err(|_| parse_err(line, column, raw))
}

fn binary(line: usize, column: &str, raw: &str) -> Result<u8, DataError> {
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(parse_err(line, column, raw)),
    }
}

/// Reads a scenario sample: `y,t,x` (observational), `y,t,i` (IV fusion,
/// empty `i` for a missing instrument) or `y,t,p` (proxy). Columns are matched
/// by header name; extra columns are ignored. IV records may come in any
/// order and are stored complete-first.
pub fn read_sample<R: Read>(scenario: Scenario, reader: R) -> Result<ScenarioSample, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let third = match scenario {
        Scenario::Observational => "x",
        Scenario::IvFusion => "i",
        Scenario::Proxy => "p",
    };
    let (cy, ct, c3) = (column(&headers, "y")?, column(&headers, "t")?, column(&headers, third)?);
    let mut obs = Vec::new();
    let mut iv = Vec::new();
    let mut px = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let (ry, rt, r3) = (rec.get(cy).unwrap_or(""), rec.get(ct).unwrap_or(""), rec.get(c3).unwrap_or(""));
        let y = real(line, "y", ry)?;
        match scenario {
            Scenario::Observational => {
                obs.push(ObsRecord { y, t: binary(line, "t", rt)?, x: binary(line, "x", r3)? })
            }
            Scenario::IvFusion => {
                let i = if r3.trim().is_empty() { None } else { Some(real(line, "i", r3)?) };
                iv.push(IvRecord { y, t: real(line, "t", rt)?, i })
            }
            Scenario::Proxy => px.push(ProxyRecord { y, t: binary(line, "t", rt)?, p: binary(line, "p", r3)? }),
        }
    }
    Ok(match scenario {
        Scenario::Observational => ScenarioSample::observational(obs)?,
        Scenario::IvFusion => ScenarioSample::iv_fusion_unordered(iv)?,
        Scenario::Proxy => ScenarioSample::proxy(px)?,
    })
}

pub fn read_sample_file(scenario: Scenario, path: &Path) -> Result<ScenarioSample, DataError> {
    read_sample(scenario, fs::File::open(path)?)
}

/// Serializes a sample in the ingestion format. When `potential` is given
/// (one `(y0, y1)` pair per record) two extra columns `y0,y1` are appended.
pub fn sample_csv(sample: &ScenarioSample, potential: Option<&[(f64, f64)]>) -> String {
    let mut out = String::new();
    let extra = |k: usize| match potential {
        Some(p) => format!(",{},{}", fmt_f64(p[k].0), fmt_f64(p[k].1)),
        None => String::new(),
    };
    let tail = if potential.is_some() { ",y0,y1" } else { "" };
    if let Some(r) = sample.as_observational() {
        out.push_str(&format!("y,t,x{tail}\n"));
        for (k, r) in r.iter().enumerate() {
            out.push_str(&format!("{},{},{}{}\n", fmt_f64(r.y), r.t, r.x, extra(k)));
        }
    } else if let Some(r) = sample.as_iv() {
        out.push_str(&format!("y,t,i{tail}\n"));
        for (k, r) in r.iter().enumerate() {
            let i = r.i.map(fmt_f64).unwrap_or_default();
            out.push_str(&format!("{},{},{}{}\n", fmt_f64(r.y), fmt_f64(r.t), i, extra(k)));
        }
    } else if let Some(r) = sample.as_proxy() {
        out.push_str(&format!("y,t,p{tail}\n"));
        for (k, r) in r.iter().enumerate() {
            out.push_str(&format!("{},{},{}{}\n", fmt_f64(r.y), r.t, r.p, extra(k)));
        }
    }
    out
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// `g,label,estimate,diff_sq,var_diff,var_g,raw_risk,mod_risk,cv_risk,selected`;
/// `cv_risk` is empty when not computed, `selected` is 1 on exactly one row.
pub fn risk_table_csv(result: &SelectionResult) -> String {
    let mut out = String::from("g,label,estimate,diff_sq,var_diff,var_g,raw_risk,mod_risk,cv_risk,selected\n");
    for (g, r) in result.table.rows.iter().enumerate() {
        out.push_str(&format!(
            "{g},{},{},{},{},{},{},{},{},{}\n",
            quote(&r.label),
            fmt_f64(r.estimate),
            fmt_f64(r.diff_sq),
            fmt_f64(r.var_diff),
            fmt_f64(r.var_g),
            fmt_f64(r.raw_risk),
            fmt_f64(r.mod_risk),
            r.cv_risk.map(fmt_f64).unwrap_or_default(),
            u8::from(g == result.selected_g),
        ));
    }
    out
}

/// Long-format replicate dump `b,g,estimate`.
pub fn replicates_csv(matrix: &ReplicateMatrix) -> String {
    let mut out = String::from("b,g,estimate\n");
    for (b, row) in matrix.rows().iter().enumerate() {
        for (g, v) in row.iter().enumerate() {
            out.push_str(&format!("{b},{g},{}\n", fmt_f64(*v)));
        }
    }
    out
}

pub const MC_HEADER: &str = "scenario,s,method,metric,value,mc_se,runs,seed";

/// `scenario,s,method,metric,value,mc_se,runs,seed`, one line per row.
pub fn mc_rows_csv(rows: &[McRow]) -> String {
    let mut out = format!("{MC_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            quote(&r.scenario),
            fmt_f64(r.s),
            quote(&r.method),
            r.metric.name(),
            fmt_f64(r.value),
            fmt_f64(r.mc_se),
            r.runs,
            r.seed
        ));
    }
    out
}

/// Writes [`mc_rows_csv`] to `path`. An empty row list gives a header-only
/// file.
pub fn write_rows(rows: &[McRow], path: &Path) -> std::io::Result<()> {
    fs::write(path, mc_rows_csv(rows))
}

/// Failure sidecar `scenario,s,run,failure_kind,redraws`.
pub fn failures_csv(failures: &[RunFailure]) -> String {
    let mut out = String::from("scenario,s,run,failure_kind,redraws\n");
    for f in failures {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            quote(&f.scenario),
            fmt_f64(f.s),
            f.run,
            quote(&f.failure_kind),
            f.redraws
        ));
    }
    out
}

/// Parses a CSV written by [`mc_rows_csv`].
pub fn read_mc_rows<R: Read>(reader: R) -> Result<Vec<McRow>, DataError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let names = ["scenario", "s", "method", "metric", "value", "mc_se", "runs", "seed"];
    let idx = names.iter().map(|n| column(&headers, n)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let raw = |c: usize| rec.get(idx[c]).unwrap_or("");
        let bad = |c: usize| DataError::Parse { line, column: names[c].to_string(), value: raw(c).to_string() };
        let real = |c: usize| raw(c).trim().parse::<f64>().map_err(|_| bad(c));
        rows.push(McRow {
            scenario: raw(0).to_string(),
            s: real(1)?,
            method: raw(2).to_string(),
            metric: raw(3).parse().map_err(|_| bad(3))?,
            value: real(4)?,
            mc_se: real(5)?,
            runs: raw(6).trim().parse().map_err(|_| bad(6))?,
            seed: raw(7).trim().parse().map_err(|_| bad(7))?,
        });
    }
    Ok(rows)
}
