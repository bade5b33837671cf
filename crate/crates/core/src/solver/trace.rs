//! Per-iteration run records and their CSV / JSON forms.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::bench::cost::FevBreakdown;
use crate::error::{Error, Result};
use crate::model::Vector;
use crate::solver::line_search::LineSearchOutcome;

pub const SCHEMA: &str = "nsopt/1";
pub const TRACE_HEADER: [&str; 7] = ["k", "N_k", "alpha_k", "zeta_k", "fev_cum", "f_saa", "f_true"];

/// State at iterate `x_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    /// Sample size used at `x_k`.
    pub n_k: usize,
    /// Step that produced `x_k`; `None` at `k = 0`.
    pub alpha: Option<f64>,
    /// Spectral coefficient at `x_k`.
    pub zeta: f64,
    /// FEV spent to reach `x_k`.
    pub fev_cum: u64,
    /// `f_{N_k}(x_k)`
    pub f_saa: f64,
    /// `f(x_k)` on the full sample, when tracked.
    pub f_true: Option<f64>,
}

/// Diagnostics for the step `x_{k-1} -> x_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub k: u64,
    pub alpha: f64,
    pub subgradient_norm: f64,
    /// Outcome of the descent-preferring selection at `x_{k-1}`, when run.
    pub descent_certified: Option<bool>,
    pub line_search: Option<LineSearchOutcome>,
    /// FEV charged by this step.
    pub fev_step: u64,
    /// `|f_{N}(x_k) - f(x_k)| + |f_{N}(x_ref) - f(x_ref)|` with `x_ref = x_0`;
    /// a proxy for the sample error at `x_k`.
    pub ebar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Budget,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub steps: Vec<StepDiagnostics>,
    pub termination: Termination,
    pub fev: FevBreakdown,
    pub x0: Vector,
    pub x_final: Vector,
}

impl RunTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("a trace always holds the initial record")
    }

    /// Smallest recorded full-sample value.
    pub fn best_true(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.f_true).reduce(f64::min)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_trace_csv(&self.records, out)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: &'a str,
            records: &'a [TraceRecord],
        }
        Ok(serde_json::to_string_pretty(&Doc { schema: SCHEMA, records: &self.records })?)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], mut out: W) -> Result<()> {
    writeln!(out, "# schema: {SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.n_k.to_string(),
            r.alpha.map(fmt_real).unwrap_or_default(),
            fmt_real(r.zeta),
            r.fev_cum.to_string(),
            fmt_real(r.f_saa),
            r.f_true.map(fmt_real).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim() != format!("# schema: {SCHEMA}") {
        return Err(Error::Parse { line: 1, message: format!("expected schema line, got '{}'", first.trim()) });
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse { line: 2, message: "unexpected trace header".into() });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 3;
        let bad = |what: &str| Error::Parse { line, message: format!("bad {what}") };
        let real = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
        let opt = |s: &str, what: &str| {
            if s.is_empty() {
                Ok(None)
            } else {
                real(s, what).map(Some)
            }
        };
        out.push(TraceRecord {
            k: row[0].parse().map_err(|_| bad("k"))?,
            n_k: row[1].parse().map_err(|_| bad("N_k"))?,
            alpha: opt(&row[2], "alpha_k")?,
            zeta: real(&row[3], "zeta_k")?,
            fev_cum: row[4].parse().map_err(|_| bad("fev_cum"))?,
            f_saa: real(&row[5], "f_saa")?,
            f_true: opt(&row[6], "f_true")?,
        });
    }
    Ok(out)
}
