//! Trajectory tables as CSV.
//!
//! Floats carry 15 significant digits; empty cells stand for missing values.
//! The residual columns hold real parts.

use std::io::{Read, Write};

use thiserror::Error;

use crate::flow::{Trajectory, TrajectoryRecord};
use crate::rat::CF;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
}

pub fn header(arity: usize) -> Vec<String> {
    let mut h = vec!["step".to_string(), "r".to_string()];
    for p in ["x", "y"] {
        for i in 1..=arity {
            h.push(format!("{p}{i}_re"));
            h.push(format!("{p}{i}_im"));
        }
    }
    h.extend(["u_re", "u_im", "gamma_re", "gamma_im"].map(String::from));
    h.extend((1..=arity).map(|i| format!("drift_{i}")));
    h.push("res_u".into());
    h.push("res_gamma".into());
    h
}

pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // no negative zero
        "0.00000000000000e0".into()
    } else if v.is_finite() {
        format!("{v:.14e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn row(rec: &TrajectoryRecord) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut out = vec![rec.step.to_string(), fmt_f64(rec.r)];
    for z in rec.x.iter().chain(&rec.y) {
        out.push(fmt_f64(z.re));
        out.push(fmt_f64(z.im));
    }
    for z in [rec.u, rec.gamma] {
        out.push(opt(z.map(|z| z.re)));
        out.push(opt(z.map(|z| z.im)));
    }
    out.extend(rec.drift.iter().map(|&d| opt(d)));
    out.push(opt(rec.res_u.map(|z| z.re)));
    out.push(opt(rec.res_gamma.map(|z| z.re)));
    out
}

pub fn write_records<W: Write>(out: W, arity: usize, records: &[TrajectoryRecord]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(arity))?;
    for rec in records {
        w.write_record(row(rec))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_string(traj: &Trajectory) -> String {
    let arity = traj.records.first().map_or(0, |r| r.x.len());
    let mut buf = Vec::new();
    write_records(&mut buf, arity, &traj.records).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// One parsed CSV row. Fields that the table does not carry
/// (`driven_rate`, `jdet_step`, imaginary residual parts) are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub step: u64,
    pub r: f64,
    pub x: Vec<CF>,
    pub y: Vec<CF>,
    pub u: Option<CF>,
    pub gamma: Option<CF>,
    pub drift: Vec<Option<f64>>,
    pub res_u: Option<f64>,
    pub res_gamma: Option<f64>,
}

fn parse_f64(s: &str, row: usize) -> Result<f64, CsvError> {
    s.parse().map_err(|_| CsvError::Row { row, msg: format!("not a number: `{s}`") })
}

fn parse_opt(s: &str, row: usize) -> Result<Option<f64>, CsvError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s, row).map(Some)
    }
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<CsvRow>, CsvError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let hdr: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if hdr.len() < 10 || !(hdr.len() - 8).is_multiple_of(5) {
        return Err(CsvError::Header(format!("{} columns", hdr.len())));
    }
    let n = (hdr.len() - 8) / 5;
    if hdr != header(n) {
        return Err(CsvError::Header(hdr.join(",")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != hdr.len() {
            return Err(CsvError::Row { row, msg: format!("{} fields", rec.len()) });
        }
        let f = |k: usize| parse_f64(&rec[k], row);
        let o = |k: usize| parse_opt(&rec[k], row);
        let pair = |k: usize| -> Result<Option<CF>, CsvError> {
            match (o(k)?, o(k + 1)?) {
                (Some(re), Some(im)) => Ok(Some(CF::new(re, im))),
                (None, None) => Ok(None),
                _ => Err(CsvError::Row { row, msg: "half-empty complex value".into() }),
            }
        };
        let step = rec[0].parse().map_err(|_| CsvError::Row { row, msg: format!("bad step `{}`", &rec[0]) })?;
        let mut k = 2;
        let vec_cf = |k: &mut usize| -> Result<Vec<CF>, CsvError> {
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push(CF::new(f(*k)?, f(*k + 1)?));
                *k += 2;
            }
            Ok(v)
        };
        let x = vec_cf(&mut k)?;
        let y = vec_cf(&mut k)?;
        let u = pair(k)?;
        let gamma = pair(k + 2)?;
        k += 4;
        let drift = (k..k + n).map(o).collect::<Result<_, _>>()?;
        k += n;
        rows.push(CsvRow { step, r: f(1)?, x, y, u, gamma, drift, res_u: o(k)?, res_gamma: o(k + 1)? });
    }
    Ok(rows)
}
