//! CSV and JSON emission with locale-free, fixed-precision numbers.

use std::io::{Read, Write};

use super::sweep::{ModeSummary, ResultRow};
use crate::error::Result;
use crate::numeric::to_db;

pub const CSV_HEADER: [&str; 11] = [
    "xi",
    "theta",
    "mode",
    "gain_linear",
    "gain_db",
    "nf_linear",
    "nf_db",
    "mean_out",
    "var_out",
    "method",
    "flags",
];

const SIGNIFICANT: usize = 12;

/// `printf("%.12g")`: 12 significant digits, trailing zeros dropped,
/// exponent form outside `1e-4 <= |x| < 1e12`.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format_g(r.xi),
            opt(r.theta),
            r.mode.to_string(),
            format_g(r.gain_linear),
            opt(r.gain_db),
            opt(r.nf_linear),
            opt(r.nf_db),
            format_g(r.mean_out),
            format_g(r.var_out),
            r.method.clone(),
            r.flags.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(crate::Error::InvalidSpec(format!("unexpected CSV header {headers:?}")));
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

fn db(x: f64) -> String {
    to_db(x).map_or_else(|| "-inf".into(), |d| format!("{d:.4}"))
}

fn at(xi: f64, theta: Option<f64>) -> String {
    match theta {
        Some(t) => format!("xi={}, theta={}", format_g(xi), format_g(t)),
        None => format!("xi={}", format_g(xi)),
    }
}

pub fn write_summary<W: Write>(summary: &[ModeSummary], mut out: W) -> Result<()> {
    for s in summary {
        write!(out, "mode {}: {} rows", s.mode, s.rows)?;
        if let (Some((lo, xl, tl)), Some((hi, xh, th))) = (s.min, s.max) {
            write!(
                out,
                ", NF min {} dB ({}), max {} dB ({})",
                db(lo),
                at(xl, tl),
                db(hi),
                at(xh, th)
            )?;
        }
        if s.undefined > 0 {
            write!(out, ", {} undefined", s.undefined)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
