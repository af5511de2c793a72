//! CSV and JSON report emitters.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses back
//! to the identical `f64`.

use std::io::Write;

use ordgap::{Error, GapSequence, Method, Result};
use serde::{Deserialize, Serialize};

/// One row of a `gaps` report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u64,
    pub method: Method,
    pub value: f64,
    pub err_estimate: f64,
}

pub const GAPS_HEADER: &[&str] = &["n", "method", "value", "err_estimate"];

/// Lossless decimal form of a float.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Writes a CSV table with the given header.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn gap_rows_csv(rows: &[GapRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.method.to_string(),
                fmt_f64(r.value),
                fmt_f64(r.err_estimate),
            ]
        })
        .collect()
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(io_err)?;
    writeln!(out).map_err(io_err)
}

#[derive(Debug, Deserialize)]
struct RawGapRow {
    n: u64,
    method: String,
    value: f64,
    err_estimate: f64,
}

/// Parses a `gaps` CSV report.
pub fn parse_gaps_csv(text: &str) -> Result<Vec<GapRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != GAPS_HEADER {
        return Err(Error::Parse(format!(
            "expected header {}, got {}",
            GAPS_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize::<RawGapRow>()
        .map(|r| {
            let r = r.map_err(|e| Error::Parse(e.to_string()))?;
            Ok(GapRow {
                n: r.n,
                method: r.method.parse()?,
                value: r.value,
                err_estimate: r.err_estimate,
            })
        })
        .collect()
}

/// The consecutive rows of one method as a sequence.
pub fn rows_to_sequence(rows: &[GapRow], method: Method) -> Result<GapSequence> {
    let picked: Vec<&GapRow> = rows.iter().filter(|r| r.method == method).collect();
    let first = picked
        .first()
        .ok_or_else(|| Error::InvalidArgument(format!("no {method} rows")))?;
    for (i, r) in picked.iter().enumerate() {
        if r.n != first.n + i as u64 {
            return Err(Error::InvalidArgument(format!(
                "{method} rows are not consecutive in n"
            )));
        }
    }
    GapSequence::new(
        first.n,
        picked.iter().map(|r| r.value).collect(),
        picked.iter().map(|r| r.err_estimate).collect(),
        method,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [1.0 / 3.0, 0.1, 1e-300, 5e-324, f64::MAX, -2.5e17, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            GapRow {
                n: 2,
                method: Method::Direct,
                value: 1.0 / 3.0,
                err_estimate: 1.1e-17,
            },
            GapRow {
                n: 3,
                method: Method::Direct,
                value: 0.25,
                err_estimate: 0.0,
            },
            GapRow {
                n: 2,
                method: Method::Mc,
                value: 0.3331,
                err_estimate: 2e-4,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, GAPS_HEADER, &gap_rows_csv(&rows)).unwrap();
        let back = parse_gaps_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, rows);
        let seq = rows_to_sequence(&back, Method::Direct).unwrap();
        assert_eq!(seq.values, vec![1.0 / 3.0, 0.25]);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_gaps_csv("n,value\n2,1.0\n").is_err());
    }
}
