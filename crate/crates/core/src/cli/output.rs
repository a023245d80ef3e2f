//! Artifact files. Floats are written in Rust's shortest round-trip form, so
//! reading a file back reproduces every value bit for bit.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::PriceSystem;
use crate::model::{Outcome, Problem};
use crate::nad::NadNode;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(format!("csv: {e}"))
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

/// Shortest digits that parse back to the same f64; exponent form outside [1e−5, 1e16).
fn fmt(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn rows_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = writer();
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    finish(w)
}

/// Nonzero cells of the outcome, by action then state.
pub fn outcome_csv(problem: &Problem, outcome: &Outcome) -> Result<String> {
    let n = problem.n_states();
    let cells = (0..problem.n_actions())
        .flat_map(move |j| (0..n).map(move |i| (j, i)))
        .filter(|&(j, i)| outcome.mass(j, i) != 0.0)
        .map(|(j, i)| vec![fmt(problem.action(j)), fmt(problem.state(i)), fmt(outcome.mass(j, i))]);
    rows_csv(&["y", "x", "mass"], cells)
}

/// Two sections separated by a blank line: `x,p` then `y,q`.
pub fn prices_csv(problem: &Problem, prices: &PriceSystem) -> Result<String> {
    let p = rows_csv(&["x", "p"], (0..problem.n_states()).map(|i| vec![fmt(problem.state(i)), fmt(prices.p[i])]))?;
    let q = rows_csv(&["y", "q"], (0..problem.n_actions()).map(|j| vec![fmt(problem.action(j)), fmt(prices.q[j])]))?;
    Ok(format!("{p}\n{q}"))
}

pub fn nad_csv(nodes: &[NadNode]) -> Result<String> {
    let rows = nodes.iter().map(|n| {
        vec![fmt(n.y), fmt(n.chi1), fmt(n.chi2), n.q.map(fmt).unwrap_or_default(), fmt(n.rho)]
    });
    rows_csv(&["y", "chi1", "chi2", "q", "rho"], rows)
}

/// Reads a numeric CSV with the given header. Empty fields read as `None`.
pub fn read_table(text: &str, header: &[&str]) -> Result<Vec<Vec<Option<f64>>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let got: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if got != header {
        return Err(Error::Parse { field: "header".into(), line: Some(1), msg: format!("expected {header:?}, found {got:?}") });
    }
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .zip(header)
            .map(|(s, col)| {
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse::<f64>().map(Some).map_err(|e| Error::Parse {
                    field: (*col).to_string(),
                    line: Some(k + 2),
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

/// Splits `prices.csv` into its `(x, p)` and `(y, q)` sections.
pub fn read_prices(text: &str) -> Result<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let (a, b) = text.split_once("\n\n").ok_or_else(|| Error::parse("prices", "expected two sections"))?;
    let pairs = |t: &str, h: &[&str]| -> Result<Vec<(f64, f64)>> {
        read_table(t, h)?
            .into_iter()
            .map(|r| match r[..] {
                [Some(a), Some(b)] => Ok((a, b)),
                _ => Err(Error::parse(h[1], "missing value")),
            })
            .collect()
    };
    Ok((pairs(a, &["x", "p"])?, pairs(b, &["y", "q"])?))
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Internal(e.to_string()))
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_form_round_trips() {
        let xs = [0.1, 1.0 / 3.0, 1.7059853392325e-14, 0.0, -0.0, 4.5e20, 2.0f64.sqrt(), 1e-300, -7.25e17, f64::MIN_POSITIVE];
        let text = rows_csv(&["a"], xs.iter().map(|&x| vec![fmt(x)])).unwrap();
        let back = read_table(&text, &["a"]).unwrap();
        for (x, r) in xs.iter().zip(back) {
            assert_eq!(r[0].unwrap().to_bits(), x.to_bits());
        }
        assert!(!text.contains('\r'));
    }

    #[test]
    fn header_mismatch_is_a_parse_error() {
        assert!(matches!(read_table("y,x\n1,2\n", &["y", "x", "mass"]), Err(Error::Parse { line: Some(1), .. })));
    }

    #[test]
    fn bad_number_reports_its_line() {
        match read_table("y,x\n1,2\n3,oops\n", &["y", "x"]) {
            Err(Error::Parse { field, line, .. }) => assert_eq!((field.as_str(), line), ("x", Some(3))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_q_reads_as_missing() {
        let nodes = [NadNode { y: 0.5, chi1: 0.5, chi2: 0.5, q: None, rho: 0.5 }];
        let back = read_table(&nad_csv(&nodes).unwrap(), &["y", "chi1", "chi2", "q", "rho"]).unwrap();
        assert_eq!(back[0], vec![Some(0.5), Some(0.5), Some(0.5), None, Some(0.5)]);
    }
}
