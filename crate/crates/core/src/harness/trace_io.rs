//! Trace CSV: header `k,t_k,grad_norm,f_val,omega_val,feas,recon_err,bregman_to_feasible`,
//! one LF-terminated row per iteration, floats in shortest round-trip form,
//! absent optional columns as empty cells.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::IterationRecord;

pub const TRACE_HEADER: [&str; 8] = [
    "k",
    "t_k",
    "grad_norm",
    "f_val",
    "omega_val",
    "feas",
    "recon_err",
    "bregman_to_feasible",
];

pub fn format_float(v: f64) -> String {
    ryu::Buffer::new().format(v).to_string()
}

pub fn write_trace<W: Write>(trace: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_HEADER)?;
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for r in trace {
        w.write_record([
            r.k.to_string(),
            format_float(r.t_k),
            format_float(r.grad_norm),
            format_float(r.f_val),
            format_float(r.omega_val),
            format_float(r.feas),
            opt(r.recon_err),
            opt(r.bregman_to_feasible),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv(trace: &[IterationRecord], path: impl AsRef<Path>) -> Result<()> {
    write_trace(trace, File::create(path)?)
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<IterationRecord>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::InvalidParameter(format!(
            "unexpected trace header {header:?}"
        )));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| {
                Error::InvalidParameter(format!(
                    "bad number {:?} in column {}",
                    &rec[i], TRACE_HEADER[i]
                ))
            })
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        out.push(IterationRecord {
            k: rec[0].parse().map_err(|_| {
                Error::InvalidParameter(format!("bad iteration index {:?}", &rec[0]))
            })?,
            t_k: num(1)?,
            grad_norm: num(2)?,
            f_val: num(3)?,
            omega_val: num(4)?,
            feas: num(5)?,
            recon_err: opt(6)?,
            bregman_to_feasible: opt(7)?,
        });
    }
    Ok(out)
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<IterationRecord>> {
    read_trace(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize) -> IterationRecord {
        IterationRecord {
            k,
            t_k: 0.1 * (k as f64 + 1.0),
            grad_norm: 1.0 / 3.0,
            f_val: 2e-17,
            omega_val: 12.5,
            feas: std::f64::consts::PI,
            recon_err: if k == 1 { None } else { Some(1e300) },
            bregman_to_feasible: Some(0.0),
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let mut buf = Vec::new();
        write_trace(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            TRACE_HEADER.join(",") + "\n"
        );
    }

    #[test]
    fn rows_and_round_trip() {
        let trace: Vec<_> = (0..3).map(rec).collect();
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
        assert!(text.lines().nth(2).unwrap().contains(",,"));
        assert_eq!(read_trace(&buf[..]).unwrap(), trace);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trace("a,b\n1,2\n".as_bytes()).is_err());
    }
}
