//! CSV serialization of iterate traces.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64` exactly.

use std::io::{Read, Write};
use std::path::Path;

use hscale::optimizers::IterateRecord;
use hscale::scaling::CurvatureFlag;

use crate::error::BenchError;

pub const HEADER: [&str; 8] = ["k", "f", "gnorm", "s", "alpha", "flag", "ls_trials", "units"];

pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn flag_str(flag: Option<CurvatureFlag>) -> &'static str {
    flag.map_or("NONE", CurvatureFlag::as_str)
}

fn parse_flag(s: &str) -> Option<Option<CurvatureFlag>> {
    match s {
        "SPC" => Some(Some(CurvatureFlag::Spc)),
        "LPC" => Some(Some(CurvatureFlag::Lpc)),
        "NC" => Some(Some(CurvatureFlag::Nc)),
        "NONE" => Some(None),
        _ => None,
    }
}

/// Writes the trace; a trailing `wolfe` column is added when any row carries the diagnostic.
pub fn write_records<W: Write>(records: &[IterateRecord], out: W) -> csv::Result<()> {
    let with_wolfe = records.iter().any(|r| r.wolfe.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = HEADER.to_vec();
    if with_wolfe {
        header.push("wolfe");
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.k.to_string(),
            format_real(r.f),
            format_real(r.gnorm),
            format_real(r.s),
            format_real(r.alpha),
            flag_str(r.flag).to_string(),
            r.ls_trials.to_string(),
            format_real(r.units),
        ];
        if with_wolfe {
            row.push(match r.wolfe {
                Some(true) => "1".into(),
                Some(false) => "0".into(),
                None => String::new(),
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_trace(records: &[IterateRecord], path: &Path) -> Result<(), BenchError> {
    let io = |e: &dyn std::fmt::Display| BenchError::Io { path: path.to_path_buf(), message: e.to_string() };
    let file = std::fs::File::create(path).map_err(|e| io(&e))?;
    write_records(records, std::io::BufWriter::new(file)).map_err(|e| io(&e))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<IterateRecord>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let with_wolfe = match cols.as_slice() {
        c if c == HEADER => false,
        c if c.len() == 9 && c[..8] == HEADER && c[8] == "wolfe" => true,
        _ => return Err(format!("unexpected header {cols:?}")),
    };
    let mut records = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let bad = |field: &str| format!("row {}: bad `{field}` value", i + 1);
        let real = |j: usize| row[j].parse::<f64>().map_err(|_| bad(HEADER[j]));
        records.push(IterateRecord {
            k: row[0].parse().map_err(|_| bad("k"))?,
            f: real(1)?,
            gnorm: real(2)?,
            s: real(3)?,
            alpha: real(4)?,
            flag: parse_flag(&row[5]).ok_or_else(|| bad("flag"))?,
            ls_trials: row[6].parse().map_err(|_| bad("ls_trials"))?,
            units: real(7)?,
            wolfe: if with_wolfe {
                match &row[8] {
                    "1" => Some(true),
                    "0" => Some(false),
                    "" => None,
                    _ => return Err(bad("wolfe")),
                }
            } else {
                None
            },
        });
    }
    Ok(records)
}

pub fn read_trace(path: &Path) -> Result<Vec<IterateRecord>, BenchError> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    read_records(file).map_err(|message| BenchError::Trace { path: path.to_path_buf(), message })
}
