//! CSV and JSON writers. Floats always use 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use crate::error::CliResult;

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Coordinate column names: `x` in one dimension, `x1..xn` otherwise.
pub fn coord_header(prefix: &str, n: usize) -> Vec<String> {
    if n == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=n).map(|k| format!("{prefix}{k}")).collect()
    }
}

/// Where a command's primary output goes: a file in `--out`, or stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> CliResult<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    pub fn open(&self, name: &str) -> CliResult<Box<dyn Write>> {
        Ok(match &self.dir {
            Some(d) => Box::new(BufWriter::new(File::create(d.join(name))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

pub fn write_csv(out: Box<dyn Write>, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(mut out: Box<dyn Write>, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
