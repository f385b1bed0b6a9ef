use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use lie_kam_core::dynamics::SectionPoint;
use serde::Serialize;

use crate::exit::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// `t,M1,M2,M3`, one row per sample.
pub fn write_trajectory(
    path: &Path,
    rows: impl Iterator<Item = (f64, [f64; 3])>,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,M1,M2,M3")?;
    for (t, m) in rows {
        writeln!(w, "{t},{},{},{}", m[0], m[1], m[2])?;
    }
    w.flush()?;
    Ok(())
}

/// `t,X,theta`, one row per section point.
pub fn write_section(path: &Path, points: &[SectionPoint]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,X,theta")?;
    for p in points {
        writeln!(w, "{},{},{}", p.t, p.x, p.theta)?;
    }
    w.flush()?;
    Ok(())
}
