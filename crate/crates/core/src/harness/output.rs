//! CSV and gnuplot writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::finite_system::TrajectoryBundle;
use crate::limit_system::StablePathGrid;

/// Writes `rows` with a header taken from the row type's field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EventRow {
    time: f64,
    particle: usize,
    accepted: bool,
    u: Option<f64>,
    main_jump: f64,
}

/// Every candidate event of a finite run.
pub fn write_event_log(path: &Path, bundle: &TrajectoryBundle) -> Result<()> {
    let rows: Vec<EventRow> = bundle
        .events()
        .iter()
        .map(|e| EventRow {
            time: e.time,
            particle: e.particle,
            accepted: e.accepted,
            u: e.u,
            main_jump: e.main_jump,
        })
        .collect();
    write_csv(path, &rows)
}

/// Long format `(t, particle, x)` for each requested snapshot.
pub fn write_snapshots(path: &Path, snapshots: &[(f64, Vec<f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "particle", "x"])?;
    for (t, xs) in snapshots {
        for (i, x) in xs.iter().enumerate() {
            w.serialize((t, i, x))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Cumulative path `(t, S_t)` starting at `S_0 = 0`.
pub fn write_stable_path(path: &Path, grid: &StablePathGrid) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "S_t"])?;
    for (t, s) in grid.times().iter().zip(grid.values()) {
        w.serialize((t, s))?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated columns with a `#` header line.
pub fn write_gnuplot(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", header.join(" "))?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.10e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}
