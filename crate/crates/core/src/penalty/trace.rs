//! Per-iterate trace output: a CSV of residuals and a JSON sidecar holding
//! the iterates and multiplier estimates.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::IterateRecord;

pub const CSV_HEADER: &str = "k,stationarity,feasibility,complementarity,dual_feasibility,phi,inner_iters";

#[derive(Serialize)]
struct SidecarEntry<'a> {
    k: f64,
    x: &'a [f64],
    lambda: &'a [f64],
}

/// Path of the JSON sidecar for a CSV trace path.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_csv<W: Write>(mut out: W, records: &[IterateRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{}",
            r.k, r.stationarity, r.feasibility, r.complementarity, r.dual_feasibility, r.phi, r.inner_iters
        )?;
    }
    out.flush()
}

/// Writes `path` as CSV and its sidecar next to it.
pub fn write_trace(path: &Path, records: &[IterateRecord]) -> io::Result<()> {
    write_csv(BufWriter::new(File::create(path)?), records)?;
    let entries: Vec<SidecarEntry> = records
        .iter()
        .map(|r| SidecarEntry {
            k: r.k,
            x: &r.x,
            lambda: &r.lambda,
        })
        .collect();
    let mut side = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut side, &entries)?;
    writeln!(side)?;
    side.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::InnerStatus;

    #[test]
    fn csv_layout() {
        let r = IterateRecord {
            k: 10.0,
            x: vec![1.0],
            lambda: vec![0.5],
            phi: -2.0,
            stationarity: 1e-9,
            feasibility: 0.05,
            complementarity: 0.0,
            dual_feasibility: 0.0,
            inner_iters: 12,
            inner_status: InnerStatus::Converged,
            interior: None,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "1e1,1e-9,5e-2,0e0,0e0,-2e0,12");
        let parsed: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed, vec![10.0, 1e-9, 0.05, 0.0, 0.0, -2.0, 12.0]);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/run.csv")), PathBuf::from("out/run.json"));
    }
}
