// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV emission. Floats use 17 significant digits so every binary64 value
//! survives a round trip; `#` lines carry metadata ahead of the header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use quasilinear::dynamics::Abscissa;
use quasilinear::Trajectory;

use crate::CliError;

pub const TIME_HEADER: [&str; 8] = ["t_s", "n1", "n2", "n3", "norm", "rate_per_s", "g_rate_per_s", "epsilon"];
pub const DISTANCE_HEADER: [&str; 8] = ["L_m", "n1", "n2", "n3", "norm", "rate_per_m", "g_rate_per_s", "epsilon"];

pub fn float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

pub type CsvWriter = csv::Writer<BufWriter<File>>;

/// Opens `path`, writes `# ` comment lines and the header row.
pub fn create(path: &Path, comments: &[String], header: &[&str]) -> Result<CsvWriter, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut buf = BufWriter::new(file);
    for c in comments {
        writeln!(buf, "# {c}").map_err(|e| CliError::io(path, e))?;
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    Ok(w)
}

pub fn finish(mut w: CsvWriter, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, comments: &[String]) -> Result<(), CliError> {
    let header = match traj.abscissa {
        Abscissa::Time => TIME_HEADER,
        Abscissa::Distance => DISTANCE_HEADER,
    };
    let mut w = create(path, comments, &header)?;
    for s in &traj.samples {
        let [n1, n2, n3] = *s.n.as_array();
        w.write_record([
            float(s.t),
            float(n1),
            float(n2),
            float(n3),
            float(s.norm),
            float(s.rate),
            float(s.g_rate),
            s.epsilon.map_or(String::new(), float),
        ])?;
    }
    finish(w, path)
}

/// Writes a serializable report as TOML.
pub fn write_report<T: serde::Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let text = toml::to_string(report).map_err(|e| CliError::numeric(format!("cannot encode report: {e}")))?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
