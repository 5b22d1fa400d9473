//! CSV and JSON output.
//!
//! Floats are written with Rust's shortest round-trip formatting, so the
//! same run always produces byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::DetectionRecord;
use crate::error::Result;
use crate::guidance::velocity;
use crate::integrator::Trajectory;
use crate::oracles::OracleReport;
use crate::pattern::{Divergence, Gap, Pattern};
use crate::wavefunction::WaveFunction;
use crate::SCHEMA_VERSION;

pub const RECORD_HEADER: [&str; 5] = ["trajectory_id", "status", "y0_initial", "y1_final", "y2_final"];
pub const PATTERN_HEADER: [&str; 4] = ["bin_left", "bin_right", "count", "normalized_density"];
pub const TRAJECTORY_HEADER: [&str; 6] = ["trajectory_id", "t", "y1", "y2", "v1", "v2"];

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_records<W: Write>(out: W, records: &[DetectionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.trajectory_id.to_string(),
            r.status.as_str().to_string(),
            num(r.y0_initial),
            num(r.y1_final),
            num(r.y2_final),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per bin. An empty pattern yields the header only.
pub fn write_pattern<W: Write>(out: W, pattern: &Pattern) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PATTERN_HEADER)?;
    if pattern.total_weight > 0.0 {
        let dens = pattern.densities();
        for (i, e) in pattern.bin_edges.windows(2).enumerate() {
            w.write_record([num(e[0]), num(e[1]), num(pattern.counts[i]), num(dens[i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sampled positions with the guidance velocity at each sample. Velocities
/// are left empty where the amplitude is too close to a node.
pub fn write_trajectories<W: Write>(out: W, wf: &WaveFunction, trajectories: &[(u64, &Trajectory)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for (id, traj) in trajectories {
        for p in &traj.samples {
            let (v1, v2) = match velocity(wf, p) {
                Ok(v) => (num(v.v1), num(v.v2)),
                Err(_) => (String::new(), String::new()),
            };
            w.write_record([id.to_string(), num(p.t), num(p.y1), num(p.y2), v1, v2])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Machine-readable run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: String,
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub counts: BTreeMap<String, u64>,
    pub divergences: BTreeMap<String, Divergence>,
    pub gaps: BTreeMap<String, Gap>,
    pub oracles: Vec<OracleReport>,
    pub notes: Vec<String>,
}

impl Default for Summary {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: BTreeMap::new(),
            counts: BTreeMap::new(),
            divergences: BTreeMap::new(),
            gaps: BTreeMap::new(),
            oracles: Vec::new(),
            notes: Vec::new(),
        }
    }
}

impl Summary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::TrajectoryStatus;

    #[test]
    fn empty_pattern_is_header_only() {
        let p = Pattern::symmetric(1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        write_pattern(&mut buf, &p).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bin_left,bin_right,count,normalized_density\n");
    }

    #[test]
    fn records_round_trip_floats() {
        let r = DetectionRecord {
            trajectory_id: 4,
            y1_initial: 0.0,
            y2_initial: 0.0,
            y1_final: 0.1 + 0.2,
            y2_final: -1e-300,
            t_arrival: 2.0,
            y0_initial: 1.0 / 3.0,
            status: TrajectoryStatus::Completed,
            sign_changes: [0, 0],
            diagonal_crossings: 0,
            node_events: 0,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "4");
        assert_eq!(row[1], "completed");
        assert_eq!(row[2].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(row[4].parse::<f64>().unwrap(), -1e-300);
    }

    #[test]
    fn summary_carries_schema_version() {
        let json = Summary::default().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert!(v["oracles"].is_array());
    }
}
