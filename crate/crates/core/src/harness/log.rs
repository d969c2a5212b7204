//! Trajectory logs, scan dumps and decision dumps.
//!
//! A trajectory log is CSV preceded by two comment lines: the format
//! version and the run identity.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sonar::SonarScan;
use crate::spd2c::Decision;

pub const LOG_VERSION: &str = "# eroas-trajectory v1";

/// One control cycle: the state at the start of the cycle and the commands
/// issued during it. The final record holds the terminal state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub cycle: usize,
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub heading: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub yaw_rate: f64,
    /// `horizontal`, `vertical`, `fallback_turn`, `hover`, or `end`.
    pub mode: String,
    pub vr_x: f64,
    pub vr_y: f64,
    pub vr_z: f64,
    pub r_ref: f64,
    pub vs_x: f64,
    pub vs_y: f64,
    pub vs_z: f64,
    pub r_cmd: f64,
    pub h: Option<f64>,
    pub constraint_active: bool,
    pub memory_size: usize,
    pub closest: Option<f64>,
    pub pivot_angle: Option<f64>,
    /// `sweep` when a pivot sweep was requested; the outcome on the final
    /// record.
    pub event: String,
    pub clearance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub scenario: String,
    pub algo: String,
    pub seed: u64,
    pub records: Vec<LogRecord>,
}

impl TrajectoryLog {
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{LOG_VERSION}").map_err(|e| Error::Log(e.to_string()))?;
        writeln!(out, "# scenario={} algo={} seed={}", self.scenario, self.algo, self.seed)
            .map_err(|e| Error::Log(e.to_string()))?;
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::Log(e.to_string()))?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(buf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut line = String::new();
        reader.read_line(&mut line).map_err(|e| Error::Log(e.to_string()))?;
        if line.trim_end() != LOG_VERSION {
            return Err(Error::Log(format!("unexpected header {:?}", line.trim_end())));
        }
        line.clear();
        reader.read_line(&mut line).map_err(|e| Error::Log(e.to_string()))?;
        let mut log = TrajectoryLog::default();
        for field in line.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("scenario", v)) => log.scenario = v.to_string(),
                Some(("algo", v)) => log.algo = v.to_string(),
                Some(("seed", v)) => log.seed = v.parse().map_err(|_| Error::Log(format!("bad seed {v:?}")))?,
                _ => {}
            }
        }
        let mut r = csv::Reader::from_reader(reader);
        for rec in r.deserialize() {
            log.records.push(rec?);
        }
        if log.records.is_empty() {
            return Err(Error::Log("log has no records".into()));
        }
        Ok(log)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(f)
    }
}

/// Writes one block of scan rows, preceded by a `# cycle=… t=…` comment.
pub fn write_scan_block<W: Write>(out: &mut W, cycle: usize, time: f64, scans: &[SonarScan]) -> Result<()> {
    let io = |e: std::io::Error| Error::Log(e.to_string());
    writeln!(out, "# cycle={cycle} t={time}").map_err(io)?;
    for s in scans {
        for i in 1..=s.n_beams() {
            let range = s.ranges[i - 1].unwrap_or(-1.0);
            writeln!(out, "{},{},{},{},{}", i, s.azimuth(i), s.pivot_angle, range, s.intensities[i - 1]).map_err(io)?;
        }
    }
    Ok(())
}

pub const SCAN_HEADER: &str = "# eroas-scans v1\n# beam,azimuth,pivot,range,intensity";

#[derive(Debug, Clone, Serialize)]
pub struct DecisionLine<'a> {
    pub cycle: usize,
    pub time: f64,
    #[serde(flatten)]
    pub decision: &'a Decision,
}

pub fn write_decision<W: Write>(out: &mut W, cycle: usize, time: f64, decision: &Decision) -> Result<()> {
    serde_json::to_writer(&mut *out, &DecisionLine { cycle, time, decision })?;
    writeln!(out).map_err(|e| Error::Log(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(cycle: usize) -> LogRecord {
        LogRecord {
            cycle,
            time: cycle as f64 * 0.125,
            x: 0.1 + cycle as f64,
            y: -2.0 / 3.0,
            z: -10.0,
            heading: 0.3,
            u: 0.5,
            v: 0.0,
            w: 0.0,
            yaw_rate: 1e-17,
            mode: "horizontal".into(),
            vr_x: 0.5,
            vr_y: 0.0,
            vr_z: 0.0,
            r_ref: 0.0,
            vs_x: 0.5,
            vs_y: 0.0,
            vs_z: 0.0,
            r_cmd: 0.0,
            h: if cycle % 2 == 0 { Some(12.25) } else { None },
            constraint_active: false,
            memory_size: 3,
            closest: None,
            pivot_angle: None,
            event: String::new(),
            clearance: f64::INFINITY,
        }
    }

    #[test]
    fn log_round_trips_exactly() {
        let log = TrajectoryLog {
            scenario: "free_water".into(),
            algo: "eroas".into(),
            seed: 4,
            records: (0..5).map(record).collect(),
        };
        let bytes = log.to_bytes().unwrap();
        assert!(bytes.starts_with(LOG_VERSION.as_bytes()));
        let back = TrajectoryLog::read(&bytes[..]).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(TrajectoryLog::read(&b"cycle,time\n0,0\n"[..]).is_err());
    }
}
