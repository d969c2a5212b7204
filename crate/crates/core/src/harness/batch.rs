//! Scenario × algorithm × seed sweeps, run in parallel.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::controller::Algorithm;
use super::episode::run_episode;
use super::metrics::{median_sorted, Metrics};
use super::scenario::Scenario;

/// One batch run; `error` is set when the scenario could not be prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub scenario: String,
    pub algo: String,
    pub seed: u64,
    pub outcome: String,
    pub success: bool,
    pub path_length: f64,
    pub travel_time: f64,
    pub min_clearance: f64,
    pub mean_angular_jerk: f64,
    pub d_min_violations: usize,
    pub pivots: usize,
    pub median_cycle_time: f64,
    pub error: String,
}

impl BatchRow {
    fn from_metrics(m: &Metrics) -> Self {
        Self {
            scenario: m.scenario.clone(),
            algo: m.algo.clone(),
            seed: m.seed,
            outcome: m.outcome.map_or("", |o| o.name()).to_string(),
            success: m.success,
            path_length: m.path_length,
            travel_time: m.travel_time,
            min_clearance: m.min_clearance,
            mean_angular_jerk: m.mean_angular_jerk,
            d_min_violations: m.d_min_violations,
            pivots: m.pivots,
            median_cycle_time: m.cycle_time.map_or(0.0, |c| c.median),
            error: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub algo: String,
    pub runs: usize,
    pub successes: usize,
    /// Medians over successful runs; NaN when none succeeded.
    pub median_path_length: f64,
    pub median_travel_time: f64,
    pub median_angular_jerk: f64,
    pub min_clearance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub rows: Vec<BatchRow>,
    pub summary: Vec<SummaryRow>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    median_sorted(&v)
}

/// Runs every scenario with every algorithm for `reps` consecutive seeds
/// starting at the scenario's own seed.
pub fn run_batch(scenarios: &[Scenario], algos: &[Algorithm], reps: usize) -> BatchResult {
    let jobs: Vec<(&Scenario, Algorithm, u64)> = scenarios
        .iter()
        .flat_map(|s| {
            algos
                .iter()
                .flat_map(move |&a| (0..reps as u64).map(move |k| (s, a, s.seed + k)))
        })
        .collect();
    let rows: Vec<BatchRow> = jobs
        .par_iter()
        .map(|&(s, algo, seed)| match s.with_seed(seed) {
            Ok(sc) => BatchRow::from_metrics(&run_episode(&sc, algo).1),
            Err(e) => BatchRow {
                scenario: s.name.clone(),
                algo: algo.name().to_string(),
                seed,
                outcome: String::new(),
                success: false,
                path_length: f64::NAN,
                travel_time: f64::NAN,
                min_clearance: f64::NAN,
                mean_angular_jerk: f64::NAN,
                d_min_violations: 0,
                pivots: 0,
                median_cycle_time: f64::NAN,
                error: e.to_string(),
            },
        })
        .collect();

    let mut summary = Vec::new();
    for s in scenarios {
        for &algo in algos {
            let group: Vec<&BatchRow> = rows.iter().filter(|r| r.scenario == s.name && r.algo == algo.name()).collect();
            let ok: Vec<&&BatchRow> = group.iter().filter(|r| r.success).collect();
            summary.push(SummaryRow {
                scenario: s.name.clone(),
                algo: algo.name().to_string(),
                runs: group.len(),
                successes: ok.len(),
                median_path_length: median(ok.iter().map(|r| r.path_length).collect()),
                median_travel_time: median(ok.iter().map(|r| r.travel_time).collect()),
                median_angular_jerk: median(ok.iter().map(|r| r.mean_angular_jerk).collect()),
                min_clearance: group.iter().map(|r| r.min_clearance).fold(f64::INFINITY, f64::min),
            });
        }
    }
    BatchResult { rows, summary }
}

/// Reads every `*.toml` scenario in `dir`, sorted by file name.
pub fn load_scenario_dir(dir: &Path) -> Result<Vec<Scenario>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(|p| Scenario::read(p)).collect()
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
