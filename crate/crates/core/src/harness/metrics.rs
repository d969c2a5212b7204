//! Episode metrics computed from a trajectory log.

use serde::{Deserialize, Serialize};

use crate::world::Vec3;

use super::log::TrajectoryLog;
use super::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "success" => Some(Outcome::Success),
            "collision" => Some(Outcome::Collision),
            "timeout" => Some(Outcome::Timeout),
            _ => None,
        }
    }
}

/// Wall-clock statistics of the planner cycles, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleTimes {
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

impl CycleTimes {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            median: median_sorted(&sorted),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            max: sorted[sorted.len() - 1],
        })
    }
}

pub(crate) fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario: String,
    pub algo: String,
    pub seed: u64,
    pub outcome: Option<Outcome>,
    pub success: bool,
    pub path_length: f64,
    pub straight_line: f64,
    pub travel_time: f64,
    pub min_clearance: f64,
    /// Mean absolute second difference of the yaw rate over dt², rad/s³.
    pub mean_angular_jerk: f64,
    /// Logged cycles with clearance below d_min.
    pub d_min_violations: usize,
    pub d_min: f64,
    pub pivots: usize,
    pub pivots_occurred: bool,
    pub sweep_time_cost: f64,
    pub tau: f64,
    pub obstacle_radius: f64,
    pub cbf_gain: f64,
    pub cycles: usize,
    pub cycle_time: Option<CycleTimes>,
}

/// Metrics of a finished log. Cycle timing is not part of the log and is
/// left unset.
pub fn compute_metrics(log: &TrajectoryLog, scenario: &Scenario) -> Metrics {
    let recs = &log.records;
    let pos: Vec<Vec3> = recs.iter().map(|r| Vec3::new(r.x, r.y, r.z)).collect();
    let path_length = pos.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let travel_time = match (recs.first(), recs.last()) {
        (Some(a), Some(b)) => b.time - a.time,
        _ => 0.0,
    };
    let min_clearance = pos
        .iter()
        .map(|p| scenario.world.distance_to_surface(p))
        .fold(f64::INFINITY, f64::min);
    let dt = scenario.control_period;
    let jerks: Vec<f64> = recs
        .windows(3)
        .map(|w| ((w[2].yaw_rate - 2.0 * w[1].yaw_rate + w[0].yaw_rate) / (dt * dt)).abs())
        .collect();
    let mean_angular_jerk = if jerks.is_empty() {
        0.0
    } else {
        jerks.iter().sum::<f64>() / jerks.len() as f64
    };
    let d_min_violations = pos
        .iter()
        .filter(|p| scenario.world.distance_to_surface(p) < scenario.d_min)
        .count();
    let pivots = recs.iter().filter(|r| r.event == "sweep").count();
    let outcome = recs.last().and_then(|r| Outcome::from_name(&r.event));
    Metrics {
        scenario: log.scenario.clone(),
        algo: log.algo.clone(),
        seed: log.seed,
        outcome,
        success: outcome == Some(Outcome::Success),
        path_length,
        straight_line: (scenario.goal - scenario.start.position).norm(),
        travel_time,
        min_clearance,
        mean_angular_jerk,
        d_min_violations,
        d_min: scenario.d_min,
        pivots,
        pivots_occurred: pivots > 0,
        sweep_time_cost: scenario.sonar.sweep_time_cost,
        tau: scenario.tracking.tau,
        obstacle_radius: scenario.cbf.obstacle_radius,
        cbf_gain: scenario.cbf.gain,
        cycles: recs.len().saturating_sub(1),
        cycle_time: None,
    }
}
