//! Per-cycle planners behind a common interface.
//!
//! The EROAS planner wraps the memoryless decision policy with the obstacle
//! memory, the safety filter and a small phase machine: a vertical maneuver
//! found by a pivot sweep is held until the obstacle is cleared, and a later
//! sweep looks for a way back to the goal depth.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{apf_step, dwa_step};
use crate::error::{Error, Result};
use crate::scg::{ContextMode, LocalMemory};
use crate::sonar::{project_points, SonarScan};
use crate::spd2c::{
    central_sector_clear, decide, goal_elevation, pivot_windows, select_pivot, target_beam, Decision, Maneuver,
    PivotWindow, Stage,
};
use crate::stcbf::{clip_yaw, filter, SafeReference};
use crate::vehicle::VehicleState;
use crate::world::Vec3;

use super::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Eroas,
    Apf,
    Dwa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Eroas, Algorithm::Apf, Algorithm::Dwa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Eroas => "eroas",
            Algorithm::Apf => "apf",
            Algorithm::Dwa => "dwa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eroas" => Ok(Algorithm::Eroas),
            "apf" => Ok(Algorithm::Apf),
            "dwa" => Ok(Algorithm::Dwa),
            other => Err(Error::config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Depth error beyond which the planner looks for a way back, m.
    pub depth_band: f64,
    /// Minimum time between depth-recovery sweeps, s.
    pub recovery_interval: f64,
    /// After a sweep finds no vertical passage, turn this long before the
    /// next avoidance sweep, s.
    pub sweep_retry: f64,
    /// Half-width of the memory slab seen by the filter; the obstacle radius
    /// when unset, m.
    pub slab_half_width: Option<f64>,
    /// Altitude kept over an estimated obstacle top beyond the obstacle
    /// radius, m.
    pub climb_margin: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            depth_band: 0.25,
            recovery_interval: 10.0,
            sweep_retry: 2.0,
            slab_half_width: None,
            climb_margin: 0.5,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth_band > 0.0) {
            return Err(Error::config("eroas.depth_band must be > 0"));
        }
        if !(self.recovery_interval >= 0.0 && self.sweep_retry >= 0.0 && self.climb_margin >= 0.0) {
            return Err(Error::config("eroas intervals and margin must be >= 0"));
        }
        if self.slab_half_width.is_some_and(|w| !(w > 0.0)) {
            return Err(Error::config("eroas.slab_half_width must be > 0"));
        }
        Ok(())
    }
}

/// What a planner asks of the loop for one control cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutput {
    pub mode: Maneuver,
    /// Nominal body-frame velocity reference.
    pub v_nominal: Vec3,
    pub r_nominal: f64,
    /// Body-frame velocity reference after the safety filter.
    pub v_safe: Vec3,
    /// Yaw-rate command after clipping.
    pub r_cmd: f64,
    pub filter: Option<SafeReference>,
    pub memory_size: usize,
    pub closest_distance: Option<f64>,
    /// A pivot sweep should be taken before the next cycle.
    pub request_sweep: bool,
    pub pivot: Option<f64>,
    pub decision: Option<Decision>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SweepPurpose {
    Avoid,
    Recover,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Nominal,
    AwaitSweep(SweepPurpose),
    /// Hold the elevation `theta` until the vehicle is past `target_z`.
    Climb { theta: f64, target_z: f64 },
    /// Head for the goal depth within the elevation window until `until`.
    Recover { lo: f64, hi: f64, until: f64 },
}

/// Sonar-guided planner with memory and safety filter.
#[derive(Debug, Clone)]
pub struct EroasPlanner {
    scenario: Scenario,
    memory: LocalMemory,
    phase: Phase,
    last_failed_sweep: f64,
    last_recovery_sweep: f64,
}

impl EroasPlanner {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            scenario: scenario.clone(),
            memory: LocalMemory::new(scenario.memory_radius),
            phase: Phase::Nominal,
            last_failed_sweep: f64::NEG_INFINITY,
            last_recovery_sweep: f64::NEG_INFINITY,
        }
    }

    pub fn memory(&self) -> &LocalMemory {
        &self.memory
    }

    fn slab(&self) -> f64 {
        self.scenario
            .eroas
            .slab_half_width
            .unwrap_or(self.scenario.cbf.obstacle_radius)
    }

    pub fn cycle(&mut self, scan: &SonarScan, sweep: Option<&[SonarScan]>, state: &VehicleState, goal: &Vec3) -> CycleOutput {
        let p = state.position;
        self.memory.update(&project_points(scan), &p);
        if let Some(sweep) = sweep {
            for s in sweep {
                self.memory.update(&project_points(s), &p);
            }
        }

        let (decision, request_sweep) = self.plan(scan, sweep, state, goal);

        let mode = match decision.mode {
            Maneuver::Vertical => ContextMode::Vertical,
            _ => ContextMode::Horizontal,
        };
        let ctx = self.memory.context_in_slab(state, mode, self.slab());
        let safe = filter(&decision.v_ref, state, ctx.as_ref(), &self.scenario.cbf);
        CycleOutput {
            mode: decision.mode,
            v_nominal: decision.v_ref,
            r_nominal: decision.yaw_rate_ref,
            v_safe: safe.velocity,
            r_cmd: clip_yaw(decision.yaw_rate_ref, self.scenario.limits.r_max),
            filter: Some(safe),
            memory_size: self.memory.len(),
            closest_distance: ctx.map(|c| c.distance),
            request_sweep,
            pivot: decision.pivot,
            decision: Some(decision),
        }
    }

    fn plan(&mut self, scan: &SonarScan, sweep: Option<&[SonarScan]>, state: &VehicleState, goal: &Vec3) -> (Decision, bool) {
        let cfg = &self.scenario.spd2c;
        let ctl = self.scenario.eroas;
        let r_o = self.scenario.cbf.obstacle_radius;
        let t = state.time;
        let b_t = target_beam(goal, state, scan.n_beams(), scan.fov_h);
        let central_clear = central_sector_clear(scan, cfg.central_sector, cfg.intensity_threshold);
        let depth_error = goal.z - state.position.z;

        match self.phase {
            Phase::AwaitSweep(purpose) => {
                self.phase = Phase::Nominal;
                if let Some(sweep) = sweep.filter(|s| !s.is_empty()) {
                    match purpose {
                        SweepPurpose::Avoid => {
                            let d = decide(scan, Some(sweep), state, goal, cfg);
                            match (d.mode, d.pivot) {
                                (Maneuver::Vertical, Some(theta)) => {
                                    let target_z = climb_target(sweep, theta, state, cfg, r_o + ctl.climb_margin);
                                    self.phase = Phase::Climb { theta, target_z };
                                }
                                (Maneuver::FallbackTurn, _) => self.last_failed_sweep = t,
                                _ => {}
                            }
                            return (d, false);
                        }
                        SweepPurpose::Recover => {
                            if let Some((lo, hi)) = recovery_window(sweep, state, goal, cfg, r_o + ctl.climb_margin) {
                                self.phase = Phase::Recover {
                                    lo,
                                    hi,
                                    until: t + ctl.recovery_interval,
                                };
                            }
                        }
                    }
                }
            }
            Phase::Climb { theta, target_z } => {
                let reached = if theta >= 0.0 {
                    state.position.z >= target_z
                } else {
                    state.position.z <= target_z
                };
                if reached && central_clear && !self.blocked_ahead(state, r_o) {
                    self.phase = Phase::Nominal;
                } else {
                    return (Decision::vertical(theta, b_t, cfg), false);
                }
            }
            Phase::Recover { .. } => {}
            Phase::Nominal => {}
        }

        if let Phase::Recover { lo, hi, until } = self.phase {
            let heading_down = lo < 0.0 && depth_error < 0.0;
            let heading_up = hi > 0.0 && depth_error > 0.0;
            if t < until && central_clear && depth_error.abs() > ctl.depth_band && (heading_down || heading_up) {
                let mut theta = goal_elevation(goal, state, lo, hi);
                // Never command the wrong sign when the clamp straddles zero.
                if theta * depth_error < 0.0 {
                    theta = 0.0;
                }
                let mut d = Decision::vertical(theta, b_t, cfg);
                d.stage = Stage::Pivot;
                return (d, false);
            }
            self.phase = Phase::Nominal;
        }

        let d = decide(scan, None, state, goal, cfg);
        if d.pivot_requested {
            if t - self.last_failed_sweep < ctl.sweep_retry {
                let mut turn = d.clone();
                turn.mode = Maneuver::FallbackTurn;
                turn.stage = Stage::Fallback;
                turn.v_ref = Vec3::zeros();
                turn.yaw_rate_ref = cfg.fallback_turn_rate;
                turn.pivot_requested = false;
                return (turn, false);
            }
            self.phase = Phase::AwaitSweep(SweepPurpose::Avoid);
            return (d, true);
        }
        if d.mode == Maneuver::Horizontal
            && depth_error.abs() > ctl.depth_band
            && t - self.last_recovery_sweep >= ctl.recovery_interval
        {
            self.last_recovery_sweep = t;
            self.phase = Phase::AwaitSweep(SweepPurpose::Recover);
            return (Decision::hover(b_t), true);
        }
        (d, false)
    }

    /// Whether remembered obstacle points lie ahead within the obstacle
    /// radius in depth.
    fn blocked_ahead(&self, state: &VehicleState, r_o: f64) -> bool {
        let (s, c) = state.heading.sin_cos();
        let p = state.position;
        self.memory.points().any(|q| {
            let d = q - p;
            d.z.abs() <= r_o && d.x * c + d.y * s >= 0.0
        })
    }
}

/// Altitude that keeps `clearance` over the obstacle blocking the pivot
/// angles on the near side of `theta`, bounded conservatively using the next
/// sweep angle beyond each blocked one.
fn climb_target(sweep: &[SonarScan], theta: f64, state: &VehicleState, cfg: &crate::spd2c::Spd2cConfig, clearance: f64) -> f64 {
    let z = state.position.z;
    let (lo, hi) = cfg.central_sector;
    let mut bound: Option<f64> = None;
    let up = theta >= 0.0;
    for k in 0..sweep.len() {
        let s = &sweep[k];
        let beyond = if up {
            if s.pivot_angle >= theta || k + 1 >= sweep.len() {
                continue;
            }
            sweep[k + 1].pivot_angle
        } else {
            if s.pivot_angle <= theta || k == 0 {
                continue;
            }
            sweep[k - 1].pivot_angle
        };
        for i in lo..=hi {
            if s.intensities[i - 1] < cfg.intensity_threshold {
                continue;
            }
            let Some(range) = s.ranges[i - 1] else { continue };
            let horizontal = range * s.pivot_angle.cos();
            let edge = z + horizontal * beyond.tan();
            bound = Some(match bound {
                None => edge,
                Some(b) if up => b.max(edge),
                Some(b) => b.min(edge),
            });
        }
    }
    match bound {
        Some(b) if up => b + clearance,
        Some(b) => b - clearance,
        None => z,
    }
}

/// Elevation range of the sweep leading toward the goal depth, if any.
///
/// The chosen window is narrowed so that straight travel at any of its
/// angles passes every obstacle bound seen in the sweep by `clearance`.
fn recovery_window(
    sweep: &[SonarScan],
    state: &VehicleState,
    goal: &Vec3,
    cfg: &crate::spd2c::Spd2cConfig,
    clearance: f64,
) -> Option<(f64, f64)> {
    let accepted: Vec<bool> = sweep
        .iter()
        .map(|s| central_sector_clear(s, cfg.central_sector, cfg.intensity_threshold))
        .collect();
    let angles: Vec<f64> = sweep.iter().map(|s| s.pivot_angle).collect();
    let down = goal.z < state.position.z;
    let windows: Vec<PivotWindow> = pivot_windows(&accepted, &angles, cfg.pivot_group_length)
        .into_iter()
        .filter(|w| if down { w.first_angle < 0.0 } else { w.last_angle > 0.0 })
        .collect();
    let target = goal_elevation(goal, state, angles[0], angles[angles.len() - 1]);
    let w = select_pivot(&windows, target)?;
    let (mut lo, mut hi) = (w.first_angle, w.last_angle);
    let (first, last) = cfg.central_sector;
    for k in 0..sweep.len() {
        let s = &sweep[k];
        // The neighbouring angle on the side of the window bounds the obstacle.
        let beyond = if down {
            if s.pivot_angle >= lo || k + 1 >= sweep.len() {
                continue;
            }
            sweep[k + 1].pivot_angle
        } else {
            if s.pivot_angle <= hi || k == 0 {
                continue;
            }
            sweep[k - 1].pivot_angle
        };
        for i in first..=last {
            if s.intensities[i - 1] < cfg.intensity_threshold {
                continue;
            }
            let Some(range) = s.ranges[i - 1] else { continue };
            let horizontal = range * s.pivot_angle.cos();
            if down {
                lo = lo.max((beyond.tan() + clearance / horizontal).atan());
            } else {
                hi = hi.min((beyond.tan() - clearance / horizontal).atan());
            }
        }
    }
    let useful = if down { lo < 0.0 && lo <= hi } else { hi > 0.0 && lo <= hi };
    useful.then_some((lo, hi))
}

/// Planners selectable for an episode.
#[derive(Debug, Clone)]
pub enum Planner {
    Eroas(Box<EroasPlanner>),
    Apf,
    Dwa,
}

impl Planner {
    pub fn new(algo: Algorithm, scenario: &Scenario) -> Self {
        match algo {
            Algorithm::Eroas => Planner::Eroas(Box::new(EroasPlanner::new(scenario))),
            Algorithm::Apf => Planner::Apf,
            Algorithm::Dwa => Planner::Dwa,
        }
    }

    pub fn cycle(
        &mut self,
        scenario: &Scenario,
        scan: &SonarScan,
        sweep: Option<&[SonarScan]>,
        state: &VehicleState,
        goal: &Vec3,
    ) -> CycleOutput {
        let (v, r) = match self {
            Planner::Eroas(p) => return p.cycle(scan, sweep, state, goal),
            Planner::Apf => apf_step(scan, state, goal, &scenario.apf, &scenario.limits),
            Planner::Dwa => dwa_step(scan, state, goal, &scenario.dwa, &scenario.limits),
        };
        CycleOutput {
            mode: Maneuver::Horizontal,
            v_nominal: v,
            r_nominal: r,
            v_safe: v,
            r_cmd: clip_yaw(r, scenario.limits.r_max),
            filter: None,
            memory_size: 0,
            closest_distance: None,
            request_sweep: false,
            pivot: None,
            decision: None,
        }
    }
}
