//! Dynamic window approach over constant-command planar rollouts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sonar::SonarScan;
use crate::vehicle::{integrate, wrap_angle, Integrator, VehicleLimits, VehicleState};
use crate::world::{Vec2, Vec3};

use super::scan_points_xy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwaConfig {
    pub v_samples: usize,
    pub r_samples: usize,
    /// Rollout length, s.
    pub horizon: f64,
    /// Rollout integration step, s.
    pub sim_dt: f64,
    /// Time over which the dynamic window is reachable, s.
    pub window_dt: f64,
    /// m/s²
    pub max_accel: f64,
    /// rad/s²
    pub max_yaw_accel: f64,
    /// Rollouts passing closer than this to a scan point collide, m.
    pub robot_radius: f64,
    /// Free arc length beyond which the clearance score saturates, m.
    pub clearance_cap: f64,
    pub w_heading: f64,
    pub w_clearance: f64,
    pub w_speed: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        Self {
            v_samples: 7,
            r_samples: 15,
            horizon: 4.0,
            sim_dt: 0.25,
            window_dt: 0.5,
            max_accel: 0.5,
            max_yaw_accel: 0.5,
            robot_radius: 3.0,
            clearance_cap: 8.0,
            w_heading: 1.0,
            w_clearance: 0.4,
            w_speed: 0.3,
        }
    }
}

impl DwaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.v_samples < 3 || self.r_samples < 3 {
            return Err(Error::config("dwa sample counts must be >= 3"));
        }
        if !(self.horizon > 0.0 && self.sim_dt > 0.0 && self.window_dt > 0.0) {
            return Err(Error::config("dwa horizon and steps must be > 0"));
        }
        if !(self.max_accel > 0.0 && self.max_yaw_accel > 0.0 && self.robot_radius > 0.0 && self.clearance_cap > 0.0) {
            return Err(Error::config("dwa accelerations, radius and clearance cap must be > 0"));
        }
        if [self.w_heading, self.w_clearance, self.w_speed].iter().any(|w| *w < 0.0) {
            return Err(Error::config("dwa weights must be >= 0"));
        }
        Ok(())
    }
}

/// Poses visited by holding `(v, r)` over the horizon, start excluded.
pub fn rollout(pose: &VehicleState, v: f64, r: f64, cfg: &DwaConfig) -> Vec<VehicleState> {
    let steps = (cfg.horizon / cfg.sim_dt).round().max(1.0) as usize;
    let velocity = Vec3::new(v, 0.0, 0.0);
    let mut s = *pose;
    (0..steps)
        .map(|_| {
            s = integrate(&s, &velocity, r, cfg.sim_dt, Integrator::Euler);
            s
        })
        .collect()
}

/// Smallest horizontal distance from the rollout to any obstacle point.
pub fn rollout_clearance(traj: &[VehicleState], points: &[Vec2]) -> f64 {
    traj.iter()
        .flat_map(|s| {
            let p = Vec2::new(s.position.x, s.position.y);
            points.iter().map(move |q| (p - q).norm())
        })
        .fold(f64::INFINITY, f64::min)
}

/// Distance travelled along the arc of curvature `r / v` before passing
/// within the robot radius of a point, capped at the clearance cap. Turning
/// in place travels nowhere.
pub fn arc_free_distance(pose: &VehicleState, v: f64, r: f64, points: &[Vec2], cfg: &DwaConfig) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let kappa = r / v;
    let ds = 0.25f64.min(cfg.clearance_cap);
    let mut p = Vec2::new(pose.position.x, pose.position.y);
    let mut heading = pose.heading;
    let mut s = 0.0;
    while s < cfg.clearance_cap {
        let mid = heading + 0.5 * kappa * ds;
        p += ds * Vec2::new(mid.cos(), mid.sin());
        heading += kappa * ds;
        if points.iter().any(|q| (p - q).norm() <= cfg.robot_radius) {
            return s;
        }
        s += ds;
    }
    cfg.clearance_cap
}

fn samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
}

/// Best admissible `(v, r)` pair. A pair is admissible when its rollout
/// stays clear of every scan point and the vehicle can still stop within the
/// free arc ahead. When none is, the vehicle rotates in place at the
/// yaw-rate limit.
pub fn dwa_step(
    scan: &SonarScan,
    pose: &VehicleState,
    goal: &Vec3,
    cfg: &DwaConfig,
    limits: &VehicleLimits,
) -> (Vec3, f64) {
    let points = scan_points_xy(scan);
    let v_lo = (pose.velocity.x - cfg.max_accel * cfg.window_dt).max(0.0);
    let v_hi = (pose.velocity.x + cfg.max_accel * cfg.window_dt).min(limits.v_x_max);
    let r_lo = (pose.yaw_rate - cfg.max_yaw_accel * cfg.window_dt).max(-limits.r_max);
    let r_hi = (pose.yaw_rate + cfg.max_yaw_accel * cfg.window_dt).min(limits.r_max);

    let mut best: Option<(f64, f64, f64)> = None;
    for v in samples(v_lo, v_hi, cfg.v_samples) {
        for r in samples(r_lo, r_hi, cfg.r_samples) {
            let traj = rollout(pose, v, r, cfg);
            if rollout_clearance(&traj, &points) <= cfg.robot_radius {
                continue;
            }
            let free = arc_free_distance(pose, v, r, &points, cfg);
            if v * v > 2.0 * cfg.max_accel * free {
                continue;
            }
            let end = traj.last().unwrap_or(pose);
            let to_goal = goal - end.position;
            let error = wrap_angle(to_goal.y.atan2(to_goal.x) - end.heading).abs();
            let score = cfg.w_heading * (1.0 - error / std::f64::consts::PI)
                + cfg.w_clearance * (free / cfg.clearance_cap)
                + cfg.w_speed * (v / limits.v_x_max);
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, v, r));
            }
        }
    }
    match best {
        Some((_, v, r)) => (Vec3::new(v, 0.0, 0.0), r),
        None => (Vec3::zeros(), limits.r_max),
    }
}
