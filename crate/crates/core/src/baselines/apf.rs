//! Artificial potential field planner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sonar::SonarScan;
use crate::vehicle::{wrap_angle, VehicleLimits, VehicleState};
use crate::world::{Vec2, Vec3};

use super::scan_points_xy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApfConfig {
    /// 1/s
    pub k_att: f64,
    /// m²/s, per scan point
    pub k_rep: f64,
    /// Repulsion influence distance, m.
    pub d_0: f64,
    /// m/s
    pub speed_cap: f64,
    /// Yaw rate per radian of heading error, 1/s.
    pub yaw_gain: f64,
}

impl Default for ApfConfig {
    fn default() -> Self {
        Self {
            k_att: 0.5,
            k_rep: 20.0,
            d_0: 10.0,
            speed_cap: 1.0,
            yaw_gain: 1.0,
        }
    }
}

impl ApfConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.k_att, self.k_rep, self.d_0, self.speed_cap, self.yaw_gain];
        if all.iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            Err(Error::config("apf gains must all be > 0"))
        }
    }
}

/// Attractive plus repulsive force at the vehicle, in the world XY plane.
pub fn apf_force(scan: &SonarScan, pose: &VehicleState, goal: &Vec3, cfg: &ApfConfig) -> Vec2 {
    let p = Vec2::new(pose.position.x, pose.position.y);
    let mut f = cfg.k_att * (Vec2::new(goal.x, goal.y) - p);
    for q in scan_points_xy(scan) {
        let away = p - q;
        let d = away.norm();
        if d > 0.0 && d < cfg.d_0 {
            f += away * (cfg.k_rep * (1.0 / d - 1.0 / cfg.d_0) / (d * d * d));
        }
    }
    f
}

/// Forward speed and yaw rate toward the resultant force. A vanishing
/// resultant leaves the vehicle stalled.
pub fn apf_step(
    scan: &SonarScan,
    pose: &VehicleState,
    goal: &Vec3,
    cfg: &ApfConfig,
    limits: &VehicleLimits,
) -> (Vec3, f64) {
    let f = apf_force(scan, pose, goal, cfg);
    let magnitude = f.norm();
    if magnitude < 1e-9 {
        return (Vec3::zeros(), 0.0);
    }
    let error = wrap_angle(f.y.atan2(f.x) - pose.heading);
    let speed = magnitude.min(cfg.speed_cap) * error.cos().max(0.0);
    let r = limits.clip_yaw_rate(cfg.yaw_gain * error);
    (Vec3::new(speed, 0.0, 0.0), r)
}
