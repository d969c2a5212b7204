//! Reduced AUV kinematics with fixed pitch and roll.
//!
//! Body-frame velocities are rotated by the heading into world rates:
//! `ẋ = vx cosψ − vy sinψ`, `ẏ = vx sinψ + vy cosψ`, `ż = vz`, `ψ̇ = r`.
//! The world frame is right-handed with z up, so positive `r` turns left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Vec3,
    /// Heading in (−π, π], measured counter-clockwise from +x.
    pub heading: f64,
    /// Body-frame (surge, sway, heave) velocity.
    pub velocity: Vec3,
    pub yaw_rate: f64,
    pub time: f64,
}

impl VehicleState {
    pub fn at_rest(position: Vec3, heading: f64) -> Self {
        Self {
            position,
            heading: wrap_angle(heading),
            velocity: Vec3::zeros(),
            yaw_rate: 0.0,
            time: 0.0,
        }
    }

    /// World-frame linear velocity.
    pub fn world_velocity(&self) -> Vec3 {
        body_to_world(&self.velocity, self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleLimits {
    pub v_x_max: f64,
    pub v_y_max: f64,
    pub v_z_max: f64,
    pub r_max: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        Self {
            v_x_max: 1.0,
            v_y_max: 1.0,
            v_z_max: 1.0,
            r_max: 15f64.to_radians(),
        }
    }
}

impl VehicleLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("v_x_max", self.v_x_max),
            ("v_y_max", self.v_y_max),
            ("v_z_max", self.v_z_max),
            ("r_max", self.r_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("limits.{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Clips a body-frame velocity reference. Surge is never negative.
    pub fn clip_velocity(&self, v: &Vec3) -> Vec3 {
        Vec3::new(
            v.x.clamp(0.0, self.v_x_max),
            v.y.clamp(-self.v_y_max, self.v_y_max),
            v.z.clamp(-self.v_z_max, self.v_z_max),
        )
    }

    pub fn clip_yaw_rate(&self, r: f64) -> f64 {
        r.clamp(-self.r_max, self.r_max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Translation uses the heading at the middle of the step.
    #[default]
    Midpoint,
    /// Translation uses the heading at the start of the step.
    Euler,
}

/// First-order tracking of velocity references, standing in for the
/// low-level controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingConfig {
    /// Time constant of the velocity lag; 0 tracks references exactly.
    pub tau: f64,
    /// Integrator step.
    pub dt: f64,
    pub integrator: Integrator,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            tau: 0.0,
            dt: 0.05,
            integrator: Integrator::Midpoint,
        }
    }
}

impl TrackingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::config(format!("tracking.tau must be >= 0, got {}", self.tau)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("tracking.dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Advances the vehicle by one integrator step of `dt` seconds.
pub fn step(
    state: &VehicleState,
    v_ref: &Vec3,
    r_ref: f64,
    limits: &VehicleLimits,
    tracking: &TrackingConfig,
    dt: f64,
) -> VehicleState {
    let v_target = limits.clip_velocity(v_ref);
    let r_target = limits.clip_yaw_rate(r_ref);

    let (velocity, yaw_rate) = if tracking.tau > 0.0 {
        let blend = 1.0 - (-dt / tracking.tau).exp();
        (
            state.velocity + (v_target - state.velocity) * blend,
            state.yaw_rate + (r_target - state.yaw_rate) * blend,
        )
    } else {
        (v_target, r_target)
    };

    integrate(state, &velocity, yaw_rate, dt, tracking.integrator)
}

/// Pure kinematic update with the given body velocity and yaw rate held
/// over `dt`; no limits or lag applied.
pub fn integrate(state: &VehicleState, velocity: &Vec3, yaw_rate: f64, dt: f64, integrator: Integrator) -> VehicleState {
    let rot_heading = match integrator {
        Integrator::Midpoint => state.heading + 0.5 * yaw_rate * dt,
        Integrator::Euler => state.heading,
    };
    let world_v = body_to_world(velocity, rot_heading);

    VehicleState {
        position: state.position + world_v * dt,
        heading: wrap_angle(state.heading + yaw_rate * dt),
        velocity: *velocity,
        yaw_rate,
        time: state.time + dt,
    }
}

/// Integrates over a whole control period in steps of at most `tracking.dt`.
pub fn advance(
    state: &VehicleState,
    v_ref: &Vec3,
    r_ref: f64,
    limits: &VehicleLimits,
    tracking: &TrackingConfig,
    period: f64,
) -> VehicleState {
    let full_steps = (period / tracking.dt + 1e-9).floor() as usize;
    let remainder = period - full_steps as f64 * tracking.dt;
    let mut s = *state;
    for _ in 0..full_steps {
        s = step(&s, v_ref, r_ref, limits, tracking, tracking.dt);
    }
    if remainder > 1e-12 {
        s = step(&s, v_ref, r_ref, limits, tracking, remainder);
    }
    // Pin the clock to the period so timestamps do not drift.
    s.time = state.time + period;
    s
}

/// Closed-ball goal test.
pub fn goal_reached(state: &VehicleState, goal: &Vec3, tolerance: f64) -> bool {
    (state.position - goal).norm() <= tolerance
}

pub fn body_to_world(v: &Vec3, heading: f64) -> Vec3 {
    let (s, c) = heading.sin_cos();
    Vec3::new(v.x * c - v.y * s, v.x * s + v.y * c, v.z)
}

pub fn world_to_body(v: &Vec3, heading: f64) -> Vec3 {
    let (s, c) = heading.sin_cos();
    Vec3::new(v.x * c + v.y * s, -v.x * s + v.y * c, v.z)
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}
