//! Barrier-function safety filter against the nearest remembered obstacle.
//!
//! The barrier `h = ‖q_v − q_o‖² − R_o²` is evaluated in the active plane
//! with the obstacle point held fixed over the cycle. The filter returns the
//! planar velocity closest to the reference that satisfies `ḣ ≥ −k·h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scg::{ContextMode, ContextOutput};
use crate::vehicle::VehicleState;
use crate::world::{Vec2, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CbfConfig {
    /// Obstacle radius R_o, m.
    pub obstacle_radius: f64,
    /// Class-K gain k, 1/s.
    pub gain: f64,
}

impl Default for CbfConfig {
    fn default() -> Self {
        Self {
            obstacle_radius: 3.0,
            gain: 0.5,
        }
    }
}

impl CbfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.obstacle_radius > 0.0) {
            return Err(Error::config("cbf.obstacle_radius must be > 0"));
        }
        if !(self.gain > 0.0) {
            return Err(Error::config("cbf.gain must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivePlane {
    XY,
    XZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeReference {
    /// Body-frame velocity reference after filtering.
    pub velocity: Vec3,
    pub plane: Option<ActivePlane>,
    pub constraint_active: bool,
    pub h: Option<f64>,
    /// ‖u − u_R‖ in the active plane.
    pub deviation: f64,
}

pub fn barrier(p_v: &Vec2, p_o: &Vec2, radius: f64) -> f64 {
    (p_v - p_o).norm_squared() - radius * radius
}

/// Minimizer of `½‖u − u_r‖²` subject to `g·u ≥ b`. `None` when `g = 0`.
pub fn project_halfspace(u_r: &Vec2, g: &Vec2, b: f64) -> Option<Vec2> {
    let gg = g.norm_squared();
    if gg == 0.0 {
        return None;
    }
    let slack = g.dot(u_r) - b;
    if slack >= 0.0 {
        Some(*u_r)
    } else {
        Some(u_r + g * (-slack / gg))
    }
}

/// Filters the body-frame reference `v_ref` against the context point.
/// Without context the reference passes through unchanged.
pub fn filter(v_ref: &Vec3, state: &VehicleState, ctx: Option<&ContextOutput>, cfg: &CbfConfig) -> SafeReference {
    let Some(ctx) = ctx else {
        return SafeReference {
            velocity: *v_ref,
            plane: None,
            constraint_active: false,
            h: None,
            deviation: 0.0,
        };
    };
    let (s, c) = state.heading.sin_cos();
    let d = state.position - ctx.point;
    let (plane, rel, u_r) = match ctx.mode {
        ContextMode::Horizontal => (
            ActivePlane::XY,
            Vec2::new(d.x, d.y),
            Vec2::new(v_ref.x * c - v_ref.y * s, v_ref.x * s + v_ref.y * c),
        ),
        // Forward axis along the heading, second axis up.
        ContextMode::Vertical => (ActivePlane::XZ, Vec2::new(d.x * c + d.y * s, d.z), Vec2::new(v_ref.x, v_ref.z)),
    };
    let r = cfg.obstacle_radius;
    let h = rel.norm_squared() - r * r;
    let g = 2.0 * rel;
    let b = -cfg.gain * h;
    let (u, active) = match project_halfspace(&u_r, &g, b) {
        Some(u) => (u, u != u_r),
        None => (Vec2::zeros(), true),
    };
    let velocity = match plane {
        ActivePlane::XY => Vec3::new(u.x * c + u.y * s, -u.x * s + u.y * c, v_ref.z),
        ActivePlane::XZ => Vec3::new(u.x, v_ref.y, u.y),
    };
    SafeReference {
        velocity,
        plane: Some(plane),
        constraint_active: active,
        h: Some(h),
        deviation: (u - u_r).norm(),
    }
}

pub fn clip_yaw(r_ref: f64, r_max: f64) -> f64 {
    r_ref.clamp(-r_max, r_max)
}
