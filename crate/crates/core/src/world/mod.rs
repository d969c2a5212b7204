//! Static 3D obstacle environment built from analytic primitives.
//!
//! The world answers two queries: the first surface crossing along a ray
//! (used by the sonar) and the exact signed distance to the nearest surface
//! (used only for ground-truth clearance in tests and metrics).

mod primitive;

use serde::{Deserialize, Serialize};

pub use primitive::{ObstaclePrimitive, Vec2, Vec3};

use crate::error::{Error, Result};

/// Tolerance on `|‖d‖ − 1|` before a ray direction counts as non-unit.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// What `ray_cast` does with a direction that is not unit length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionPolicy {
    #[default]
    Reject,
    Normalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec3,
    pub max: Vec3,
}

impl Bounds {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct World {
    #[serde(default)]
    pub obstacles: Vec<ObstaclePrimitive>,
    #[serde(default)]
    pub bounds: Option<Bounds>,
    #[serde(default)]
    pub direction_policy: DirectionPolicy,
}

impl World {
    pub fn new(obstacles: Vec<ObstaclePrimitive>) -> Result<Self> {
        let world = World {
            obstacles,
            ..Default::default()
        };
        world.validate()?;
        Ok(world)
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_direction_policy(mut self, policy: DirectionPolicy) -> Self {
        self.direction_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (index, obstacle) in self.obstacles.iter().enumerate() {
            obstacle
                .validate()
                .map_err(|reason| Error::InvalidObstacle { index, reason })?;
        }
        if let Some(b) = &self.bounds {
            if (0..3).any(|i| b.min[i] > b.max[i]) {
                return Err(Error::config("world bounds min exceeds max"));
            }
        }
        Ok(())
    }

    /// Smallest surface-crossing distance in `[r_min, r_max]` over all
    /// obstacles. Equal distances resolve to the earlier obstacle.
    pub fn ray_cast(&self, origin: &Vec3, direction: &Vec3, r_min: f64, r_max: f64) -> Result<Option<f64>> {
        if !(r_min > 0.0 && r_min < r_max) {
            return Err(Error::config(format!(
                "ray range must satisfy 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        let norm = direction.norm();
        let dir = if (norm - 1.0).abs() <= UNIT_TOLERANCE {
            *direction
        } else {
            match self.direction_policy {
                DirectionPolicy::Reject => return Err(Error::NonUnitDirection { norm }),
                DirectionPolicy::Normalize if norm > 0.0 => direction / norm,
                DirectionPolicy::Normalize => return Err(Error::NonUnitDirection { norm }),
            }
        };
        Ok(self.first_hit(origin, &dir, r_min, r_max).map(|(t, _)| t))
    }

    /// Like [`World::ray_cast`] but returns the obstacle index too. The
    /// direction must already be unit length.
    pub fn first_hit(&self, origin: &Vec3, dir: &Vec3, r_min: f64, r_max: f64) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        let mut buf = Vec::with_capacity(4);
        for (idx, obstacle) in self.obstacles.iter().enumerate() {
            buf.clear();
            obstacle.crossings(origin, dir, &mut buf);
            for &t in &buf {
                if t >= r_min && t <= r_max && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, idx));
                }
            }
        }
        best
    }

    /// Exact signed distance to the nearest obstacle surface (negative
    /// inside). Free water reports `+∞`.
    pub fn distance_to_surface(&self, point: &Vec3) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.signed_distance(point))
            .fold(f64::INFINITY, f64::min)
    }
}
