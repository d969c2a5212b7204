//! Scenario files: world, start and goal, and every tunable of the loop.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{ApfConfig, DwaConfig};
use crate::error::{Error, Result};
use crate::sonar::SonarConfig;
use crate::spd2c::Spd2cConfig;
use crate::stcbf::CbfConfig;
use crate::vehicle::{TrackingConfig, VehicleLimits, VehicleState};
use crate::world::{ObstaclePrimitive, Vec2, Vec3, World};

use super::controller::ControllerConfig;

pub const SCHEMA: &str = "eroas-scenario/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Start {
    pub position: Vec3,
    #[serde(default)]
    pub heading_deg: f64,
}

/// Seeded random obstacle field added on top of the fixed obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterSpec {
    pub count: usize,
    /// Horizontal region holding obstacle centres.
    pub region_min: Vec2,
    pub region_max: Vec2,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Bottom and top depth of cylinders and boxes.
    pub floor: f64,
    pub ceiling: f64,
    /// Share of spheres; they are centred at `sphere_depth`.
    pub sphere_fraction: f64,
    pub sphere_depth: f64,
    /// Share of boxes among the non-spheres.
    pub box_fraction: f64,
    /// Minimum surface distance to the start and the goal.
    pub keep_out: f64,
    /// Minimum horizontal surface gap between two obstacles.
    pub min_gap: f64,
    pub max_attempts: usize,
}

impl Default for ClutterSpec {
    fn default() -> Self {
        Self {
            count: 0,
            region_min: Vec2::new(0.0, 0.0),
            region_max: Vec2::new(1.0, 1.0),
            radius_min: 1.0,
            radius_max: 2.0,
            floor: -60.0,
            ceiling: 10.0,
            sphere_fraction: 0.0,
            sphere_depth: 0.0,
            box_fraction: 0.0,
            keep_out: 5.0,
            min_gap: 8.0,
            max_attempts: 10_000,
        }
    }
}

impl ClutterSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.region_min.x < self.region_max.x
            && self.region_min.y < self.region_max.y
            && 0.0 < self.radius_min
            && self.radius_min <= self.radius_max
            && self.floor < self.ceiling
            && (0.0..=1.0).contains(&self.sphere_fraction)
            && (0.0..=1.0).contains(&self.box_fraction)
            && self.keep_out >= 0.0
            && self.min_gap >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config("clutter section is inconsistent"))
        }
    }

    /// Draws the obstacle field for `seed`. Fewer than `count` obstacles are
    /// returned when the spacing constraints cannot be met.
    pub fn generate(&self, seed: u64, start: &Vec3, goal: &Vec3) -> Vec<ObstaclePrimitive> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut placed: Vec<(Vec2, f64)> = Vec::new();
        let mut out = Vec::new();
        let mut attempts = 0;
        while out.len() < self.count && attempts < self.max_attempts {
            attempts += 1;
            let c = Vec2::new(
                rng.random_range(self.region_min.x..=self.region_max.x),
                rng.random_range(self.region_min.y..=self.region_max.y),
            );
            let radius = rng.random_range(self.radius_min..=self.radius_max);
            let kind: f64 = rng.random();
            let obstacle = if kind < self.sphere_fraction {
                ObstaclePrimitive::sphere(Vec3::new(c.x, c.y, self.sphere_depth), radius)
            } else if rng.random::<f64>() < self.box_fraction {
                let h = radius / std::f64::consts::SQRT_2;
                ObstaclePrimitive::aabb(Vec3::new(c.x - h, c.y - h, self.floor), Vec3::new(c.x + h, c.y + h, self.ceiling))
            } else {
                ObstaclePrimitive::cylinder(Vec3::new(c.x, c.y, self.floor), radius, self.ceiling - self.floor)
            };
            let clear_of_ends = [start, goal]
                .iter()
                .all(|p| obstacle.signed_distance(p) >= self.keep_out);
            let spaced = placed
                .iter()
                .all(|(q, r)| (c - q).norm() - r - radius >= self.min_gap);
            if clear_of_ends && spaced {
                placed.push((c, radius));
                out.push(obstacle);
            }
        }
        out
    }
}

fn default_period() -> f64 {
    0.125
}
fn default_tolerance() -> f64 {
    1.0
}
fn default_d_min() -> f64 {
    3.0
}
fn default_memory_radius() -> f64 {
    15.0
}

/// Everything one episode needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub world: World,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clutter: Option<ClutterSpec>,
    pub start: Start,
    pub goal: Vec3,
    /// Goal tolerance ε, m.
    #[serde(default = "default_tolerance")]
    pub goal_tolerance: f64,
    /// Clearance below which a cycle counts as a soft-constraint violation, m.
    #[serde(default = "default_d_min")]
    pub d_min: f64,
    /// Simulated seconds before the episode times out.
    pub time_budget: f64,
    #[serde(default = "default_period")]
    pub control_period: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_memory_radius")]
    pub memory_radius: f64,
    #[serde(default)]
    pub sonar: SonarConfig,
    #[serde(default)]
    pub spd2c: Spd2cConfig,
    #[serde(default)]
    pub cbf: CbfConfig,
    #[serde(default)]
    pub limits: VehicleLimits,
    #[serde(default)]
    pub tracking: TrackingConfig,
    #[serde(default)]
    pub eroas: ControllerConfig,
    #[serde(default)]
    pub apf: ApfConfig,
    #[serde(default)]
    pub dwa: DwaConfig,
}

impl Scenario {
    /// Parses a scenario document. Clutter is left unexpanded; see
    /// [`Scenario::with_seed`].
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads a scenario file without expanding clutter.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut raw = Self::from_toml(&text).map_err(|source| Error::ScenarioParse {
            path: path.to_path_buf(),
            source,
        })?;
        if raw.schema != SCHEMA {
            return Err(Error::config(format!(
                "{}: unsupported schema {:?}, expected {SCHEMA:?}",
                path.display(),
                raw.schema
            )));
        }
        if raw.name.is_empty() {
            raw.name = path
                .file_stem()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(raw)
    }

    /// Reads, expands and validates a scenario file. `seed` overrides the
    /// file's seed.
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self> {
        let raw = Self::read(path)?;
        raw.with_seed(seed.unwrap_or(raw.seed))
    }

    /// Copy with its seed set and any clutter expanded into the world.
    pub fn with_seed(&self, seed: u64) -> Result<Self> {
        let mut s = self.clone();
        s.seed = seed;
        if let Some(spec) = s.clutter.take() {
            spec.validate()?;
            let extra = spec.generate(seed, &s.start.position, &s.goal);
            s.world.obstacles.extend(extra);
        }
        s.validate()?;
        Ok(s)
    }

    pub fn start_state(&self) -> VehicleState {
        VehicleState::at_rest(self.start.position, self.start.heading_deg.to_radians())
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.sonar.validate()?;
        self.spd2c.validate(self.sonar.n_beams)?;
        self.cbf.validate()?;
        self.limits.validate()?;
        self.tracking.validate()?;
        self.eroas.validate()?;
        self.apf.validate()?;
        self.dwa.validate()?;
        if self.world.distance_to_surface(&self.start.position) <= 0.0 {
            return Err(Error::config("start position lies inside an obstacle"));
        }
        if let Some(b) = &self.world.bounds {
            if !b.contains(&self.goal) {
                return Err(Error::config("goal lies outside the world bounds"));
            }
        }
        if !(self.time_budget > 0.0) {
            return Err(Error::config("time_budget must be > 0"));
        }
        if !(self.control_period > 0.0) {
            return Err(Error::config("control_period must be > 0"));
        }
        if !(self.goal_tolerance > 0.0) {
            return Err(Error::config("goal_tolerance must be > 0"));
        }
        if !(self.d_min >= 0.0) {
            return Err(Error::config("d_min must be >= 0"));
        }
        if !(self.memory_radius > 0.0) {
            return Err(Error::config("memory_radius must be > 0"));
        }
        Ok(())
    }
}
