//! Forward-looking multibeam sonar emulation with mechanical pivoting.
//!
//! Beams are numbered 1..=N from the left edge of the fan to the right edge.
//! Beam `i` points at `ψ + fov/2 − (i − ½)·spacing` in the world frame (z
//! up, counter-clockwise positive), so beam 1 is the leftmost.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vehicle::VehicleState;
use crate::world::{Vec3, World};

/// Ordered set of pivot elevations, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SweepSpec", into = "SweepSpec")]
pub struct PivotSweep {
    angles: Vec<f64>,
}

/// File representation of a sweep: integer degrees from `min_deg` to
/// `max_deg` inclusive.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepSpec {
    min_deg: i32,
    max_deg: i32,
    #[serde(default = "one")]
    step_deg: u32,
}

fn one() -> u32 {
    1
}

impl TryFrom<SweepSpec> for PivotSweep {
    type Error = Error;

    fn try_from(spec: SweepSpec) -> Result<Self> {
        PivotSweep::degrees(spec.min_deg, spec.max_deg, spec.step_deg)
    }
}

impl From<PivotSweep> for SweepSpec {
    fn from(s: PivotSweep) -> Self {
        let deg: Vec<i32> = s.angles.iter().map(|a| a.to_degrees().round() as i32).collect();
        let step = if deg.len() > 1 { (deg[1] - deg[0]) as u32 } else { 1 };
        SweepSpec {
            min_deg: deg[0],
            max_deg: *deg.last().unwrap(),
            step_deg: step,
        }
    }
}

impl Default for PivotSweep {
    fn default() -> Self {
        PivotSweep::degrees(-45, 45, 1).expect("default sweep is valid")
    }
}

impl PivotSweep {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::config("pivot sweep is empty"));
        }
        if angles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("pivot sweep angles must be strictly increasing"));
        }
        if !angles.contains(&0.0) {
            return Err(Error::config("pivot sweep must contain the level angle 0"));
        }
        if angles.iter().any(|a| a.abs() > std::f64::consts::FRAC_PI_2) {
            return Err(Error::config("pivot angles must lie within ±90°"));
        }
        Ok(Self { angles })
    }

    pub fn degrees(min_deg: i32, max_deg: i32, step_deg: u32) -> Result<Self> {
        if step_deg == 0 || min_deg > max_deg {
            return Err(Error::config("pivot sweep needs min_deg <= max_deg and step_deg > 0"));
        }
        let angles = (min_deg..=max_deg)
            .step_by(step_deg as usize)
            .map(|d| (d as f64).to_radians())
            .collect();
        Self::new(angles)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SonarConfig {
    pub n_beams: usize,
    /// Horizontal field of view (rad).
    pub fov_h: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Vertical beam width (rad); only sampled when `elevation_subrays > 1`.
    pub vertical_beamwidth: f64,
    pub intensity_hit: f64,
    pub intensity_miss: f64,
    pub intensity_threshold: f64,
    pub elevation_subrays: usize,
    /// Amplitude of uniform intensity noise; 0 is noiseless.
    pub noise_amplitude: f64,
    pub pivot_sweep: PivotSweep,
    /// Simulated seconds charged for each pivot sweep.
    pub sweep_time_cost: f64,
    /// A fresh scan is taken every this many control cycles.
    pub refresh_every: usize,
}

impl Default for SonarConfig {
    fn default() -> Self {
        Self {
            n_beams: 512,
            fov_h: std::f64::consts::FRAC_PI_2,
            r_min: 2.0,
            r_max: 60.0,
            vertical_beamwidth: 20f64.to_radians(),
            intensity_hit: 100.0,
            intensity_miss: 0.0,
            intensity_threshold: 15.0,
            elevation_subrays: 1,
            noise_amplitude: 0.0,
            pivot_sweep: PivotSweep::default(),
            sweep_time_cost: 0.0,
            refresh_every: 1,
        }
    }
}

impl SonarConfig {
    pub fn beam_spacing(&self) -> f64 {
        self.fov_h / self.n_beams as f64
    }

    /// Azimuth of beam `i` (1-based) relative to the vehicle heading.
    pub fn beam_offset(&self, i: usize) -> f64 {
        0.5 * self.fov_h - (i as f64 - 0.5) * self.beam_spacing()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_beams < 2 {
            return Err(Error::config("sonar.n_beams must be >= 2"));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return Err(Error::config("sonar range must satisfy 0 < r_min < r_max"));
        }
        if !(self.fov_h > 0.0 && self.fov_h <= std::f64::consts::PI) {
            return Err(Error::config("sonar.fov_h must lie in (0, π]"));
        }
        if !(self.intensity_miss < self.intensity_threshold && self.intensity_threshold <= self.intensity_hit) {
            return Err(Error::config(
                "sonar intensities must satisfy miss < threshold <= hit",
            ));
        }
        if self.elevation_subrays == 0 {
            return Err(Error::config("sonar.elevation_subrays must be >= 1"));
        }
        if self.noise_amplitude < 0.0 || self.sweep_time_cost < 0.0 {
            return Err(Error::config("sonar noise and sweep cost must be non-negative"));
        }
        if self.refresh_every == 0 {
            return Err(Error::config("sonar.refresh_every must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SonarScan {
    pub pivot_angle: f64,
    pub fov_h: f64,
    pub ranges: Vec<Option<f64>>,
    pub intensities: Vec<f64>,
    pub pose: VehicleState,
}

impl SonarScan {
    pub fn n_beams(&self) -> usize {
        self.ranges.len()
    }

    fn spacing(&self) -> f64 {
        self.fov_h / self.n_beams() as f64
    }

    /// World-frame azimuth of beam `i` (1-based).
    pub fn azimuth(&self, i: usize) -> f64 {
        self.pose.heading + 0.5 * self.fov_h - (i as f64 - 0.5) * self.spacing()
    }

    /// Beam numbers (1-based) with a reported range.
    pub fn hit_beams(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranges
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.map(|_| k + 1))
    }

    /// World-frame obstacle point of beam `i`, if it reported a range.
    pub fn point(&self, i: usize) -> Option<Vec3> {
        let range = self.ranges[i - 1]?;
        let theta = self.azimuth(i);
        let (sp, cp) = self.pivot_angle.sin_cos();
        let p = self.pose.position;
        Some(Vec3::new(
            p.x + range * theta.cos() * cp,
            p.y + range * theta.sin() * cp,
            p.z + range * sp,
        ))
    }
}

fn ray_direction(azimuth: f64, elevation: f64) -> Vec3 {
    let (se, ce) = elevation.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    Vec3::new(ce * ca, ce * sa, se)
}

fn subray_elevations(pivot: f64, cfg: &SonarConfig) -> Vec<f64> {
    let n = cfg.elevation_subrays;
    if n <= 1 {
        return vec![pivot];
    }
    (0..n)
        .map(|k| pivot - 0.5 * cfg.vertical_beamwidth + cfg.vertical_beamwidth * k as f64 / (n - 1) as f64)
        .collect()
}

/// Noiseless scan at pivot elevation `pivot`.
pub fn scan(world: &World, pose: &VehicleState, pivot: f64, cfg: &SonarConfig) -> SonarScan {
    scan_impl(world, pose, pivot, cfg, None::<&mut rand::rngs::ThreadRng>)
}

/// Scan with uniform intensity noise of `cfg.noise_amplitude` drawn from `rng`.
pub fn scan_noisy<R: Rng>(world: &World, pose: &VehicleState, pivot: f64, cfg: &SonarConfig, rng: &mut R) -> SonarScan {
    scan_impl(world, pose, pivot, cfg, Some(rng))
}

fn scan_impl<R: Rng>(
    world: &World,
    pose: &VehicleState,
    pivot: f64,
    cfg: &SonarConfig,
    mut rng: Option<&mut R>,
) -> SonarScan {
    let n = cfg.n_beams;
    let elevations = subray_elevations(pivot, cfg);
    let mut ranges = Vec::with_capacity(n);
    let mut intensities = Vec::with_capacity(n);
    for i in 1..=n {
        let azimuth = pose.heading + cfg.beam_offset(i);
        let geometric = elevations
            .iter()
            .filter_map(|&el| {
                world
                    .first_hit(&pose.position, &ray_direction(azimuth, el), cfg.r_min, cfg.r_max)
                    .map(|(t, _)| t)
            })
            .reduce(f64::min);
        let mut intensity = if geometric.is_some() {
            cfg.intensity_hit
        } else {
            cfg.intensity_miss
        };
        if let Some(rng) = rng.as_deref_mut() {
            if cfg.noise_amplitude > 0.0 {
                intensity += rng.random_range(-cfg.noise_amplitude..=cfg.noise_amplitude);
            }
        }
        let range = if intensity >= cfg.intensity_threshold {
            // Noise-induced returns have no geometry; report them at max range.
            Some(geometric.unwrap_or(cfg.r_max))
        } else {
            None
        };
        ranges.push(range);
        intensities.push(intensity);
    }
    SonarScan {
        pivot_angle: pivot,
        fov_h: cfg.fov_h,
        ranges,
        intensities,
        pose: *pose,
    }
}

/// World-frame points of every hit beam, in beam order.
pub fn project_points(scan: &SonarScan) -> Vec<Vec3> {
    (1..=scan.n_beams()).filter_map(|i| scan.point(i)).collect()
}

/// One scan per sweep angle with the pose held fixed.
pub fn pivot_sweep(world: &World, pose: &VehicleState, sweep: &PivotSweep, cfg: &SonarConfig) -> Vec<SonarScan> {
    sweep.angles().iter().map(|&a| scan(world, pose, a, cfg)).collect()
}
