//! Sonar-profile-guided directional decision control.
//!
//! A memoryless policy over the latest scan that tries, in order: a wide
//! enough horizontal gap, a turn around a laterally bounded obstacle, a turn
//! along a converging obstacle, and finally a vertical gap found by pivoting
//! the sonar. When none applies the vehicle turns left in place.

mod command;
mod convexity;
mod gap;
mod pivot;

use serde::{Deserialize, Serialize};

pub use command::{heading_from_beam, reference_commands};
pub use convexity::{convexity, fit_quadratic, Convexity, ConvexityLabel, QuadraticFit};
pub use gap::{classify_extent, find_gaps, free_beams, obstacle_beams, select_gap, target_beam, Gap, ObstacleExtent};
pub use pivot::{central_sector_clear, evaluate_pivot_sweep, goal_elevation, pivot_windows, select_pivot, PivotWindow};

use crate::error::{Error, Result};
use crate::sonar::SonarScan;
use crate::vehicle::VehicleState;
use crate::world::{Vec2, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Spd2cConfig {
    pub intensity_threshold: f64,
    /// Beams per horizontal gap.
    pub gap_length: usize,
    /// Pivot angles per vertical gap.
    pub pivot_group_length: usize,
    /// Central beam sector (1-based, inclusive) that must be free for a
    /// pivot angle to be accepted.
    pub central_sector: (usize, usize),
    pub convexity_threshold: f64,
    /// m/(s·rad)
    pub k_v: f64,
    /// 1/s
    pub k_t: f64,
    /// rad per beam
    pub k_r: f64,
    pub psi_max: f64,
    /// Yaw rate used when no horizontal or vertical passage exists.
    pub fallback_turn_rate: f64,
}

impl Default for Spd2cConfig {
    fn default() -> Self {
        let fov = std::f64::consts::FRAC_PI_2;
        let k_t = 0.12;
        Self {
            intensity_threshold: 15.0,
            gap_length: 150,
            pivot_group_length: 30,
            central_sector: (100, 400),
            convexity_threshold: 0.02,
            k_v: 0.35,
            k_t,
            k_r: fov / 512.0,
            psi_max: fov,
            fallback_turn_rate: k_t * std::f64::consts::FRAC_PI_4,
        }
    }
}

impl Spd2cConfig {
    pub fn validate(&self, n_beams: usize) -> Result<()> {
        let (lo, hi) = self.central_sector;
        if !(1 <= lo && lo < hi && hi <= n_beams) {
            return Err(Error::config(format!(
                "spd2c.central_sector must satisfy 1 <= lo < hi <= {n_beams}"
            )));
        }
        if self.gap_length == 0 || self.gap_length > n_beams {
            return Err(Error::config("spd2c.gap_length must lie in 1..=n_beams"));
        }
        if self.pivot_group_length == 0 {
            return Err(Error::config("spd2c.pivot_group_length must be >= 1"));
        }
        if !(self.convexity_threshold > 0.0) {
            return Err(Error::config("spd2c.convexity_threshold must be > 0"));
        }
        if !(self.k_v > 0.0 && self.k_t > 0.0 && self.k_r > 0.0 && self.psi_max > 0.0) {
            return Err(Error::config("spd2c gains must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Maneuver {
    Horizontal,
    Vertical,
    FallbackTurn,
    /// Holding station for one cycle while the sonar sweeps.
    Hover,
}

/// Which stage of the policy produced the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Gap,
    Bounded,
    Convex,
    PivotRequest,
    Pivot,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub mode: Maneuver,
    pub stage: Stage,
    /// Body-frame velocity reference.
    pub v_ref: Vec3,
    pub yaw_rate_ref: f64,
    pub beam: Option<usize>,
    pub pivot: Option<f64>,
    pub pivot_requested: bool,
    pub target_beam: usize,
    pub extent: Option<ObstacleExtent>,
    pub curvature: Option<f64>,
}

impl Decision {
    fn horizontal(beam: usize, stage: Stage, target_beam: usize, cfg: &Spd2cConfig) -> Self {
        let (v_ref, yaw_rate_ref) = reference_commands(heading_from_beam(beam, cfg.k_r), 0.0, cfg);
        Decision {
            mode: Maneuver::Horizontal,
            stage,
            v_ref,
            yaw_rate_ref,
            beam: Some(beam),
            pivot: None,
            pivot_requested: false,
            target_beam,
            extent: None,
            curvature: None,
        }
    }

    /// Straight-ahead climb or descent along `theta`.
    pub fn vertical(theta: f64, target_beam: usize, cfg: &Spd2cConfig) -> Self {
        let (v_ref, yaw_rate_ref) = reference_commands(0.0, theta, cfg);
        Decision {
            mode: Maneuver::Vertical,
            stage: Stage::Pivot,
            v_ref,
            yaw_rate_ref,
            beam: None,
            pivot: Some(theta),
            pivot_requested: false,
            target_beam,
            extent: None,
            curvature: None,
        }
    }

    pub fn hover(target_beam: usize) -> Self {
        Decision {
            mode: Maneuver::Hover,
            stage: Stage::PivotRequest,
            v_ref: Vec3::zeros(),
            yaw_rate_ref: 0.0,
            beam: None,
            pivot: None,
            pivot_requested: true,
            target_beam,
            extent: None,
            curvature: None,
        }
    }

    fn fallback(target_beam: usize, cfg: &Spd2cConfig) -> Self {
        Decision {
            mode: Maneuver::FallbackTurn,
            stage: Stage::Fallback,
            v_ref: Vec3::zeros(),
            yaw_rate_ref: cfg.fallback_turn_rate,
            beam: None,
            pivot: None,
            pivot_requested: false,
            target_beam,
            extent: None,
            curvature: None,
        }
    }
}

/// Obstacle returns of `scan` in the vehicle heading frame: x to the left,
/// y forward.
pub fn heading_frame_points(scan: &SonarScan, beams: &[usize]) -> Vec<Vec2> {
    let p = scan.pose.position;
    let (s, c) = scan.pose.heading.sin_cos();
    beams
        .iter()
        .filter_map(|&i| scan.point(i))
        .map(|q| {
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            Vec2::new(-dx * s + dy * c, dx * c + dy * s)
        })
        .collect()
}

/// Runs the policy on the level scan `scan`. Pass the scans of a completed
/// pivot sweep as `pivot_scans` to resolve a pending vertical search.
pub fn decide(
    scan: &SonarScan,
    pivot_scans: Option<&[SonarScan]>,
    pose: &VehicleState,
    goal: &Vec3,
    cfg: &Spd2cConfig,
) -> Decision {
    let n = scan.n_beams();
    let b_t = target_beam(goal, pose, n, scan.fov_h);

    let free = free_beams(scan, cfg.intensity_threshold);
    let mids: Vec<usize> = find_gaps(&free, cfg.gap_length).iter().map(|g| g.mid).collect();
    if let Some(b_cl) = select_gap(&mids, b_t) {
        return Decision::horizontal(b_cl, Stage::Gap, b_t, cfg);
    }

    let obstacle = obstacle_beams(scan, cfg.intensity_threshold);
    let Some(extent) = classify_extent(&obstacle, n) else {
        // Only reachable when the fan is narrower than a gap.
        return Decision::horizontal(b_t, Stage::Gap, b_t, cfg);
    };

    let edge = match extent {
        ObstacleExtent::BO => {
            let centre = (obstacle[0] + obstacle[obstacle.len() - 1]) / 2;
            Some(if b_t <= centre { 1 } else { n })
        }
        ObstacleExtent::LUBO => Some(n),
        ObstacleExtent::RUBO => Some(1),
        ObstacleExtent::UBO => None,
    };
    if let Some(b_cl) = edge {
        let mut d = Decision::horizontal(b_cl, Stage::Bounded, b_t, cfg);
        d.extent = Some(extent);
        return d;
    }

    let points = heading_frame_points(scan, &obstacle);
    let conv = convexity(&points, cfg.convexity_threshold);
    if let (ConvexityLabel::Convex, Some(fit)) = (conv.label, conv.fit) {
        let b_cl = convex_turn_edge(&fit, goal, pose, n);
        let mut d = Decision::horizontal(b_cl, Stage::Convex, b_t, cfg);
        d.extent = Some(extent);
        d.curvature = Some(fit.a);
        return d;
    }

    let mut d = match pivot_scans {
        None => Decision::hover(b_t),
        Some(scans) if !scans.is_empty() => {
            let first = scans[0].pivot_angle;
            let last = scans[scans.len() - 1].pivot_angle;
            let target = goal_elevation(goal, pose, first, last);
            match evaluate_pivot_sweep(
                scans,
                cfg.central_sector,
                cfg.intensity_threshold,
                cfg.pivot_group_length,
                target,
            ) {
                Some(w) => Decision::vertical(w.mid_angle, b_t, cfg),
                None => Decision::fallback(b_t, cfg),
            }
        }
        Some(_) => Decision::fallback(b_t, cfg),
    };
    d.extent = Some(extent);
    d.curvature = conv.curvature();
    d
}

/// Fan edge on the goal's side of the fitted boundary's vertex.
fn convex_turn_edge(fit: &QuadraticFit, goal: &Vec3, pose: &VehicleState, n: usize) -> usize {
    let (s, c) = pose.heading.sin_cos();
    let (dx, dy) = (goal.x - pose.position.x, goal.y - pose.position.y);
    let goal_bearing = (-dx * s + dy * c).atan2(dx * c + dy * s);
    let vx = fit.vertex().unwrap_or(0.0);
    let vertex_bearing = vx.atan2(fit.eval(vx));
    if goal_bearing >= vertex_bearing {
        1
    } else {
        n
    }
}
