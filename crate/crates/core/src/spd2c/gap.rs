//! Horizontal gap finding and obstacle-extent labelling over one scan.

use serde::{Deserialize, Serialize};

use crate::sonar::SonarScan;
use crate::vehicle::{wrap_angle, VehicleState};
use crate::world::Vec3;

/// A run of `L` consecutive free beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub start: usize,
    pub mid: usize,
}

/// Extent of the obstacle beams within the fan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObstacleExtent {
    /// Bounded on both sides.
    BO,
    /// Reaches the left edge (beam 1) only.
    LUBO,
    /// Reaches the right edge (beam N) only.
    RUBO,
    /// Spans the whole fan.
    UBO,
}

/// Beams (1-based) whose intensity is strictly below the threshold.
pub fn free_beams(scan: &SonarScan, threshold: f64) -> Vec<usize> {
    scan.intensities
        .iter()
        .enumerate()
        .filter(|(_, &i)| i < threshold)
        .map(|(k, _)| k + 1)
        .collect()
}

/// Beams (1-based) at or above the threshold.
pub fn obstacle_beams(scan: &SonarScan, threshold: f64) -> Vec<usize> {
    scan.intensities
        .iter()
        .enumerate()
        .filter(|(_, &i)| i >= threshold)
        .map(|(k, _)| k + 1)
        .collect()
}

/// Every window of `len` consecutive beam numbers contained in `free`
/// (sorted ascending), with its mid-beam `start + ⌊len/2⌋`.
pub fn find_gaps(free: &[usize], len: usize) -> Vec<Gap> {
    let mut gaps = Vec::new();
    if len == 0 {
        return gaps;
    }
    let mut run_start = 0;
    for k in 0..free.len() {
        let run_continues = k + 1 < free.len() && free[k + 1] == free[k] + 1;
        if run_continues {
            continue;
        }
        // free[run_start..=k] is a maximal run of consecutive beams.
        let first = free[run_start];
        let run_len = k - run_start + 1;
        if run_len >= len {
            gaps.extend((first..=first + run_len - len).map(|start| Gap {
                start,
                mid: start + len / 2,
            }));
        }
        run_start = k + 1;
    }
    gaps
}

/// Beam number closest to the goal bearing, clamped to the fan edges.
pub fn target_beam(goal: &Vec3, pose: &VehicleState, n_beams: usize, fov_h: f64) -> usize {
    let dx = goal.x - pose.position.x;
    let dy = goal.y - pose.position.y;
    if dx == 0.0 && dy == 0.0 {
        return n_beams / 2;
    }
    // Left of heading is positive.
    let offset = wrap_angle(dy.atan2(dx) - pose.heading);
    let half = 0.5 * fov_h;
    if offset > half {
        return 1;
    }
    if offset < -half {
        return n_beams;
    }
    let idx = ((half - offset) / fov_h * n_beams as f64).floor() as usize;
    idx.clamp(1, n_beams)
}

/// Mid-beam nearest the target; ties resolve to the smaller beam number.
pub fn select_gap(mids: &[usize], target: usize) -> Option<usize> {
    mids.iter()
        .copied()
        .min_by_key(|&m| (m.abs_diff(target), m))
}

pub fn classify_extent(obstacle: &[usize], n_beams: usize) -> Option<ObstacleExtent> {
    let lo = *obstacle.iter().min()?;
    let hi = *obstacle.iter().max()?;
    Some(match (lo == 1, hi == n_beams) {
        (false, false) => ObstacleExtent::BO,
        (true, false) => ObstacleExtent::LUBO,
        (false, true) => ObstacleExtent::RUBO,
        (true, true) => ObstacleExtent::UBO,
    })
}
