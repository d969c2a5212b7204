//! Vertical gap search over a pivot sweep.

use crate::sonar::SonarScan;
use crate::vehicle::VehicleState;
use crate::world::Vec3;

/// A run of `L` consecutive accepted pivot angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotWindow {
    /// Index of the first angle in the sweep.
    pub start: usize,
    pub first_angle: f64,
    pub last_angle: f64,
    /// Arithmetic mean of the end angles.
    pub mid_angle: f64,
}

/// True when every beam of the central sector `[lo, hi]` (1-based,
/// inclusive) is free.
pub fn central_sector_clear(scan: &SonarScan, sector: (usize, usize), threshold: f64) -> bool {
    scan.intensities[sector.0 - 1..sector.1]
        .iter()
        .all(|&i| i < threshold)
}

/// Length-`len` windows of consecutive accepted sweep positions.
pub fn pivot_windows(accepted: &[bool], angles: &[f64], len: usize) -> Vec<PivotWindow> {
    debug_assert_eq!(accepted.len(), angles.len());
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    let mut run = 0;
    for k in 0..accepted.len() {
        run = if accepted[k] { run + 1 } else { 0 };
        if run >= len {
            let start = k + 1 - len;
            let (first_angle, last_angle) = (angles[start], angles[k]);
            out.push(PivotWindow {
                start,
                first_angle,
                last_angle,
                mid_angle: 0.5 * (first_angle + last_angle),
            });
        }
    }
    out
}

/// Window whose midpoint is closest to `target`; ties go to the lower angle.
pub fn select_pivot(windows: &[PivotWindow], target: f64) -> Option<PivotWindow> {
    windows.iter().copied().reduce(|best, w| {
        let (db, dw) = ((best.mid_angle - target).abs(), (w.mid_angle - target).abs());
        if dw < db || (dw == db && w.mid_angle < best.mid_angle) {
            w
        } else {
            best
        }
    })
}

/// Goal elevation clamped to the sweep range.
pub fn goal_elevation(goal: &Vec3, pose: &VehicleState, first: f64, last: f64) -> f64 {
    let d = goal - pose.position;
    let horizontal = d.x.hypot(d.y);
    if horizontal == 0.0 {
        return if d.z > 0.0 {
            last
        } else if d.z < 0.0 {
            -last
        } else {
            0.0
        };
    }
    d.z.atan2(horizontal).clamp(first, last)
}

/// Best vertical window of a sweep ordered by pivot angle, relative to the
/// goal elevation `target`.
pub fn evaluate_pivot_sweep(
    scans: &[SonarScan],
    sector: (usize, usize),
    threshold: f64,
    group_len: usize,
    target: f64,
) -> Option<PivotWindow> {
    let accepted: Vec<bool> = scans
        .iter()
        .map(|s| central_sector_clear(s, sector, threshold))
        .collect();
    let angles: Vec<f64> = scans.iter().map(|s| s.pivot_angle).collect();
    select_pivot(&pivot_windows(&accepted, &angles, group_len), target)
}
