//! Memoryless planar reference planners driven by the latest level scan.

mod apf;
mod dwa;

pub use apf::{apf_step, ApfConfig};
pub use dwa::{arc_free_distance, dwa_step, rollout, rollout_clearance, DwaConfig};

use crate::sonar::SonarScan;
use crate::world::Vec2;

/// Horizontal projections of the scan's obstacle returns.
pub(crate) fn scan_points_xy(scan: &SonarScan) -> Vec<Vec2> {
    scan.hit_beams()
        .filter_map(|i| scan.point(i))
        .map(|p| Vec2::new(p.x, p.y))
        .collect()
}
