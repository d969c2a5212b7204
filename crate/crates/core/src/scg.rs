//! Short-term obstacle memory around the vehicle.
//!
//! World-frame obstacle points are kept while they stay inside a closed ball
//! around the vehicle. Points are deduplicated on a fixed grid: the first
//! point to land in a cell is stored with its exact coordinates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::vehicle::VehicleState;
use crate::world::{Vec2, Vec3};

/// Edge length of a deduplication cell, in metres.
pub const GRID_RESOLUTION: f64 = 0.05;

type Cell = (i64, i64, i64);

fn cell_of(p: &Vec3, size: f64) -> Cell {
    (
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    )
}

/// Orders candidates by squared distance, then by coordinates.
fn closer(a: (f64, &Vec3), b: (f64, &Vec3)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.x.total_cmp(&b.1.x))
        .then(a.1.y.total_cmp(&b.1.y))
        .then(a.1.z.total_cmp(&b.1.z))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMemory {
    radius: f64,
    cells: BTreeMap<Cell, Vec3>,
}

impl Default for LocalMemory {
    fn default() -> Self {
        Self::new(15.0)
    }
}

impl LocalMemory {
    pub fn new(radius: f64) -> Self {
        Self {
            radius,
            cells: BTreeMap::new(),
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec3> {
        self.cells.values()
    }

    pub fn clear(&mut self) {
        self.cells.clear();
    }

    /// Evicts points outside the ball around `p_v`, then inserts the new
    /// points that fall inside it.
    pub fn update(&mut self, new_points: &[Vec3], p_v: &Vec3) {
        let r = self.radius;
        self.cells.retain(|_, p| (*p - p_v).norm() <= r);
        for p in new_points {
            if (p - p_v).norm() <= r {
                self.cells.entry(cell_of(p, GRID_RESOLUTION)).or_insert(*p);
            }
        }
    }

    /// Nearest stored point by Euclidean distance; ties go to the
    /// lexicographically smallest coordinates.
    pub fn closest_point(&self, p_v: &Vec3) -> Option<Vec3> {
        self.cells
            .values()
            .map(|p| ((p - p_v).norm_squared(), p))
            .min_by(|a, b| closer(*a, *b))
            .map(|(_, p)| *p)
    }

    /// Closest point and its projection onto the active plane.
    pub fn context(&self, p_v: &Vec3, mode: ContextMode) -> Option<ContextOutput> {
        let point = self.closest_point(p_v)?;
        Some(ContextOutput::new(mode, point, p_v))
    }

    /// Like [`context`](Self::context), but only considers points within
    /// `half_width` of the active plane through the vehicle, and ranks them
    /// by their in-plane distance. The horizontal plane is bounded in depth;
    /// the vertical plane is the one containing the heading, bounded
    /// laterally.
    pub fn context_in_slab(&self, pose: &VehicleState, mode: ContextMode, half_width: f64) -> Option<ContextOutput> {
        let p_v = pose.position;
        let (s, c) = pose.heading.sin_cos();
        self.cells
            .values()
            .filter_map(|p| {
                let d = p - p_v;
                let (off_plane, in_plane_sq) = match mode {
                    ContextMode::Horizontal => (d.z, d.x * d.x + d.y * d.y),
                    ContextMode::Vertical => {
                        let forward = d.x * c + d.y * s;
                        (-d.x * s + d.y * c, forward * forward + d.z * d.z)
                    }
                };
                (off_plane.abs() <= half_width).then_some((in_plane_sq, p))
            })
            .min_by(|a, b| closer(*a, *b))
            .map(|(_, p)| ContextOutput::new(mode, *p, &p_v))
    }

    /// Builds a spatial-hash index over the current contents.
    pub fn index(&self, cell_size: f64) -> SpatialIndex {
        SpatialIndex::build(self.cells.values().copied(), cell_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextMode {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextOutput {
    pub mode: ContextMode,
    /// XY components in horizontal mode, XZ components in vertical mode.
    pub projection: Vec2,
    pub point: Vec3,
    /// Euclidean distance from the vehicle to `point`.
    pub distance: f64,
}

impl ContextOutput {
    fn new(mode: ContextMode, point: Vec3, p_v: &Vec3) -> Self {
        let projection = match mode {
            ContextMode::Horizontal => Vec2::new(point.x, point.y),
            ContextMode::Vertical => Vec2::new(point.x, point.z),
        };
        Self {
            mode,
            projection,
            point,
            distance: (point - p_v).norm(),
        }
    }
}

/// Uniform-grid hash over a point set for nearest-point queries.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    size: f64,
    buckets: HashMap<Cell, Vec<Vec3>>,
    lo: Cell,
    hi: Cell,
}

impl SpatialIndex {
    pub fn build(points: impl IntoIterator<Item = Vec3>, cell_size: f64) -> Self {
        let mut buckets: HashMap<Cell, Vec<Vec3>> = HashMap::new();
        let (mut lo, mut hi) = ((i64::MAX, i64::MAX, i64::MAX), (i64::MIN, i64::MIN, i64::MIN));
        for p in points {
            let c = cell_of(&p, cell_size);
            lo = (lo.0.min(c.0), lo.1.min(c.1), lo.2.min(c.2));
            hi = (hi.0.max(c.0), hi.1.max(c.1), hi.2.max(c.2));
            buckets.entry(c).or_default().push(p);
        }
        Self {
            size: cell_size,
            buckets,
            lo,
            hi,
        }
    }

    /// Same result as [`LocalMemory::closest_point`] over the indexed set.
    pub fn closest_point(&self, q: &Vec3) -> Option<Vec3> {
        if self.buckets.is_empty() {
            return None;
        }
        let qc = cell_of(q, self.size);
        // Chebyshev distance from the query cell to the farthest occupied cell.
        let reach = [
            (qc.0 - self.lo.0).abs(),
            (qc.0 - self.hi.0).abs(),
            (qc.1 - self.lo.1).abs(),
            (qc.1 - self.hi.1).abs(),
            (qc.2 - self.lo.2).abs(),
            (qc.2 - self.hi.2).abs(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);

        let mut best: Option<(f64, Vec3)> = None;
        for k in 0..=reach {
            for dx in -k..=k {
                for dy in -k..=k {
                    for dz in -k..=k {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != k {
                            continue;
                        }
                        let Some(bucket) = self.buckets.get(&(qc.0 + dx, qc.1 + dy, qc.2 + dz)) else {
                            continue;
                        };
                        for p in bucket {
                            let cand = ((p - q).norm_squared(), p);
                            if best.as_ref().is_none_or(|(d, b)| closer(cand, (*d, b)).is_lt()) {
                                best = Some((cand.0, *p));
                            }
                        }
                    }
                }
            }
            // Every point in ring k + 1 or beyond is at least k cells away.
            if let Some((d, _)) = best {
                let bound = k as f64 * self.size;
                if d < bound * bound {
                    break;
                }
            }
        }
        best.map(|(_, p)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_examples() {
        let mut m = LocalMemory::new(15.0);
        m.update(&[Vec3::new(10.0, 0.0, 0.0)], &Vec3::zeros());
        assert_eq!(m.len(), 1);
        m.update(&[], &Vec3::new(-6.0, 0.0, 0.0));
        assert!(m.is_empty());
        m.update(&[Vec3::new(15.0, 0.0, 0.0)], &Vec3::zeros());
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn duplicates_collapse_to_first_point_in_cell() {
        let mut m = LocalMemory::new(15.0);
        let a = Vec3::new(1.01, 2.01, 3.01);
        let b = Vec3::new(1.04, 2.02, 3.03);
        m.update(&[a, b, Vec3::new(1.06, 2.01, 3.01)], &Vec3::zeros());
        assert_eq!(m.len(), 2);
        assert!(m.points().any(|p| *p == a));
        assert!(!m.points().any(|p| *p == b));
    }

    #[test]
    fn closest_point_examples() {
        let mut m = LocalMemory::new(15.0);
        assert_eq!(m.closest_point(&Vec3::zeros()), None);
        m.update(&[Vec3::new(5.0, 0.0, 0.0), Vec3::new(0.0, 7.0, 0.0)], &Vec3::zeros());
        assert_eq!(m.closest_point(&Vec3::zeros()), Some(Vec3::new(5.0, 0.0, 0.0)));

        let mut tie = LocalMemory::new(15.0);
        tie.update(&[Vec3::new(0.0, 5.0, 0.0), Vec3::new(0.0, -5.0, 0.0), Vec3::new(5.0, 0.0, 0.0)], &Vec3::zeros());
        assert_eq!(tie.closest_point(&Vec3::zeros()), Some(Vec3::new(0.0, -5.0, 0.0)));
    }

    #[test]
    fn context_projections() {
        let mut m = LocalMemory::new(15.0);
        assert!(m.context(&Vec3::zeros(), ContextMode::Horizontal).is_none());
        m.update(&[Vec3::new(3.0, 4.0, 2.0)], &Vec3::zeros());
        let h = m.context(&Vec3::zeros(), ContextMode::Horizontal).unwrap();
        assert_eq!(h.projection, Vec2::new(3.0, 4.0));
        let v = m.context(&Vec3::zeros(), ContextMode::Vertical).unwrap();
        assert_eq!(v.projection, Vec2::new(3.0, 2.0));
        assert_eq!(v.point, Vec3::new(3.0, 4.0, 2.0));
        assert!((v.distance - 29f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn slab_ignores_points_off_the_plane() {
        let mut m = LocalMemory::new(15.0);
        let below = Vec3::new(2.0, 0.0, -5.0);
        let level = Vec3::new(6.0, 0.0, 0.5);
        let beside = Vec3::new(0.5, 4.0, 0.0);
        m.update(&[below, level, beside], &Vec3::zeros());
        let pose = VehicleState::at_rest(Vec3::zeros(), 0.0);
        let h = m.context_in_slab(&pose, ContextMode::Horizontal, 3.0).unwrap();
        assert_eq!(h.point, beside);
        let v = m.context_in_slab(&pose, ContextMode::Vertical, 3.0).unwrap();
        assert_eq!(v.point, below);
        let turned = VehicleState::at_rest(Vec3::zeros(), std::f64::consts::FRAC_PI_2);
        let v = m.context_in_slab(&turned, ContextMode::Vertical, 3.0).unwrap();
        assert_eq!(v.point, beside);
    }

    #[test]
    fn index_agrees_on_small_cloud() {
        let pts: Vec<Vec3> = (0..50)
            .map(|k| {
                let t = k as f64 * 0.7;
                Vec3::new(6.0 * t.cos(), 6.0 * t.sin(), 0.3 * k as f64 - 7.0)
            })
            .collect();
        let mut m = LocalMemory::new(15.0);
        m.update(&pts, &Vec3::zeros());
        let idx = m.index(1.0);
        for q in [Vec3::zeros(), Vec3::new(5.0, 1.0, -3.0), Vec3::new(-20.0, 4.0, 9.0)] {
            assert_eq!(idx.closest_point(&q), m.closest_point(&q));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn cloud() -> impl Strategy<Value = Vec<Vec3>> {
            prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0, -20.0f64..20.0), 0..120)
                .prop_map(|v| v.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect())
        }

        fn vehicle() -> impl Strategy<Value = Vec3> {
            (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
        }

        fn closest_distance(m: &LocalMemory, p: &Vec3) -> f64 {
            m.closest_point(p).map_or(f64::INFINITY, |q| (q - p).norm())
        }

        proptest! {
            #[test]
            fn update_is_idempotent(pts in cloud(), p in vehicle()) {
                let mut m = LocalMemory::new(15.0);
                m.update(&pts, &p);
                let once = m.clone();
                m.update(&pts, &p);
                prop_assert_eq!(m, once);
            }

            #[test]
            fn stored_points_lie_in_the_ball(a in cloud(), b in cloud(), p in vehicle(), q in vehicle()) {
                let mut m = LocalMemory::new(15.0);
                m.update(&a, &p);
                m.update(&b, &q);
                prop_assert!(m.points().all(|s| (s - q).norm() <= 15.0));
                let side = (2.0 * 15.0 / GRID_RESOLUTION).ceil() + 1.0;
                prop_assert!((m.len() as f64) <= side.powi(3));
            }

            #[test]
            fn closest_distance_is_monotone(a in cloud(), b in cloud(), p in vehicle(), q in vehicle()) {
                let mut m = LocalMemory::new(15.0);
                m.update(&a, &p);
                let before = closest_distance(&m, &p);
                m.update(&b, &p);
                prop_assert!(closest_distance(&m, &p) <= before);

                // Eviction alone only removes points.
                let kept = m.clone();
                m.update(&[], &q);
                prop_assert!(m.points().all(|s| kept.points().any(|k| k == s)));
                prop_assert!(closest_distance(&m, &q) >= closest_distance(&kept, &q));
            }

            #[test]
            fn index_matches_linear_scan(pts in cloud(), query in (-25.0f64..25.0, -25.0f64..25.0, -25.0f64..25.0), cell in 0.5f64..6.0) {
                let mut m = LocalMemory::new(40.0);
                m.update(&pts, &Vec3::zeros());
                let q = Vec3::new(query.0, query.1, query.2);
                prop_assert_eq!(m.index(cell).closest_point(&q), m.closest_point(&q));
            }
        }
    }
}
