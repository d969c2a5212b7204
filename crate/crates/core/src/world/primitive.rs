use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

const PARALLEL_EPS: f64 = 1e-12;

/// Analytic obstacle shapes. All coordinates are world frame, z up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObstaclePrimitive {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    #[serde(rename = "box")]
    AxisAlignedBox { min: Vec3, max: Vec3 },
    #[serde(rename = "cylinder")]
    VerticalCylinder {
        base_center: Vec3,
        radius: f64,
        height: f64,
    },
    #[serde(rename = "wall")]
    WallSegment {
        start: Vec2,
        end: Vec2,
        thickness: f64,
        base_depth: f64,
        height: f64,
    },
}

impl ObstaclePrimitive {
    pub fn sphere(center: Vec3, radius: f64) -> Self {
        ObstaclePrimitive::Sphere { center, radius }
    }

    pub fn aabb(min: Vec3, max: Vec3) -> Self {
        ObstaclePrimitive::AxisAlignedBox { min, max }
    }

    pub fn cylinder(base_center: Vec3, radius: f64, height: f64) -> Self {
        ObstaclePrimitive::VerticalCylinder {
            base_center,
            radius,
            height,
        }
    }

    pub fn wall(start: Vec2, end: Vec2, thickness: f64, base_depth: f64, height: f64) -> Self {
        ObstaclePrimitive::WallSegment {
            start,
            end,
            thickness,
            base_depth,
            height,
        }
    }

    /// Checks the shape invariants, returning a description of the first violation.
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be strictly positive, got {v}"))
            }
        };
        match self {
            ObstaclePrimitive::Sphere { radius, .. } => positive("radius", *radius),
            ObstaclePrimitive::AxisAlignedBox { min, max } => {
                if (0..3).all(|i| min[i] <= max[i]) {
                    Ok(())
                } else {
                    Err(format!("box min {min:?} exceeds max {max:?}"))
                }
            }
            ObstaclePrimitive::VerticalCylinder { radius, height, .. } => {
                positive("radius", *radius)?;
                positive("height", *height)
            }
            ObstaclePrimitive::WallSegment {
                start,
                end,
                thickness,
                height,
                ..
            } => {
                positive("thickness", *thickness)?;
                positive("height", *height)?;
                if (end - start).norm() > 0.0 {
                    Ok(())
                } else {
                    Err("wall endpoints coincide".to_string())
                }
            }
        }
    }

    /// Distances along the ray at which it crosses this primitive's surface,
    /// unsorted. Tangent grazes count as crossings.
    pub fn crossings(&self, origin: &Vec3, dir: &Vec3, out: &mut Vec<f64>) {
        match self {
            ObstaclePrimitive::Sphere { center, radius } => {
                let oc = origin - center;
                let b = oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                let disc = b * b - c;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    out.push(-b - s);
                    out.push(-b + s);
                }
            }
            ObstaclePrimitive::AxisAlignedBox { min, max } => {
                slab_crossings(origin, dir, min, max, out);
            }
            ObstaclePrimitive::VerticalCylinder {
                base_center,
                radius,
                height,
            } => {
                let z_lo = base_center.z;
                let z_hi = base_center.z + height;
                let ox = origin.x - base_center.x;
                let oy = origin.y - base_center.y;
                let a = dir.x * dir.x + dir.y * dir.y;
                if a > PARALLEL_EPS {
                    let b = ox * dir.x + oy * dir.y;
                    let c = ox * ox + oy * oy - radius * radius;
                    let disc = b * b - a * c;
                    if disc >= 0.0 {
                        let s = disc.sqrt();
                        for t in [(-b - s) / a, (-b + s) / a] {
                            let z = origin.z + t * dir.z;
                            if (z_lo..=z_hi).contains(&z) {
                                out.push(t);
                            }
                        }
                    }
                }
                if dir.z.abs() > PARALLEL_EPS {
                    for zc in [z_lo, z_hi] {
                        let t = (zc - origin.z) / dir.z;
                        let x = ox + t * dir.x;
                        let y = oy + t * dir.y;
                        if x * x + y * y <= radius * radius {
                            out.push(t);
                        }
                    }
                }
            }
            ObstaclePrimitive::WallSegment {
                start,
                end,
                thickness,
                base_depth,
                height,
            } => {
                let frame = WallFrame::new(start, end);
                let lo = Vec3::new(0.0, -0.5 * thickness, *base_depth);
                let hi = Vec3::new(frame.length, 0.5 * thickness, base_depth + height);
                let o = frame.to_local(origin);
                let d = frame.dir_to_local(dir);
                slab_crossings(&o, &d, &lo, &hi, out);
            }
        }
    }

    /// Exact signed Euclidean distance to the surface, negative inside.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        match self {
            ObstaclePrimitive::Sphere { center, radius } => (p - center).norm() - radius,
            ObstaclePrimitive::AxisAlignedBox { min, max } => box_sdf(p, min, max),
            ObstaclePrimitive::VerticalCylinder {
                base_center,
                radius,
                height,
            } => {
                let radial = ((p.x - base_center.x).powi(2) + (p.y - base_center.y).powi(2)).sqrt();
                let dr = radial - radius;
                let dz = (p.z - (base_center.z + 0.5 * height)).abs() - 0.5 * height;
                let outside = Vec2::new(dr.max(0.0), dz.max(0.0)).norm();
                outside + dr.max(dz).min(0.0)
            }
            ObstaclePrimitive::WallSegment {
                start,
                end,
                thickness,
                base_depth,
                height,
            } => {
                let frame = WallFrame::new(start, end);
                let lo = Vec3::new(0.0, -0.5 * thickness, *base_depth);
                let hi = Vec3::new(frame.length, 0.5 * thickness, base_depth + height);
                box_sdf(&frame.to_local(p), &lo, &hi)
            }
        }
    }

    /// Closed outline of the horizontal footprint, for plotting.
    pub fn outline_xy(&self, segments: usize) -> Vec<(f64, f64)> {
        let circle = |cx: f64, cy: f64, r: f64| {
            (0..=segments)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / segments as f64;
                    (cx + r * a.cos(), cy + r * a.sin())
                })
                .collect()
        };
        match self {
            ObstaclePrimitive::Sphere { center, radius } => circle(center.x, center.y, *radius),
            ObstaclePrimitive::VerticalCylinder {
                base_center,
                radius,
                ..
            } => circle(base_center.x, base_center.y, *radius),
            ObstaclePrimitive::AxisAlignedBox { min, max } => vec![
                (min.x, min.y),
                (max.x, min.y),
                (max.x, max.y),
                (min.x, max.y),
                (min.x, min.y),
            ],
            ObstaclePrimitive::WallSegment {
                start,
                end,
                thickness,
                ..
            } => {
                let u = (end - start).normalize();
                let n = Vec2::new(-u.y, u.x) * (0.5 * thickness);
                let corners = [start + n, end + n, end - n, start - n, start + n];
                corners.iter().map(|c| (c.x, c.y)).collect()
            }
        }
    }

    /// World-frame axis-aligned bounds as (min, max).
    pub fn bounds(&self) -> (Vec3, Vec3) {
        match self {
            ObstaclePrimitive::Sphere { center, radius } => {
                let r = Vec3::repeat(*radius);
                (center - r, center + r)
            }
            ObstaclePrimitive::AxisAlignedBox { min, max } => (*min, *max),
            ObstaclePrimitive::VerticalCylinder {
                base_center,
                radius,
                height,
            } => (
                Vec3::new(base_center.x - radius, base_center.y - radius, base_center.z),
                Vec3::new(base_center.x + radius, base_center.y + radius, base_center.z + height),
            ),
            ObstaclePrimitive::WallSegment {
                base_depth, height, ..
            } => {
                let pts = self.outline_xy(4);
                let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
                for (x, y) in pts {
                    lo.x = lo.x.min(x);
                    lo.y = lo.y.min(y);
                    hi.x = hi.x.max(x);
                    hi.y = hi.y.max(y);
                }
                lo.z = *base_depth;
                hi.z = base_depth + height;
                (lo, hi)
            }
        }
    }
}

/// Local frame of a wall segment: u along the segment, v to its left, z unchanged.
struct WallFrame {
    origin: Vec2,
    u: Vec2,
    v: Vec2,
    length: f64,
}

impl WallFrame {
    fn new(start: &Vec2, end: &Vec2) -> Self {
        let delta = end - start;
        let length = delta.norm();
        let u = delta / length;
        Self {
            origin: *start,
            u,
            v: Vec2::new(-u.y, u.x),
            length,
        }
    }

    fn to_local(&self, p: &Vec3) -> Vec3 {
        let rel = Vec2::new(p.x, p.y) - self.origin;
        Vec3::new(rel.dot(&self.u), rel.dot(&self.v), p.z)
    }

    fn dir_to_local(&self, d: &Vec3) -> Vec3 {
        let dh = Vec2::new(d.x, d.y);
        Vec3::new(dh.dot(&self.u), dh.dot(&self.v), d.z)
    }
}

fn slab_crossings(origin: &Vec3, dir: &Vec3, lo: &Vec3, hi: &Vec3, out: &mut Vec<f64>) {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for i in 0..3 {
        if dir[i].abs() <= PARALLEL_EPS {
            if origin[i] < lo[i] || origin[i] > hi[i] {
                return;
            }
            continue;
        }
        let t0 = (lo[i] - origin[i]) / dir[i];
        let t1 = (hi[i] - origin[i]) / dir[i];
        let (a, b) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        t_near = t_near.max(a);
        t_far = t_far.min(b);
    }
    if t_near <= t_far {
        out.push(t_near);
        out.push(t_far);
    }
}

fn box_sdf(p: &Vec3, lo: &Vec3, hi: &Vec3) -> f64 {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let q = (p - center).abs() - half;
    let outside = q.map(|c| c.max(0.0)).norm();
    outside + q.max().min(0.0)
}
