//! Quadratic boundary fit used to tell converging obstacles from walls.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::world::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexityLabel {
    Convex,
    Concave,
}

/// `y = a·x² + b·x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    /// Abscissa of the extremum, or `None` for a degenerate (linear) fit.
    pub fn vertex(&self) -> Option<f64> {
        (self.a != 0.0).then(|| -self.b / (2.0 * self.a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convexity {
    pub label: ConvexityLabel,
    pub fit: Option<QuadraticFit>,
}

impl Convexity {
    pub fn curvature(&self) -> Option<f64> {
        self.fit.map(|f| f.a)
    }
}

const RANK_TOL: f64 = 1e-10;

/// Least-squares quadratic through `points` (x, y). Returns `None` with
/// fewer than three points or fewer than three distinct abscissae.
pub fn fit_quadratic(points: &[Vec2]) -> Option<QuadraticFit> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    // Center and scale x so the Vandermonde columns are comparable.
    let mean = points.iter().map(|p| p.x).sum::<f64>() / n as f64;
    let scale = points
        .iter()
        .map(|p| (p.x - mean).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let design = DMatrix::from_fn(n, 3, |r, c| {
        let u = (points[r].x - mean) / scale;
        match c {
            0 => u * u,
            1 => u,
            _ => 1.0,
        }
    });
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.y));
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.iter().any(|&s| s <= RANK_TOL * smax) {
        return None;
    }
    let sol = svd.solve(&rhs, RANK_TOL * smax).ok()?;
    let (au, bu, cu) = (sol[0], sol[1], sol[2]);
    // Undo x = mean + scale·u.
    let a = au / (scale * scale);
    let b = bu / scale - 2.0 * au * mean / (scale * scale);
    let c = au * mean * mean / (scale * scale) - bu * mean / scale + cu;
    Some(QuadraticFit { a, b, c })
}

/// Convex iff the fitted curvature is at least `threshold`; an undetermined
/// fit counts as concave.
pub fn convexity(points: &[Vec2], threshold: f64) -> Convexity {
    match fit_quadratic(points) {
        Some(fit) if fit.a >= threshold => Convexity {
            label: ConvexityLabel::Convex,
            fit: Some(fit),
        },
        fit => Convexity {
            label: ConvexityLabel::Concave,
            fit,
        },
    }
}
