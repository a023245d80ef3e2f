use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    State,
    Action,
}

/// A strictly increasing list of at least two finite points.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    kind: GridKind,
}

impl Grid {
    pub fn new(points: Vec<f64>, kind: GridKind) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!("{kind:?} grid needs at least 2 points")));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point {p}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Grid { points, kind })
    }

    /// `n` equally spaced points on `[lo, hi]`, endpoints exact.
    pub fn uniform(lo: f64, hi: f64, n: usize, kind: GridKind) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidGrid(format!("uniform grid needs n >= 2 and lo < hi (n={n}, [{lo}, {hi}])")));
        }
        let last = (n - 1) as f64;
        let pts = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * (i as f64) / last })
            .collect();
        Grid::new(pts, kind)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
    pub fn kind(&self) -> GridKind {
        self.kind
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn min(&self) -> f64 {
        self.points[0]
    }
    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }
    pub fn get(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// Largest gap between consecutive points.
    pub fn max_spacing(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Largest gap adjacent to point `i`.
    pub fn local_spacing(&self, i: usize) -> f64 {
        let left = if i > 0 { self.points[i] - self.points[i - 1] } else { 0.0 };
        let right = if i + 1 < self.len() { self.points[i + 1] - self.points[i] } else { 0.0 };
        left.max(right)
    }

    /// Index of the nearest point (lower index on exact ties).
    pub fn nearest(&self, v: f64) -> usize {
        let pts = &self.points;
        let k = pts.partition_point(|&p| p < v);
        if k == 0 {
            0
        } else if k == pts.len() {
            pts.len() - 1
        } else if v - pts[k - 1] <= pts[k] - v {
            k - 1
        } else {
            k
        }
    }

    /// Nearest index, rejecting values more than half a cell outside the grid.
    pub fn snap(&self, v: f64) -> Result<usize> {
        let k = self.nearest(v);
        let half = 0.5 * self.local_spacing(k);
        let d = (v - self.points[k]).abs();
        if !v.is_finite() || d > half * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::GridSnap { gamma: v, nearest: self.points[k] });
        }
        Ok(k)
    }

    /// Index of a point within `tol` of `v`, if any.
    pub fn find(&self, v: f64, tol: f64) -> Option<usize> {
        let k = self.nearest(v);
        ((self.points[k] - v).abs() <= tol).then_some(k)
    }

    /// Smallest interval `[i, i+1]` containing `v`, clamped to the grid.
    pub fn bracket(&self, v: f64) -> (usize, usize, f64) {
        let pts = &self.points;
        if v <= pts[0] {
            return (0, 1, 0.0);
        }
        if v >= self.max() {
            let n = pts.len();
            return (n - 2, n - 1, 1.0);
        }
        let k = pts.partition_point(|&p| p <= v);
        let (i, j) = (k - 1, k);
        (i, j, (v - pts[i]) / (pts[j] - pts[i]))
    }
}
