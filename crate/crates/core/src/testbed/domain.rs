//! Indexed, ordered finite decision sets.

use crate::error::{Error, Result};

/// Grid construction parameters, kept so a domain can be re-created and
/// serialized with an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub lower: f64,
    pub upper: f64,
    pub resolution: usize,
}

/// An ordered set of distinct points in R^d. All optimization works over the
/// indices of this set; the ordering is part of the reproducibility contract.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDomain {
    dim: usize,
    points: Vec<Vec<f64>>,
    grid: Option<GridMeta>,
}

impl FiniteDomain {
    /// Uniform grid of `resolution^dim` points over `[lower, upper]^dim`,
    /// endpoints included, row-major with axis 0 slowest.
    pub fn grid(dim: usize, lower: f64, upper: f64, resolution: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("domain dimension must be at least 1".into()));
        }
        if resolution == 0 {
            return Err(Error::InvalidParameter("grid resolution must be at least 1".into()));
        }
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must be finite with lower < upper, got [{lower}, {upper}]"
            )));
        }
        let axis: Vec<f64> = if resolution == 1 {
            vec![lower]
        } else {
            (0..resolution)
                .map(|i| lower + (upper - lower) * i as f64 / (resolution - 1) as f64)
                .collect()
        };
        let total = resolution.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut p = vec![0.0; dim];
            let mut rest = flat;
            for a in (0..dim).rev() {
                p[a] = axis[rest % resolution];
                rest /= resolution;
            }
            points.push(p);
        }
        Ok(FiniteDomain {
            dim,
            points,
            grid: Some(GridMeta { lower, upper, resolution }),
        })
    }

    /// Domain from an explicit point list. Points must be distinct and share a
    /// dimension.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("domain must contain at least one point".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("domain points must have dimension >= 1".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { context: "domain point" });
            }
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidParameter(format!(
                    "domain points must be distinct; {:?} appears twice",
                    w[0]
                )));
            }
        }
        Ok(FiniteDomain { dim, points, grid: None })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn grid_meta(&self) -> Option<GridMeta> {
        self.grid
    }
}
