//! Extreme points, hull volume and the blown-up volume estimator
//! `vol(conv) / (1 − V_n/n)` with its Markov-inequality confidence interval.
//!
//! A point is extreme when it is not in the convex hull of the other points;
//! the proportion of extreme points is the leave-one-out estimate of the
//! mass outside the hull. Extreme flags are decided by LP feasibility in any
//! dimension. For `d ≤ 3` an exact hull is built first and only its boundary
//! points are sent to the LP.

mod cloud;
mod geometry;
pub mod lp;

pub use cloud::PointCloud;
pub use geometry::{hull_1d, hull_2d, hull_3d, HalfSpaces, HullGeometry};
pub use lp::{in_hull, DEFAULT_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct HullSummary {
    pub n: usize,
    pub dim: usize,
    pub extreme_count: usize,
    pub extreme_flags: Vec<bool>,
    /// Exact hull volume for `d ≤ 3`, `None` above.
    pub volume: Option<f64>,
    #[serde(skip)]
    pub region: Option<HalfSpaces>,
}

/// Membership of `query` in the hull of `cloud` (see [`lp::in_hull`]).
pub fn in_cloud_hull(query: &[f64], cloud: &PointCloud, tol: f64) -> Result<bool> {
    if query.len() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            got: query.len(),
        });
    }
    in_hull(query, cloud.points(), tol)
}

/// Exact hull geometry for `d ≤ 3`; `None` above or for clouds that do not
/// span space in three dimensions.
pub fn hull_geometry(cloud: &PointCloud) -> Option<HullGeometry> {
    match cloud.dim() {
        1 => Some(hull_1d(cloud)),
        2 => Some(hull_2d(cloud)),
        3 => hull_3d(cloud),
        _ => None,
    }
}

pub fn hull_summary(cloud: &PointCloud) -> HullSummary {
    hull_summary_with_tol(cloud, DEFAULT_TOL).expect("default tolerance is positive")
}

pub fn hull_summary_with_tol(cloud: &PointCloud, tol: f64) -> Result<HullSummary> {
    let n = cloud.len();
    let dim = cloud.dim();
    let geometry = hull_geometry(cloud);
    let candidates: Vec<usize> = match &geometry {
        Some(g) => g.candidates.clone(),
        None => (0..n).collect(),
    };
    let mut extreme_flags = vec![false; n];
    for i in candidates {
        let others = cloud
            .points()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p);
        extreme_flags[i] = !in_hull(cloud.point(i), others, tol)?;
    }
    let extreme_count = extreme_flags.iter().filter(|&&f| f).count();
    let volume = match (&geometry, dim) {
        (Some(g), _) => Some(g.volume),
        // Flat clouds in three dimensions have zero volume.
        (None, 3) => Some(0.0),
        _ => None,
    };
    Ok(HullSummary {
        n,
        dim,
        extreme_count,
        extreme_flags,
        volume,
        region: geometry.map(|g| g.region),
    })
}

/// `hull_volume / (1 − extreme/n)`.
pub fn volume_estimate_from(hull_volume: f64, extreme: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if extreme >= n {
        return Err(Error::AllPointsExtreme);
    }
    Ok(hull_volume / (1.0 - extreme as f64 / n as f64))
}

pub fn estimate_volume(summary: &HullSummary) -> Result<f64> {
    if summary.dim > 3 {
        return Err(Error::VolumeUnsupported(summary.dim));
    }
    let volume = summary.volume.ok_or(Error::VolumeUnsupported(summary.dim))?;
    volume_estimate_from(volume, summary.extreme_count, summary.n)
}

/// Volume estimate with the interval `[v̂, v̂ / (1 − √((8d+9)n) / (√α (n − V_n)))]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    /// `+∞` when the denominator is not positive.
    pub ci_high: f64,
    pub alpha: f64,
}

pub fn volume_ci_from(estimate: f64, extreme: usize, n: usize, dim: usize, alpha: f64) -> Result<VolumeEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if extreme >= n {
        return Err(Error::AllPointsExtreme);
    }
    let (nf, d) = (n as f64, dim as f64);
    let shrink = ((8.0 * d + 9.0) * nf).sqrt() / (alpha.sqrt() * (nf - extreme as f64));
    let ci_high = if shrink < 1.0 {
        estimate / (1.0 - shrink)
    } else {
        f64::INFINITY
    };
    Ok(VolumeEstimate {
        estimate,
        ci_low: estimate,
        ci_high,
        alpha,
    })
}

pub fn volume_ci(summary: &HullSummary, alpha: f64) -> Result<VolumeEstimate> {
    let estimate = estimate_volume(summary)?;
    volume_ci_from(estimate, summary.extreme_count, summary.n, summary.dim, alpha)
}

/// `(8d+9)/n`, the MSE bound for `V_n/n` against the uncovered mass.
pub fn conv_mse_bound(n: usize, dim: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be ≥ 1"));
    }
    Ok((8.0 * dim as f64 + 9.0) / n as f64)
}

/// `(d+1)/n`, the bound on the expected change of uncovered mass when one
/// point is added.
pub fn consecutive_defect_bound(n: usize, dim: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be ≥ 1"));
    }
    Ok((dim as f64 + 1.0) / n as f64)
}
