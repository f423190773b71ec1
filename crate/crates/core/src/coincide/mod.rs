//! Nearest-neighbour coincidence testing from distances alone.
//!
//! `W_n(r)` counts sample points whose nearest other sample point is within
//! `r`. `W_n(r)/n` estimates the mass of the union of radius-`r` balls around
//! the sample, with mean squared error at most `9/n` for any metric and any
//! distribution.

mod ad;
mod dna;

pub use ad::{ad_standardized, ad_two_sample, ks_distance, AD_CRITICAL_90, AD_CRITICAL_95};
pub use dna::{kimura2p, kimura_from_fractions, kimura_matrix, parse_fasta, substitution_fractions, SequenceRecord};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loo::LooEstimate;

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: Vec<f64>,
    n: usize,
}

impl DistanceMatrix {
    /// Row-major entries; checks shape, symmetry (1e−12), the diagonal and
    /// signs.
    pub fn new(d: Vec<f64>, n: usize) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::invalid(format!("expected {} entries for n = {n}, got {}", n * n, d.len())));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !(v >= 0.0) {
                    return Err(Error::invalid(format!("entry ({i},{j}) is not a nonnegative number")));
                }
                if (v - d[j * n + i]).abs() > 1e-12 {
                    return Err(Error::invalid(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { d, n })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Self::new(rows.concat(), n)
    }

    /// Euclidean distances between rows of a flat `n × dim` array.
    pub fn euclidean(coords: &[f64], dim: usize) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid("coordinate count is not a multiple of dim"));
        }
        let n = coords.len() / dim;
        let point = |i: usize| &coords[i * dim..(i + 1) * dim];
        let d: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    0.0
                } else {
                    point(i).iter().zip(point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                }
            })
            .collect();
        Ok(DistanceMatrix { d, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// The principal submatrix on `idx`.
    pub fn select(&self, idx: &[usize]) -> Self {
        let d = idx.iter().flat_map(|&i| idx.iter().map(move |&j| self.get(i, j))).collect();
        DistanceMatrix { d, n: idx.len() }
    }

    /// For each index in `from`, the distance to the closest index in `to`.
    pub fn min_distances(&self, from: &[usize], to: &[usize]) -> Vec<f64> {
        from.iter()
            .map(|&i| to.iter().map(|&j| self.get(i, j)).fold(f64::INFINITY, f64::min))
            .collect()
    }
}

/// `values[i] = min_{j≠i} d(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnDistances {
    pub values: Vec<f64>,
}

impl NnDistances {
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn nn_loo_distances(d: &DistanceMatrix) -> Result<NnDistances> {
    if d.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 objects, got {}", d.len())));
    }
    let values = (0..d.len())
        .map(|i| {
            d.row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(NnDistances { values })
}

/// `W_n(r)/n` from precomputed nearest-neighbour distances.
pub fn coverage_fraction_nn(nn: &NnDistances, r: f64) -> Result<LooEstimate> {
    if !(r >= 0.0) {
        return Err(Error::invalid("radius must be nonnegative"));
    }
    let hits = nn.values.iter().filter(|&&v| v <= r).count();
    LooEstimate::from_counts(hits, nn.values.len())
}

/// `W_n(r)/n`: share of points whose nearest other point is within `r`.
pub fn coverage_fraction(d: &DistanceMatrix, r: f64) -> Result<LooEstimate> {
    coverage_fraction_nn(&nn_loo_distances(d)?, r)
}

/// `9/n`.
pub fn coincidence_mse_bound(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    Ok(9.0 / n as f64)
}

/// Lower-tail p-value `(1 + #{reference ≤ query})/(n + 1)`.
///
/// Small values flag a query that is closer to the corpus than the corpus
/// members are to each other.
pub fn nn_test_pvalue(reference: &NnDistances, query: f64) -> Result<f64> {
    if reference.values.is_empty() {
        return Err(Error::EmptySample);
    }
    let count = reference.values.iter().filter(|&&v| v <= query).count();
    Ok((1 + count) as f64 / (reference.values.len() + 1) as f64)
}

/// `sup_r (W_n(r)/n − truth(r))²` over `r ∈ {0} ∪ {nn distances} ∪
/// {midpoints of consecutive distinct nn distances}`. Returns the supremum and
/// the radius attaining it.
pub fn aldous_sup_statistic(d: &DistanceMatrix, truth: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let nn = nn_loo_distances(d)?;
    let mut knots = nn.sorted();
    knots.dedup();
    let mut radii = vec![0.0];
    radii.extend(knots.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    radii.extend(&knots);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for r in radii {
        let w = coverage_fraction_nn(&nn, r)?.value;
        let gap = (w - truth(r)).powi(2);
        if gap > best.0 {
            best = (gap, r);
        }
    }
    Ok(best)
}

/// Linear-interpolation percentile (`p` in `[0, 100]`) of nonempty data.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::invalid("percentile must lie in [0, 100]"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPair {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Pairs closer than the `p`-th percentile of the nearest-neighbour
/// distances, with the threshold used.
pub fn flagged_pairs(d: &DistanceMatrix, p: f64) -> Result<(f64, Vec<FlaggedPair>)> {
    let nn = nn_loo_distances(d)?;
    let threshold = percentile(&nn.values, p)?;
    let mut pairs = Vec::new();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let distance = d.get(i, j);
            if distance <= threshold {
                pairs.push(FlaggedPair { i, j, distance });
            }
        }
    }
    Ok((threshold, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loo::loo_estimate;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> DistanceMatrix {
        DistanceMatrix::euclidean(xs, 1).unwrap()
    }

    #[test]
    fn nn_examples() {
        assert_eq!(nn_loo_distances(&line(&[0.0, 1.0, 3.0])).unwrap().values, vec![1.0, 1.0, 2.0]);
        assert_eq!(nn_loo_distances(&line(&[2.0, 2.0])).unwrap().values, vec![0.0, 0.0]);
        let c = DistanceMatrix::from_rows(&[vec![0.0, 4.0, 4.0], vec![4.0, 0.0, 4.0], vec![4.0, 4.0, 0.0]]).unwrap();
        assert_eq!(nn_loo_distances(&c).unwrap().values, vec![4.0; 3]);
        assert!(nn_loo_distances(&line(&[1.0])).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0]]).is_err());
        assert!(DistanceMatrix::new(vec![0.0; 3], 2).is_err());
    }

    #[test]
    fn coverage_examples() {
        let d = line(&[0.0, 1.0, 3.0]);
        assert!((coverage_fraction(&d, 1.0).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(coverage_fraction(&d, 0.0).unwrap().value, 0.0);
        assert_eq!(coverage_fraction(&d, 2.0).unwrap().value, 1.0);
        assert!(coverage_fraction(&d, -1.0).is_err());
    }

    #[test]
    fn bound_and_pvalue() {
        assert_eq!(coincidence_mse_bound(9).unwrap(), 1.0);
        assert_eq!(coincidence_mse_bound(900).unwrap(), 0.01);
        assert_eq!(coincidence_mse_bound(3).unwrap(), 3.0);
        assert!(coincidence_mse_bound(2).is_err());
        let r = NnDistances { values: vec![1.0, 1.0, 2.0] };
        assert_eq!(nn_test_pvalue(&r, 0.5).unwrap(), 0.25);
        assert_eq!(nn_test_pvalue(&r, 5.0).unwrap(), 1.0);
        assert_eq!(nn_test_pvalue(&r, 1.0).unwrap(), 0.75);
        assert!(nn_test_pvalue(&NnDistances { values: vec![] }, 1.0).is_err());
    }

    #[test]
    fn aldous_statistic() {
        let d = line(&[0.0, 0.1, 0.5, 0.55, 0.9]);
        let nn = nn_loo_distances(&d).unwrap();
        let exact = |r: f64| coverage_fraction_nn(&nn, r).unwrap().value;
        assert_eq!(aldous_sup_statistic(&d, exact).unwrap().0, 0.0);
        let truth = |r: f64| (2.0 * r).min(1.0);
        let (sup, _) = aldous_sup_statistic(&d, truth).unwrap();
        let fixed = (coverage_fraction(&d, 0.1).unwrap().value - truth(0.1)).powi(2);
        assert!(sup >= fixed);
    }

    #[test]
    fn percentiles_and_flags() {
        let v = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&v, 50.0).unwrap(), 3.0);
        assert!((percentile(&v, 1.0).unwrap() - 1.04).abs() < 1e-12);
        let d = line(&[0.0, 0.01, 5.0, 9.0, 9.02]);
        let (t, pairs) = flagged_pairs(&d, 1.0).unwrap();
        assert!((t - 0.01).abs() < 1e-12);
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].i, pairs[0].j), (0, 1));
    }

    proptest! {
        #[test]
        fn coverage_is_loo(
            pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..15),
            r in 0.0f64..0.5,
        ) {
            let coords: Vec<f64> = pts.iter().flat_map(|&(x, y)| [x, y]).collect();
            let d = DistanceMatrix::euclidean(&coords, 2).unwrap();
            let oracle = |c: &(f64, f64), rest: &[(f64, f64)]| {
                rest.iter().any(|q| ((c.0 - q.0).powi(2) + (c.1 - q.1).powi(2)).sqrt() <= r)
            };
            prop_assert_eq!(coverage_fraction(&d, r).unwrap(), loo_estimate(&oracle, &pts).unwrap());
        }

        #[test]
        fn coverage_monotone(xs in proptest::collection::vec(0.0f64..10.0, 2..20), r1 in 0.0f64..5.0, dr in 0.0f64..5.0) {
            let d = line(&xs);
            prop_assert!(coverage_fraction(&d, r1).unwrap().value <= coverage_fraction(&d, r1 + dr).unwrap().value);
        }
    }
}
