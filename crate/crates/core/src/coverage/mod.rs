//! Prediction intervals from least squares without an intercept, and the
//! leave-one-out estimate of their coverage.

mod quantile;

pub use quantile::normal_quantile;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loo::LooEstimate;

/// Smallest eigenvalue of `XᵀX` allowed, relative to the largest.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl RegressionDataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.ncols() == 0 {
            return Err(Error::invalid("design needs at least one column"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in data"));
        }
        Ok(RegressionDataset { x, y })
    }

    /// Builds from feature rows and responses.
    pub fn from_rows(rows: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: bad.len(),
            });
        }
        let x = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(x, DVector::from_column_slice(y))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.x.row(i).transpose()
    }

    /// Drops row `i`.
    pub fn without(&self, i: usize) -> Self {
        RegressionDataset {
            x: self.x.clone().remove_row(i),
            y: self.y.clone().remove_row(i),
        }
    }

    /// Subtracts column means from `X` and the mean from `y`.
    pub fn centered(&self) -> Self {
        self.centered_like(self)
    }

    /// Subtracts the means of `reference`, e.g. to put a holdout set on the
    /// training data's centering.
    pub fn centered_like(&self, reference: &Self) -> Self {
        let mut x = self.x.clone();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.add_scalar_mut(-reference.x.column(j).mean());
        }
        let y = self.y.add_scalar(-reference.y.mean());
        RegressionDataset { x, y }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    pub sigma_hat: f64,
    pub xtx_inverse: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionInterval {
    pub center: f64,
    pub halfwidth: f64,
    pub alpha: f64,
}

impl PredictionInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.center + self.halfwidth
    }

    pub fn contains(&self, y: f64) -> bool {
        (y - self.center).abs() <= self.halfwidth
    }
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    normal_quantile(1.0 - alpha / 2.0)
}

/// Least squares with `σ̂² = RSS/(n − p)`.
pub fn ols_fit(data: &RegressionDataset) -> Result<OlsFit> {
    let (n, p) = (data.n(), data.p());
    if n <= p {
        return Err(Error::invalid(format!("need n > p, got n = {n}, p = {p}")));
    }
    let xtx = data.x.tr_mul(&data.x);
    let eig = xtx.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > 0.0) || lo <= RANK_TOL * hi {
        return Err(Error::SingularDesign);
    }
    let xtx_inverse = xtx.cholesky().ok_or(Error::SingularDesign)?.inverse();
    let qr = data.x.clone().qr();
    let beta = qr
        .r()
        .solve_upper_triangular(&qr.q().tr_mul(&data.y))
        .ok_or(Error::SingularDesign)?;
    let resid = &data.y - &data.x * &beta;
    let sigma_hat = (resid.norm_squared() / (n - p) as f64).sqrt();
    Ok(OlsFit {
        beta,
        sigma_hat,
        xtx_inverse,
    })
}

/// `x_newᵀβ̂ ± z_{1−α/2} σ̂ √(1 + x_newᵀ(XᵀX)⁻¹x_new)`.
pub fn predict_interval(fit: &OlsFit, x_new: &DVector<f64>, alpha: f64) -> Result<PredictionInterval> {
    if x_new.len() != fit.beta.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.beta.len(),
            got: x_new.len(),
        });
    }
    let z = check_alpha(alpha)?;
    let quad = (x_new.transpose() * &fit.xtx_inverse * x_new)[(0, 0)];
    Ok(PredictionInterval {
        center: fit.beta.dot(x_new),
        halfwidth: z * fit.sigma_hat * (1.0 + quad).sqrt(),
        alpha,
    })
}

fn check_loo_size(data: &RegressionDataset) -> Result<()> {
    if data.n() < data.p() + 2 {
        return Err(Error::invalid(format!(
            "leave-one-out needs n ≥ p + 2, got n = {}, p = {}",
            data.n(),
            data.p()
        )));
    }
    Ok(())
}

/// Share of rows whose response lies in the interval fit on the other rows.
/// Each sub-fit is a fresh least-squares fit.
pub fn loo_coverage(data: &RegressionDataset, alpha: f64) -> Result<LooEstimate> {
    check_loo_size(data)?;
    check_alpha(alpha)?;
    let mut hits = 0;
    for i in 0..data.n() {
        let fit = ols_fit(&data.without(i)).map_err(|e| match e {
            Error::SingularDesign => Error::SingularSubFit(i),
            other => other,
        })?;
        if predict_interval(&fit, &data.row(i), alpha)?.contains(data.y[i]) {
            hits += 1;
        }
    }
    LooEstimate::from_counts(hits, data.n())
}

/// Same as [`loo_coverage`] from one fit, using leverages: the held-out
/// residual is `e_i/(1 − h_i)`, the held-out variance is
/// `(RSS − e_i²/(1 − h_i))/(n − p − 1)` and the held-out quadratic form is
/// `h_i/(1 − h_i)`.
pub fn loo_coverage_fast(data: &RegressionDataset, alpha: f64) -> Result<LooEstimate> {
    check_loo_size(data)?;
    let z = check_alpha(alpha)?;
    let fit = ols_fit(data)?;
    let (n, p) = (data.n(), data.p());
    let resid = &data.y - &data.x * &fit.beta;
    let rss = resid.norm_squared();
    let mut hits = 0;
    for i in 0..n {
        let xi = data.row(i);
        let h = (xi.transpose() * &fit.xtx_inverse * &xi)[(0, 0)];
        let keep = 1.0 - h;
        if keep <= 1e-10 {
            return Err(Error::SingularSubFit(i));
        }
        let e = resid[i];
        let var = ((rss - e * e / keep) / (n - p - 1) as f64).max(0.0);
        if (e / keep).abs() <= z * (var / keep).sqrt() {
            hits += 1;
        }
    }
    LooEstimate::from_counts(hits, n)
}

/// Share of `test` rows inside the intervals of a fit on `train`.
pub fn holdout_coverage(train: &RegressionDataset, test: &RegressionDataset, alpha: f64) -> Result<f64> {
    if test.n() == 0 {
        return Err(Error::EmptySample);
    }
    if test.p() != train.p() {
        return Err(Error::DimensionMismatch {
            expected: train.p(),
            got: test.p(),
        });
    }
    let fit = ols_fit(train)?;
    interval_coverage(&fit, test, alpha)
}

/// Share of rows of `test` inside the intervals of `fit`.
pub fn interval_coverage(fit: &OlsFit, test: &RegressionDataset, alpha: f64) -> Result<f64> {
    let z = check_alpha(alpha)?;
    let centers = &test.x * &fit.beta;
    let mut hits = 0;
    for i in 0..test.n() {
        let xi = test.row(i);
        let quad = (xi.transpose() * &fit.xtx_inverse * &xi)[(0, 0)];
        if (test.y[i] - centers[i]).abs() <= z * fit.sigma_hat * (1.0 + quad).sqrt() {
            hits += 1;
        }
    }
    Ok(hits as f64 / test.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loo::loo_estimate;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn simple(pairs: &[(f64, f64)]) -> RegressionDataset {
        let rows: Vec<Vec<f64>> = pairs.iter().map(|&(x, _)| vec![x]).collect();
        let y: Vec<f64> = pairs.iter().map(|&(_, y)| y).collect();
        RegressionDataset::from_rows(&rows, &y).unwrap()
    }

    fn random(n: usize, p: usize, seed: u64) -> RegressionDataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
        let noise = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let beta = DVector::from_fn(p, |j, _| 1.0 - 0.5 * j as f64);
        let y = &x * beta + noise;
        RegressionDataset::new(x, y).unwrap()
    }

    #[test]
    fn fit_examples() {
        let f = ols_fit(&simple(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])).unwrap();
        assert!((f.beta[0] - 1.0).abs() < 1e-14 && f.sigma_hat.abs() < 1e-12);
        let f = ols_fit(&simple(&[(1.0, 2.0), (2.0, 4.0)])).unwrap();
        assert!((f.beta[0] - 2.0).abs() < 1e-14 && f.sigma_hat.abs() < 1e-12);
        let f = ols_fit(&simple(&[(1.0, 1.0), (1.0, -1.0)])).unwrap();
        assert!(f.beta[0].abs() < 1e-14);
        assert!((f.sigma_hat - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fit_errors() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let d = RegressionDataset::from_rows(&rows, &[1.0, 2.0, 3.0]).unwrap();
        let err = ols_fit(&d).unwrap_err();
        assert_eq!(err.to_string(), "singular design");
        assert!(ols_fit(&simple(&[(1.0, 1.0)])).is_err());
        assert!(RegressionDataset::from_rows(&[vec![1.0]], &[1.0, 2.0]).is_err());
        assert!(RegressionDataset::from_rows(&[vec![f64::NAN]], &[1.0]).is_err());
    }

    #[test]
    fn interval_examples() {
        let fit = ols_fit(&simple(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])).unwrap();
        let pi = predict_interval(&fit, &DVector::from_element(1, 4.0), 0.05).unwrap();
        assert!((pi.center - 4.0).abs() < 1e-12 && pi.halfwidth < 1e-10);

        let fit = ols_fit(&simple(&[(1.0, 1.0), (1.0, -1.0)])).unwrap();
        let pi = predict_interval(&fit, &DVector::from_element(1, 0.0), 0.05).unwrap();
        assert!((pi.halfwidth - 1.959_963_984_540_054 * 2f64.sqrt()).abs() < 1e-12);
        let pi = predict_interval(&fit, &DVector::from_element(1, 1.0), 0.05).unwrap();
        assert!((pi.halfwidth - 1.959_963_984_540_054 * 2f64.sqrt() * 1.5f64.sqrt()).abs() < 1e-12);
        assert!(predict_interval(&fit, &DVector::from_element(1, 1.0), 1.0).is_err());
        assert!(predict_interval(&fit, &DVector::from_element(2, 1.0), 0.05).is_err());
    }

    #[test]
    fn loo_examples() {
        let exact = simple(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0), (4.0, 8.0)]);
        assert_eq!(loo_coverage(&exact, 0.05).unwrap().value, 1.0);
        // Sub-fits: drop (1,1) → β = 4/13, covers; drop (2,2) → β = 1/10,
        // covers; drop (3,0) → exact fit through the origin, misses.
        let d = simple(&[(1.0, 1.0), (2.0, 2.0), (3.0, 0.0)]);
        let est = loo_coverage(&d, 0.05).unwrap();
        assert_eq!(est.hits, 2);
        assert_eq!(loo_coverage_fast(&d, 0.05).unwrap(), est);
        let minimal = random(5, 3, 1);
        let v = loo_coverage(&minimal, 0.1).unwrap();
        assert_eq!(v.n, 5);
        assert!(loo_coverage(&random(4, 3, 1), 0.1).is_err());
    }

    #[test]
    fn singular_sub_fit_is_reported() {
        let rows = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0], vec![0.0, 1.0]];
        let d = RegressionDataset::from_rows(&rows, &[1.0, 2.0, 2.5, 1.0]).unwrap();
        assert!(matches!(loo_coverage(&d, 0.05), Err(Error::SingularSubFit(3))));
        assert!(matches!(loo_coverage_fast(&d, 0.05), Err(Error::SingularSubFit(3))));
    }

    #[test]
    fn holdout_examples() {
        let d = simple(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]);
        assert_eq!(holdout_coverage(&d, &d, 0.05).unwrap(), 1.0);
        let empty = RegressionDataset::new(DMatrix::zeros(0, 1), DVector::zeros(0)).unwrap();
        assert!(holdout_coverage(&d, &empty, 0.05).is_err());
    }

    #[test]
    fn linear_model_holdout_near_nominal() {
        let reps = 500;
        let mut total = 0.0;
        for r in 0..reps {
            let train = random(200, 2, 1000 + r);
            let test = random(200, 2, 50_000 + r);
            total += holdout_coverage(&train, &test, 0.05).unwrap();
        }
        let mean = total / reps as f64;
        assert!((mean - 0.95).abs() <= 0.03, "{mean}");
    }

    #[test]
    fn centering() {
        let d = random(30, 2, 9).centered();
        assert!(d.y().mean().abs() < 1e-12);
        assert!(d.x().column(1).mean().abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn fast_matches_refit(seed in 0u64..1000, n in 4usize..30, p in 1usize..3) {
            let d = random(n.max(p + 2), p, seed);
            prop_assert_eq!(loo_coverage(&d, 0.1).unwrap(), loo_coverage_fast(&d, 0.1).unwrap());
        }

        #[test]
        fn refit_is_loo(seed in 0u64..1000, n in 4usize..20) {
            let d = random(n, 2, seed);
            let rows: Vec<(DVector<f64>, f64)> = (0..n).map(|i| (d.row(i), d.y()[i])).collect();
            let oracle = |c: &(DVector<f64>, f64), rest: &[(DVector<f64>, f64)]| {
                let x = DMatrix::from_fn(rest.len(), 2, |i, j| rest[i].0[j]);
                let y = DVector::from_fn(rest.len(), |i, _| rest[i].1);
                let fit = ols_fit(&RegressionDataset::new(x, y).unwrap()).unwrap();
                predict_interval(&fit, &c.0, 0.05).unwrap().contains(c.1)
            };
            prop_assert_eq!(loo_coverage(&d, 0.05).unwrap(), loo_estimate(&oracle, &rows).unwrap());
        }

        #[test]
        fn width_rotation_invariant(seed in 0u64..1000, angle in 0.0f64..6.3) {
            let d = random(12, 2, seed);
            let rot = DMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()]);
            let rotated = RegressionDataset::new(d.x() * rot.transpose(), d.y().clone()).unwrap();
            let x_new = DVector::from_column_slice(&[0.3, -1.2]);
            let a = predict_interval(&ols_fit(&d).unwrap(), &x_new, 0.05).unwrap();
            let b = predict_interval(&ols_fit(&rotated).unwrap(), &(&rot * &x_new), 0.05).unwrap();
            prop_assert!((a.halfwidth - b.halfwidth).abs() < 1e-9);
            prop_assert!((a.center - b.center).abs() < 1e-9);
        }
    }
}
