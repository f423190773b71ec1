//! Samplers for the simulation scenarios.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coincide::SequenceRecord;
use crate::error::{Error, Result};
use crate::hull::PointCloud;

/// Uniform on the axis-aligned box `[0, sides[0]] × … `.
pub fn uniform_box<R: Rng + ?Sized>(sides: &[f64], n: usize, rng: &mut R) -> Result<PointCloud> {
    if sides.is_empty() || sides.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("box sides must be positive"));
    }
    let coords = (0..n).flat_map(|_| sides.iter().map(|&s| s * rng.random::<f64>()).collect::<Vec<_>>()).collect();
    PointCloud::new(coords, sides.len())
}

fn gaussian_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniform on the unit sphere in `R^d`, as a normalized Gaussian vector.
pub fn unit_sphere_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v = gaussian_vec(d, rng);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform on the unit ball in `R^d`.
pub fn uniform_ball<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<PointCloud> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        let r = rng.random::<f64>().powf(1.0 / d as f64);
        coords.extend(unit_sphere_point(d, rng).into_iter().map(|x| r * x));
    }
    PointCloud::new(coords, d)
}

/// Standard Gaussian in `R^d`.
pub fn gaussian<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<PointCloud> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    PointCloud::new((0..n * d).map(|_| StandardNormal.sample(rng)).collect(), d)
}

/// Equicorrelation matrix with off-diagonal `r`.
pub fn equicorrelation(d: usize, r: f64) -> Result<DMatrix<f64>> {
    if d == 0 || !(r > -1.0 / (d.max(2) - 1) as f64 && r < 1.0) {
        return Err(Error::invalid(format!("correlation {r} is not valid in dimension {d}")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { r }))
}

/// Lower Cholesky factor of `sigma`.
pub fn cholesky_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::invalid("covariance is not positive definite"))?
        .l())
}

/// Gaussian with covariance `L Lᵀ` for a lower-triangular factor `L`.
pub fn correlated_gaussian<R: Rng + ?Sized>(chol: &DMatrix<f64>, n: usize, rng: &mut R) -> Result<PointCloud> {
    let d = chol.nrows();
    let z = gaussian(d, n, rng)?;
    let coords = z
        .points()
        .flat_map(|p| (chol * DVector::from_column_slice(p)).iter().copied().collect::<Vec<_>>())
        .collect();
    PointCloud::new(coords, d)
}

/// With probability `1/n` the origin, otherwise uniform on the unit sphere in
/// `R^d`. Rows of the returned `n × d` matrix are the draws.
pub fn origin_sphere_mixture<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        if rng.random::<f64>() >= 1.0 / n as f64 {
            let p = unit_sphere_point(d, rng);
            for (j, v) in p.into_iter().enumerate() {
                x[(i, j)] = v;
            }
        }
    }
    x
}

/// `n` uniform picks (with replacement) from `items`.
pub fn uniform_from<T: Clone, R: Rng + ?Sized>(items: &[T], n: usize, rng: &mut R) -> Result<Vec<T>> {
    if items.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok((0..n).map(|_| items[rng.random_range(0..items.len())].clone()).collect())
}

/// Synthetic aligned DNA with clade structure: a root sequence drawn from
/// `base_freqs` (order A, C, G, T), `clades` centroids mutated from it at
/// `clade_rate`, and each sequence mutated from a random centroid at
/// `leaf_rate`. A mutation is a transition with probability
/// `transition_share`, otherwise a random transversion.
#[derive(Debug, Clone)]
pub struct DnaModel {
    pub length: usize,
    pub base_freqs: [f64; 4],
    pub clades: usize,
    pub clade_rate: f64,
    pub leaf_rate: f64,
    pub transition_share: f64,
}

impl Default for DnaModel {
    fn default() -> Self {
        DnaModel {
            length: 400,
            base_freqs: [0.3, 0.2, 0.2, 0.3],
            clades: 20,
            clade_rate: 0.08,
            leaf_rate: 0.03,
            transition_share: 2.0 / 3.0,
        }
    }
}

const BASES: [u8; 4] = *b"ACGT";

impl DnaModel {
    fn validate(&self) -> Result<()> {
        let total: f64 = self.base_freqs.iter().sum();
        if self.length == 0 || self.clades == 0 {
            return Err(Error::invalid("DNA model needs positive length and clade count"));
        }
        if self.base_freqs.iter().any(|&f| f < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("base frequencies must be nonnegative and sum to 1"));
        }
        for rate in [self.clade_rate, self.leaf_rate, self.transition_share] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::invalid("DNA model rates must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    fn mutate<R: Rng + ?Sized>(&self, seq: &[u8], rate: f64, rng: &mut R) -> Vec<u8> {
        seq.iter()
            .map(|&b| {
                if rng.random::<f64>() >= rate {
                    return b;
                }
                // Codes: A=0, C=1, G=2, T=3; transitions flip bit 1.
                if rng.random::<f64>() < self.transition_share {
                    b ^ 2
                } else {
                    (b ^ 1) ^ if rng.random::<bool>() { 2 } else { 0 }
                }
            })
            .collect()
    }

    pub fn population<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Vec<SequenceRecord>> {
        self.validate()?;
        let root: Vec<u8> = (0..self.length)
            .map(|_| {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for (k, &f) in self.base_freqs.iter().enumerate() {
                    acc += f;
                    if u < acc {
                        return k as u8;
                    }
                }
                3
            })
            .collect();
        let centroids: Vec<Vec<u8>> = (0..self.clades).map(|_| self.mutate(&root, self.clade_rate, rng)).collect();
        (0..size)
            .map(|i| {
                let c = &centroids[rng.random_range(0..self.clades)];
                let seq = self.mutate(c, self.leaf_rate, rng);
                let text: String = seq.iter().map(|&k| BASES[k as usize] as char).collect();
                SequenceRecord::new(format!("seq{i}"), &text, false)
            })
            .collect()
    }
}
