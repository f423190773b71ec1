//! Ground-truth integration by probe points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coverage::normal_quantile;
use crate::error::{Error, Result};
use crate::hull::HalfSpaces;

const PRIMES: [u32; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// Randomly shifted Halton points mapped through the normal quantile, so
/// the empirical measure approximates the standard Gaussian. Stored sorted by
/// norm, which lets hull membership skip probes inside the hull's inscribed
/// ball or outside its circumscribed ball.
#[derive(Debug, Clone)]
pub struct GaussianProbes {
    dim: usize,
    coords: Vec<f64>,
    norms: Vec<f64>,
    seed: u64,
}

impl GaussianProbes {
    pub fn new(dim: usize, count: usize, seed: u64) -> Result<Self> {
        if dim == 0 || dim > PRIMES.len() {
            return Err(Error::invalid(format!("Gaussian probes support 1 ≤ d ≤ {}", PRIMES.len())));
        }
        if count == 0 {
            return Err(Error::invalid("probe count must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let mut pts: Vec<(f64, Vec<f64>)> = (1..=count as u64)
            .map(|i| {
                let p: Vec<f64> = (0..dim)
                    .map(|k| {
                        let u = (radical_inverse(i, PRIMES[k] as u64) + shift[k]).fract();
                        let u = u.clamp(1e-15, 1.0 - 1e-15);
                        normal_quantile(u).expect("level clamped into (0, 1)")
                    })
                    .collect();
                (p.iter().map(|x| x * x).sum::<f64>().sqrt(), p)
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let norms = pts.iter().map(|p| p.0).collect();
        let coords = pts.into_iter().flat_map(|p| p.1).collect();
        Ok(GaussianProbes { dim, coords, norms, seed })
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Share of probes inside `region`.
    pub fn mass(&self, region: &HalfSpaces) -> f64 {
        if region.is_degenerate() || region.dim() != self.dim {
            return 0.0;
        }
        let inner = region.inner_radius();
        let outer = region.outer_radius();
        // Shrink the shortcut radii slightly so rounding never misclassifies.
        let sure = self.norms.partition_point(|&r| r < inner * (1.0 - 1e-9));
        let end = self.norms.partition_point(|&r| r <= outer * (1.0 + 1e-9));
        let tested = (sure..end)
            .filter(|&i| region.contains(&self.coords[i * self.dim..(i + 1) * self.dim]))
            .count();
        (sure + tested) as f64 / self.len() as f64
    }

    /// Monte Carlo standard error for a mass estimate `p`.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.len() as f64).sqrt()
    }
}

/// Area of `[0,1]² ∩ ⋃ disks(centres, r)` on a randomly shifted `g × g`
/// grid: the fraction of grid points covered.
#[derive(Debug, Clone, Copy)]
pub struct SquareGrid {
    pub side: usize,
    shift: (f64, f64),
}

impl SquareGrid {
    pub fn new(side: usize, seed: u64) -> Result<Self> {
        if side == 0 {
            return Err(Error::invalid("grid side must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(SquareGrid {
            side,
            shift: (rng.random::<f64>(), rng.random::<f64>()),
        })
    }

    pub fn count(&self) -> usize {
        self.side * self.side
    }

    /// Grid points are `((a + s_x)/g, (b + s_y)/g)` for `a, b ∈ {0, …, g−1}`.
    pub fn covered_fraction(&self, centres: &[(f64, f64)], r: f64) -> f64 {
        let g = self.side;
        let h = 1.0 / g as f64;
        let mut rows: Vec<Vec<(f64, f64)>> = vec![Vec::new(); g];
        for &(cx, cy) in centres {
            let lo = (((cy - r) / h - self.shift.1).ceil().max(0.0)) as usize;
            let hi = ((cy + r) / h - self.shift.1).floor();
            if hi < 0.0 {
                continue;
            }
            let hi = (hi as usize).min(g - 1);
            for (b, row) in rows.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let y = (b as f64 + self.shift.1) * h;
                let half = (r * r - (y - cy) * (y - cy)).max(0.0).sqrt();
                row.push((cx - half, cx + half));
            }
        }
        let mut covered = 0usize;
        for row in rows.iter_mut() {
            if row.is_empty() {
                continue;
            }
            row.sort_by(|a, b| a.0.total_cmp(&b.0));
            // Grid columns a with lo ≤ (a + s_x) h ≤ hi, merged over overlapping intervals.
            let mut next_free = 0i64;
            for &(lo, hi) in row.iter() {
                let first = ((lo / h - self.shift.0).ceil() as i64).max(next_free).max(0);
                let last = ((hi / h - self.shift.0).floor() as i64).min(g as i64 - 1);
                if last >= first {
                    covered += (last - first + 1) as usize;
                    next_free = last + 1;
                }
            }
        }
        covered as f64 / self.count() as f64
    }

    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.count() as f64).sqrt()
    }
}
