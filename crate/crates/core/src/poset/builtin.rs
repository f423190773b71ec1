use std::collections::HashSet;
use std::hash::Hash;

use super::PartialOrder;
use crate::error::{Error, Result};

/// Largest bounding box `ProductOrder` will enumerate.
const MAX_BOX_CELLS: u128 = 50_000_000;

/// Trivial order: `x ⪯ y` iff `x = y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Antichain;

impl<T: Hash + Eq> PartialOrder<T> for Antichain {
    fn leq(&self, a: &T, b: &T) -> bool {
        a == b
    }

    fn upset_closure_size(&self, sample: &[T]) -> Result<usize> {
        Ok(sample.iter().collect::<HashSet<_>>().len())
    }

    fn convex_closure_size(&self, sample: &[T]) -> Result<usize> {
        self.upset_closure_size(sample)
    }
}

/// The positive integers ordered downwards: `x ⪯ y` iff `y ≤ x`.
///
/// The up-set of a sample is `{1, …, max}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReversedNaturals;

fn check_positive(sample: &[u64]) -> Result<()> {
    if sample.contains(&0) {
        return Err(Error::invalid("elements must be positive integers"));
    }
    Ok(())
}

impl PartialOrder<u64> for ReversedNaturals {
    fn leq(&self, a: &u64, b: &u64) -> bool {
        b <= a
    }

    fn upset_closure_size(&self, sample: &[u64]) -> Result<usize> {
        check_positive(sample)?;
        Ok(sample.iter().copied().max().unwrap_or(0) as usize)
    }

    fn convex_closure_size(&self, sample: &[u64]) -> Result<usize> {
        check_positive(sample)?;
        match (sample.iter().min(), sample.iter().max()) {
            (Some(lo), Some(hi)) => Ok((hi - lo + 1) as usize),
            _ => Ok(0),
        }
    }
}

/// Positive integer tuples of length `dim` with the opposite componentwise
/// order: `x ⪯ y` iff `y_k ≤ x_k` for every `k`.
#[derive(Debug, Clone, Copy)]
pub struct ProductOrder {
    pub dim: usize,
}

impl ProductOrder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("product order needs dim ≥ 1"));
        }
        Ok(ProductOrder { dim })
    }

    fn check(&self, sample: &[Vec<u64>]) -> Result<()> {
        for x in sample {
            if x.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: x.len(),
                });
            }
            check_positive(x)?;
        }
        Ok(())
    }

    /// Counts cells of the box `[lo, hi]` accepted by `keep`.
    fn count_box(&self, lo: &[u64], hi: &[u64], keep: impl Fn(&[u64]) -> bool) -> Result<usize> {
        let cells: u128 = lo.iter().zip(hi).map(|(l, h)| (h - l + 1) as u128).product();
        if cells > MAX_BOX_CELLS {
            return Err(Error::NotEnumerable);
        }
        let mut z = lo.to_vec();
        let mut count = 0;
        loop {
            if keep(&z) {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == self.dim {
                    return Ok(count);
                }
                if z[k] < hi[k] {
                    z[k] += 1;
                    break;
                }
                z[k] = lo[k];
                k += 1;
            }
        }
    }
}

fn below(z: &[u64], x: &[u64]) -> bool {
    z.iter().zip(x).all(|(a, b)| a <= b)
}

impl PartialOrder<Vec<u64>> for ProductOrder {
    fn leq(&self, a: &Vec<u64>, b: &Vec<u64>) -> bool {
        below(b, a)
    }

    fn upset_closure_size(&self, sample: &[Vec<u64>]) -> Result<usize> {
        self.check(sample)?;
        if sample.is_empty() {
            return Ok(0);
        }
        if self.dim == 2 {
            // Staircase area: sweep x downwards, tracking the tallest column.
            let mut pts: Vec<(u64, u64)> = sample.iter().map(|p| (p[0], p[1])).collect();
            pts.sort_unstable_by(|a, b| b.cmp(a));
            let mut area = 0u64;
            let mut height = 0u64;
            for (k, &(x, y)) in pts.iter().enumerate() {
                height = height.max(y);
                let next = pts.get(k + 1).map_or(0, |p| p.0);
                area += (x - next) * height;
            }
            return Ok(area as usize);
        }
        let lo = vec![1; self.dim];
        let hi: Vec<u64> = (0..self.dim)
            .map(|k| sample.iter().map(|p| p[k]).max().unwrap_or(1))
            .collect();
        self.count_box(&lo, &hi, |z| sample.iter().any(|x| below(z, x)))
    }

    fn convex_closure_size(&self, sample: &[Vec<u64>]) -> Result<usize> {
        self.check(sample)?;
        if sample.is_empty() {
            return Ok(0);
        }
        let lo: Vec<u64> = (0..self.dim)
            .map(|k| sample.iter().map(|p| p[k]).min().unwrap_or(1))
            .collect();
        let hi: Vec<u64> = (0..self.dim)
            .map(|k| sample.iter().map(|p| p[k]).max().unwrap_or(1))
            .collect();
        self.count_box(&lo, &hi, |z| {
            sample.iter().any(|x| below(z, x)) && sample.iter().any(|w| below(w, z))
        })
    }
}

/// A node of the infinite rooted tree, as child indices from the root.
pub type TreePath = Vec<u32>;

/// `x ⪯ y` iff `y` is `x` or an ancestor of `x` (a prefix of its path).
///
/// Up-sets are subtrees containing the root; convex sets are subforests.
#[derive(Debug, Clone, Copy, Default)]
pub struct TreeAncestor;

impl PartialOrder<TreePath> for TreeAncestor {
    fn leq(&self, a: &TreePath, b: &TreePath) -> bool {
        a.starts_with(b)
    }

    fn upset_closure_size(&self, sample: &[TreePath]) -> Result<usize> {
        let mut seen: HashSet<&[u32]> = HashSet::new();
        for x in sample {
            for len in 0..=x.len() {
                seen.insert(&x[..len]);
            }
        }
        Ok(seen.len())
    }

    fn convex_closure_size(&self, sample: &[TreePath]) -> Result<usize> {
        let members: HashSet<&[u32]> = sample.iter().map(|x| x.as_slice()).collect();
        let mut seen: HashSet<&[u32]> = HashSet::new();
        for x in sample {
            // Everything between x and its highest sampled ancestor.
            let top = (0..=x.len())
                .find(|&len| members.contains(&x[..len]))
                .unwrap_or(x.len());
            for len in top..=x.len() {
                seen.insert(&x[..len]);
            }
        }
        Ok(seen.len())
    }
}

/// Any order restricted to an explicit finite ground set; closures are
/// counted by scanning the ground set.
#[derive(Debug, Clone)]
pub struct FiniteGround<O, T> {
    pub order: O,
    pub ground: Vec<T>,
}

impl<O, T> FiniteGround<O, T> {
    pub fn new(order: O, ground: Vec<T>) -> Self {
        FiniteGround { order, ground }
    }
}

impl<O: PartialOrder<T>, T> PartialOrder<T> for FiniteGround<O, T> {
    fn leq(&self, a: &T, b: &T) -> bool {
        self.order.leq(a, b)
    }

    fn upset_closure_size(&self, sample: &[T]) -> Result<usize> {
        Ok(self
            .ground
            .iter()
            .filter(|g| sample.iter().any(|x| self.order.leq(x, g)))
            .count())
    }

    fn convex_closure_size(&self, sample: &[T]) -> Result<usize> {
        Ok(self
            .ground
            .iter()
            .filter(|g| {
                sample.iter().any(|x| self.order.leq(x, g)) && sample.iter().any(|x| self.order.leq(g, x))
            })
            .count())
    }
}
