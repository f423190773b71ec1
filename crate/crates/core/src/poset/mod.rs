//! Size estimation for up-sets and convex subsets of a partially ordered set.
//!
//! With `x ⪯ y` an abstract partial order, the up-set generated by a sample
//! is everything above some sample point and its convex hull is everything
//! sandwiched between two sample points. The share of sample points that are
//! above (resp. sandwiched by) *other* sample points estimates the mass of
//! that set, and dividing the closure size by that share estimates the size
//! of a finite up-set (resp. convex set) sampled uniformly.

mod builtin;

pub use builtin::{Antichain, FiniteGround, ProductOrder, ReversedNaturals, TreeAncestor, TreePath};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partial order `⪯` over an opaque element type.
///
/// Closure sizes are optional: orders over infinite ground sets implement
/// them only where the closure of a finite sample is finite and countable.
pub trait PartialOrder<T> {
    fn leq(&self, a: &T, b: &T) -> bool;

    /// `|↑sample|`, the number of elements above some sample point.
    fn upset_closure_size(&self, _sample: &[T]) -> Result<usize> {
        Err(Error::NotEnumerable)
    }

    /// `|conv(sample)|`, the number of elements sandwiched between two sample
    /// points.
    fn convex_closure_size(&self, _sample: &[T]) -> Result<usize> {
        Err(Error::NotEnumerable)
    }
}

/// `N_n = #{i : sample[j] ⪯ sample[i] for some j ≠ i}`.
pub fn upset_dominated_count<T, O: PartialOrder<T> + ?Sized>(sample: &[T], order: &O) -> usize {
    (0..sample.len())
        .filter(|&i| {
            sample
                .iter()
                .enumerate()
                .any(|(j, y)| j != i && order.leq(y, &sample[i]))
        })
        .count()
}

/// `N_n = #{i : sample[j] ⪯ sample[i] ⪯ sample[k] for some j, k ≠ i}`.
///
/// `j` and `k` are chosen independently, so `j = k` is allowed exactly when
/// both relations hold for that index (an equal duplicate).
pub fn convex_sandwiched_count<T, O: PartialOrder<T> + ?Sized>(sample: &[T], order: &O) -> usize {
    (0..sample.len())
        .filter(|&i| {
            let x = &sample[i];
            let others = || sample.iter().enumerate().filter(move |&(j, _)| j != i).map(|(_, y)| y);
            others().any(|y| order.leq(y, x)) && others().any(|z| order.leq(x, z))
        })
        .count()
}

/// Counts behind a size estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeEstimate {
    pub n: usize,
    /// Sample points inside the set built from the others (`N_n`).
    pub inner: usize,
    pub closure_size: usize,
    /// `n · closure_size / N_n`, undefined when `N_n = 0`.
    pub size_estimate: Option<f64>,
}

impl SizeEstimate {
    fn new(n: usize, inner: usize, closure_size: usize) -> Self {
        let size_estimate = (inner > 0).then(|| n as f64 * closure_size as f64 / inner as f64);
        SizeEstimate {
            n,
            inner,
            closure_size,
            size_estimate,
        }
    }

    pub fn estimate(&self) -> Result<f64> {
        self.size_estimate.ok_or(Error::NoDominatedPoints)
    }
}

pub fn upset_estimate<T, O: PartialOrder<T> + ?Sized>(sample: &[T], order: &O) -> Result<SizeEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let inner = upset_dominated_count(sample, order);
    let closure = order.upset_closure_size(sample)?;
    Ok(SizeEstimate::new(sample.len(), inner, closure))
}

/// `n |↑sample| / N_n`.
pub fn estimate_upset_size<T, O: PartialOrder<T> + ?Sized>(sample: &[T], order: &O) -> Result<f64> {
    upset_estimate(sample, order)?.estimate()
}

pub fn convex_estimate<T, O: PartialOrder<T> + ?Sized>(sample: &[T], order: &O) -> Result<SizeEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let inner = convex_sandwiched_count(sample, order);
    let closure = order.convex_closure_size(sample)?;
    Ok(SizeEstimate::new(sample.len(), inner, closure))
}

/// `n |conv(sample)| / N_n`.
pub fn estimate_convex_size<T, O: PartialOrder<T> + ?Sized>(sample: &[T], order: &O) -> Result<f64> {
    convex_estimate(sample, order)?.estimate()
}

/// `(8/e + 1/2)/n`, the MSE bound for `N_n/n` against the up-set mass.
pub fn upset_mse_bound(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    Ok((8.0 / std::f64::consts::E + 0.5) / n as f64)
}

/// `(16/e + 1/2)/n`, the MSE bound for the sandwiched share against the
/// convex-hull mass.
pub fn poset_convex_mse_bound(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    Ok((16.0 / std::f64::consts::E + 0.5) / n as f64)
}

/// Inverse-birthday estimate: `n · distinct / (points that are not
/// singletons)`. Equal to the up-set estimator under the trivial order.
pub fn birthday_estimate<T: std::hash::Hash + Eq>(sample: &[T]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let counts = crate::unseen::multiplicities(sample);
    let repeated: usize = counts.values().filter(|&&c| c > 1).sum();
    if repeated == 0 {
        return Err(Error::NoDominatedPoints);
    }
    Ok(sample.len() as f64 * counts.len() as f64 / repeated as f64)
}

/// Serial-number estimate: `n/(n−1) · max` when the maximum is unique and
/// `max` otherwise. Equal to the up-set estimator under the reversed order
/// on the naturals.
pub fn tank_estimate(sample: &[u64]) -> Result<f64> {
    let max = *sample.iter().max().ok_or(Error::EmptySample)?;
    let ties = sample.iter().filter(|&&x| x == max).count();
    let n = sample.len() as f64;
    if ties == 1 {
        if sample.len() == 1 {
            return Err(Error::NoDominatedPoints);
        }
        Ok(n * max as f64 / (n - 1.0))
    } else {
        Ok(max as f64)
    }
}
