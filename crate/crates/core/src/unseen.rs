//! Missing-mass estimation for the unseen species problem.
//!
//! The Good–Turing estimate `T_n / n` (singletons over sample size) is the
//! leave-one-out estimator for the set of unobserved species: a point is in
//! the set built from the others exactly when it is a singleton.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loo::LooEstimate;

/// Finite species distribution `p_1, …, p_N`, used as simulation ground truth.
/// Species are indexed `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SpeciesDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("species distribution needs at least one species"));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(format!("invalid species probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(SpeciesDistribution { probs, cumulative })
    }

    pub fn uniform(species: usize) -> Result<Self> {
        if species == 0 {
            return Err(Error::invalid("uniform distribution over zero species"));
        }
        Self::new(vec![1.0 / species as f64; species])
    }

    /// Zipf law `p_i ∝ 1 / i^s` over `species` labels.
    pub fn zipf(species: usize, exponent: f64) -> Result<Self> {
        if species == 0 || !exponent.is_finite() {
            return Err(Error::invalid("zipf needs ≥ 1 species and a finite exponent"));
        }
        let weights: Vec<f64> = (1..=species).map(|i| (i as f64).powf(-exponent)).collect();
        let z: f64 = weights.iter().sum();
        Self::new(weights.into_iter().map(|w| w / z).collect())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn species(&self) -> usize {
        self.probs.len()
    }

    /// Draws one species label.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.probs.len() - 1)
    }
}

/// Good–Turing estimate of the missing mass: species seen exactly once,
/// divided by the sample size.
pub fn good_turing<L: Hash + Eq>(sample: &[L]) -> Result<LooEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let counts = multiplicities(sample);
    let singletons = counts.values().filter(|&&c| c == 1).count();
    LooEstimate::from_counts(singletons, sample.len())
}

pub(crate) fn multiplicities<L: Hash + Eq>(sample: &[L]) -> HashMap<&L, usize> {
    let mut counts: HashMap<&L, usize> = HashMap::with_capacity(sample.len());
    for label in sample {
        *counts.entry(label).or_insert(0) += 1;
    }
    counts
}

/// Total probability of the species absent from `sample`.
pub fn missing_mass(dist: &SpeciesDistribution, sample: &[usize]) -> Result<f64> {
    let mut seen = vec![false; dist.species()];
    for &label in sample {
        *seen.get_mut(label).ok_or(Error::LabelOutOfRange {
            label,
            species: dist.species(),
        })? = true;
    }
    Ok(dist
        .probs
        .iter()
        .zip(&seen)
        .filter(|(_, &s)| !s)
        .map(|(p, _)| p)
        .sum())
}

/// Distribution-free MSE bounds for the Good–Turing estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnseenBound {
    /// `4/(e(n−1)) + 4(n−1)/(e n (n−2)) + 2/n`
    pub three_term: f64,
    /// `5/(n−2)`
    pub cap: f64,
}

pub fn unseen_bound(n: usize) -> Result<UnseenBound> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    let e = std::f64::consts::E;
    let nf = n as f64;
    let three_term = 4.0 / (e * (nf - 1.0)) + 4.0 * (nf - 1.0) / (e * nf * (nf - 2.0)) + 2.0 / nf;
    let cap = 5.0 / (nf - 2.0);
    debug_assert!(three_term <= cap);
    Ok(UnseenBound { three_term, cap })
}

/// `(8/N + 2/n) e^{−(n−2)/N}`, the bound for a finite number `N` of species.
pub fn unseen_bound_finite(n: usize, species: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    if species == 0 {
        return Err(Error::invalid("number of species must be ≥ 1"));
    }
    let (nf, sf) = (n as f64, species as f64);
    Ok((8.0 / sf + 2.0 / nf) * (-(nf - 2.0) / sf).exp())
}

/// Distribution-specific bound
/// `4Σp²(1−p)^{n−1} + (4(n−1)/n)Σp²(1−p)^{n−2} + (2/n)Σp(1−p)^{n−1}`.
pub fn unseen_bound_general(dist: &SpeciesDistribution, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::SampleTooSmall(n));
    }
    let nf = n as f64;
    let (mut delta1, mut delta2, mut theta) = (0.0, 0.0, 0.0);
    for &p in &dist.probs {
        let q = 1.0 - p;
        let q_n2 = q.powi(n as i32 - 2);
        let q_n1 = q_n2 * q;
        delta1 += p * p * q_n1;
        delta2 += p * p * q_n2;
        theta += p * q_n1;
    }
    Ok(4.0 * delta1 + 4.0 * (nf - 1.0) / nf * delta2 + 2.0 / nf * theta)
}
