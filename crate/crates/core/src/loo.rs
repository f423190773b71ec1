//! Generic leave-one-out estimation over symmetric set-valued maps.
//!
//! A set-valued map `A` sends a sample to a subset of the sample space. The
//! estimator here counts how many sample points land in the set built from
//! the *other* points, which (under i.i.d. sampling and symmetry of the map)
//! tracks the measure of the set built from the full sample. Every estimator
//! in this crate is an instance of [`loo_estimate`] with a specific oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Membership test for a symmetric set-valued map.
///
/// `contains(x, rest)` answers "is `x` in `A(rest)`?". The answer must not
/// depend on the order of `rest`; [`loo_estimate`] hands the oracle the
/// sample with the held-out point already removed, in an unspecified order.
pub trait MembershipOracle<T> {
    fn contains(&self, candidate: &T, rest: &[T]) -> bool;
}

impl<T, F> MembershipOracle<T> for F
where
    F: Fn(&T, &[T]) -> bool,
{
    fn contains(&self, candidate: &T, rest: &[T]) -> bool {
        self(candidate, rest)
    }
}

/// Fraction of sample points that belong to the set built from the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LooEstimate {
    pub value: f64,
    pub n: usize,
    pub hits: usize,
}

impl LooEstimate {
    pub fn from_counts(hits: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if hits > n {
            return Err(Error::invalid(format!("hits {hits} exceed n {n}")));
        }
        Ok(LooEstimate {
            value: hits as f64 / n as f64,
            n,
            hits,
        })
    }
}

/// Computes `(1/n) #{i : sample[i] ∈ A(sample without i)}`.
///
/// A single exclusion buffer is reused: after testing index `i`, the slot
/// holding `sample[i + 1]` is overwritten with `sample[i]`, so the buffer
/// always holds the sample minus the next held-out point.
pub fn loo_estimate<T, O>(oracle: &O, sample: &[T]) -> Result<LooEstimate>
where
    T: Clone,
    O: MembershipOracle<T> + ?Sized,
{
    let n = sample.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rest: Vec<T> = sample[1..].to_vec();
    let mut hits = 0;
    for i in 0..n {
        if oracle.contains(&sample[i], &rest) {
            hits += 1;
        }
        if i + 1 < n {
            rest[i] = sample[i].clone();
        }
    }
    LooEstimate::from_counts(hits, n)
}

/// Parallel variant of [`loo_estimate`]; the result does not depend on the
/// thread count.
pub fn loo_estimate_par<T, O>(oracle: &O, sample: &[T]) -> Result<LooEstimate>
where
    T: Clone + Send + Sync,
    O: MembershipOracle<T> + Sync + ?Sized,
{
    let n = sample.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let hits = (0..n)
        .into_par_iter()
        .filter(|&i| {
            let rest: Vec<T> = sample[..i]
                .iter()
                .chain(&sample[i + 1..])
                .cloned()
                .collect();
            oracle.contains(&sample[i], &rest)
        })
        .count();
    LooEstimate::from_counts(hits, n)
}

/// Inputs of the cascading-exclusion MSE bound.
///
/// `theta` is the expected Bernoulli variance of membership in the
/// `(n-1)`-point set; `delta_prime` and `delta_double_prime` are the expected
/// measures of the symmetric differences between the n- and (n-1)-point sets
/// and between the (n-1)- and (n-2)-point sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub theta: f64,
    pub delta_prime: f64,
    pub delta_double_prime: f64,
    pub n: usize,
}

impl BoundInputs {
    pub fn new(theta: f64, delta_prime: f64, delta_double_prime: f64, n: usize) -> Result<Self> {
        let b = BoundInputs {
            theta,
            delta_prime,
            delta_double_prime,
            n,
        };
        b.validate()?;
        Ok(b)
    }

    /// Inputs with the universal `theta ≤ 1/4` bound.
    pub fn with_quarter_theta(delta_prime: f64, delta_double_prime: f64, n: usize) -> Result<Self> {
        Self::new(0.25, delta_prime, delta_double_prime, n)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::SampleTooSmall(self.n));
        }
        if !(self.theta.is_finite() && (0.0..=0.25).contains(&self.theta)) {
            return Err(Error::invalid(format!(
                "theta must lie in [0, 1/4], got {}",
                self.theta
            )));
        }
        for (name, v) in [
            ("delta_prime", self.delta_prime),
            ("delta_double_prime", self.delta_double_prime),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// `4δ′ + 4(n−1)δ″/n + 2θ/n`, the bound on the mean squared error between the
/// leave-one-out estimate and the measure of the full-sample set.
pub fn cascade_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    let n = b.n as f64;
    Ok(4.0 * b.delta_prime + 4.0 * (n - 1.0) * b.delta_double_prime / n + 2.0 * b.theta / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn equals_some(x: &char, rest: &[char]) -> bool {
        rest.contains(x)
    }

    #[test]
    fn duplicates_are_members() {
        let est = loo_estimate(&equals_some, &['a', 'b', 'a', 'c']).unwrap();
        assert_eq!(est.hits, 2);
        assert_eq!(est.value, 0.5);
    }

    #[test]
    fn always_member_gives_one() {
        let always = |_: &u32, _: &[u32]| true;
        let est = loo_estimate(&always, &[4, 8, 15, 16, 23, 42]).unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn dominated_on_a_chain() {
        // 3 < 7 and 2 < {3, 7}; 7 is dominated by nothing.
        let dominated = |x: &u32, rest: &[u32]| rest.iter().any(|y| x <= y);
        let est = loo_estimate(&dominated, &[3, 7, 2]).unwrap();
        assert_eq!(est.hits, 2);
        assert!((est.value - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_sample_is_an_error() {
        let r = loo_estimate(&equals_some, &[]);
        assert!(matches!(r, Err(Error::EmptySample)));
        assert_eq!(Error::EmptySample.to_string(), "empty sample");
    }

    #[test]
    fn bound_examples() {
        let b = |t, d1, d2, n| cascade_bound(&BoundInputs::new(t, d1, d2, n).unwrap()).unwrap();
        assert_eq!(b(0.0, 0.0, 0.0, 10), 0.0);
        assert!((b(0.25, 0.0, 0.0, 10) - 0.05).abs() < 1e-15);
        // 4(0.1) + 4·9·(1/9)/10 + 2(0.25)/10
        assert!((b(0.25, 0.1, 1.0 / 9.0, 10) - 0.85).abs() < 1e-12);
    }

    #[test]
    fn bound_rejects_small_n() {
        let err = BoundInputs::new(0.25, 0.0, 0.0, 2).unwrap_err();
        assert!(err.to_string().contains("theorem requires n ≥ 3"));
        assert!(BoundInputs::new(0.3, 0.0, 0.0, 5).is_err());
        assert!(BoundInputs::new(0.1, -1.0, 0.0, 5).is_err());
        assert!(BoundInputs::new(0.1, 0.0, f64::NAN, 5).is_err());
    }

    fn brute_force(sample: &[u8], oracle: impl Fn(&u8, &[u8]) -> bool) -> usize {
        (0..sample.len())
            .filter(|&i| {
                let mut rest = sample.to_vec();
                rest.remove(i);
                oracle(&sample[i], &rest)
            })
            .count()
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut s in proptest::collection::vec(0u8..5, 1..12), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let oracle = |x: &u8, rest: &[u8]| rest.iter().filter(|&&y| y <= *x).count() >= 2;
            let a = loo_estimate(&oracle, &s).unwrap();
            s.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = loo_estimate(&oracle, &s).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn matches_explicit_exclusion(s in proptest::collection::vec(0u8..5, 1..=6)) {
            let oracle = |x: &u8, rest: &[u8]| rest.iter().any(|&y| y == x + 1 || y == *x);
            let est = loo_estimate(&oracle, &s).unwrap();
            prop_assert_eq!(est.hits, brute_force(&s, oracle));
            prop_assert!((0.0..=1.0).contains(&est.value));
            prop_assert_eq!(est, loo_estimate_par(&oracle, &s).unwrap());
        }

        #[test]
        fn bound_nonnegative(t in 0.0f64..=0.25, d1 in 0.0f64..1.0, d2 in 0.0f64..1.0, n in 3usize..10_000) {
            prop_assert!(cascade_bound(&BoundInputs::new(t, d1, d2, n).unwrap()).unwrap() >= 0.0);
        }
    }
}
