//! Leave-one-out estimation with a hand-written membership oracle.
//!
//! The set built from a sample of the real line is the interval between its
//! minimum and maximum; the estimate is the fraction of points lying inside
//! the interval spanned by the others.

use cascade::{cascade_bound, loo_estimate, BoundInputs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cascade::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sample: Vec<f64> = (0..200).map(|_| rng.random()).collect();

    let span = |x: &f64, rest: &[f64]| {
        let lo = rest.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lo <= *x && *x <= hi
    };
    let est = loo_estimate(&span, &sample)?;
    let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("loo estimate {:.4} ({} of {})", est.value, est.hits, est.n);
    println!("true mass    {:.4}", hi - lo);

    // Adding one uniform point moves the interval's mass by about 2/n.
    let n = sample.len();
    let step = 2.0 / n as f64;
    let bound = cascade_bound(&BoundInputs::with_quarter_theta(step, step, n)?)?;
    println!("mse bound    {bound:.5}");
    Ok(())
}
