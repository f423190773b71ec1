//! Good–Turing estimate of the unseen mass on a Zipf population.

use cascade::unseen::{good_turing, missing_mass, unseen_bound, unseen_bound_general, SpeciesDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cascade::Result<()> {
    let dist = SpeciesDistribution::zipf(500, 1.1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "n", "estimate", "truth", "bound", "cap");
    for n in [50, 200, 1000, 5000] {
        let sample: Vec<usize> = (0..n).map(|_| dist.draw(&mut rng)).collect();
        let est = good_turing(&sample)?;
        let truth = missing_mass(&dist, &sample)?;
        let general = unseen_bound_general(&dist, n)?;
        let cap = unseen_bound(n)?.cap;
        println!("{n:>6} {:>10.4} {truth:>10.4} {general:>10.5} {cap:>10.5}", est.value);
    }
    Ok(())
}
