//! Volume of a convex body from a uniform sample, with its interval.

use cascade::hull::{self, estimate_volume, hull_summary, volume_ci};
use cascade::sim::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cascade::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (label, sides) in [("square 2x1", vec![2.0, 1.0]), ("cube 1x1x3", vec![1.0, 1.0, 3.0])] {
        let truth: f64 = sides.iter().product();
        for n in [100, 1000, 5000] {
            let cloud = sampling::uniform_box(&sides, n, &mut rng)?;
            let summary = hull_summary(&cloud);
            let v_hat = estimate_volume(&summary)?;
            let ci = volume_ci(&summary, 0.05)?;
            println!(
                "{label} n={n:<5} V_n={:<4} hull={:.4} v_hat={v_hat:.4} truth={truth} ci=[{:.4}, {:.4}] V_n/n mse bound {:.3}",
                summary.extreme_count,
                summary.volume.unwrap_or(f64::NAN),
                ci.ci_low,
                ci.ci_high,
                hull::conv_mse_bound(n, cloud.dim())?,
            );
        }
    }
    Ok(())
}
