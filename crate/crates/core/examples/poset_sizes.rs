//! Size estimates from partial orders: serial numbers, birthdays, a
//! staircase up-set and a subforest of a tree.

use cascade::poset::{
    birthday_estimate, convex_estimate, tank_estimate, upset_estimate, upset_mse_bound, Antichain, ProductOrder,
    ReversedNaturals, TreeAncestor, TreePath,
};
use cascade::sim::sampling::uniform_from;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cascade::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 40;

    let serials: Vec<u64> = (0..n).map(|_| rng.random_range(1..=1000)).collect();
    let tank = tank_estimate(&serials)?;
    let via_order = upset_estimate(&serials, &ReversedNaturals)?.estimate()?;
    println!("tanks: 1000 built, estimate {tank:.1} (up-set form {via_order:.1})");

    let birthdays: Vec<u32> = (0..n).map(|_| rng.random_range(0..365)).collect();
    let est = birthday_estimate(&birthdays)?;
    let via_order = upset_estimate(&birthdays, &Antichain)?.estimate()?;
    println!("days: 365, estimate {est:.1} (up-set form {via_order:.1})");

    let staircase: Vec<Vec<u64>> = (1..=104u64).flat_map(|a| (1..=104 / a).map(move |b| vec![a, b])).collect();
    let sample = uniform_from(&staircase, 400, &mut rng)?;
    let est = upset_estimate(&sample, &ProductOrder::new(2)?)?;
    println!(
        "staircase: {} cells, estimate {:.1}, relative mse bound {:.4}",
        staircase.len(),
        est.estimate()?,
        upset_mse_bound(400)?
    );

    // A complete binary tree of depth 6; the target is the subtree below 0/1.
    let subtree: Vec<TreePath> = (0..7u32)
        .flat_map(|depth| (0..1u32 << depth).map(move |bits| (0..depth).map(|k| (bits >> k) & 1).collect::<Vec<_>>()))
        .map(|tail| [vec![0, 1], tail].concat())
        .collect();
    let sample = uniform_from(&subtree, 300, &mut rng)?;
    let est = convex_estimate(&sample, &TreeAncestor)?;
    println!(
        "subforest: {} nodes, N_n={}, closure {}, estimate {:.1}",
        subtree.len(),
        est.inner,
        est.closure_size,
        est.estimate()?
    );
    Ok(())
}
