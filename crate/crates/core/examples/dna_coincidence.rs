//! Nearest-neighbour coincidence test on synthetic DNA.
//!
//! A query copied from the corpus with a handful of mutations is far closer
//! to its source than typical corpus neighbours are to each other.

use cascade::coincide::{
    coincidence_mse_bound, coverage_fraction_nn, flagged_pairs, kimura2p, kimura_matrix, nn_loo_distances,
    nn_test_pvalue, percentile, SequenceRecord,
};
use cascade::sim::sampling::DnaModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cascade::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = DnaModel::default();
    let corpus = model.population(150, &mut rng)?;
    let d = kimura_matrix(&corpus)?;
    let nn = nn_loo_distances(&d)?;

    let mut bases: Vec<u8> = corpus[17].bases().bytes().collect();
    for pos in [10, 90, 200] {
        bases[pos] = if bases[pos] == b'A' { b'G' } else { b'A' };
    }
    let query = SequenceRecord::new("query", std::str::from_utf8(&bases).unwrap(), false)?;
    let q_nn = corpus
        .iter()
        .map(|s| kimura2p(&query, s))
        .collect::<cascade::Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let median = percentile(&nn.values, 50.0)?;
    println!("corpus n={} median nn distance {median:.4}", corpus.len());
    println!("query nn distance {q_nn:.4}, p-value {:.4}", nn_test_pvalue(&nn, q_nn)?);
    for r in [0.005, 0.02, median] {
        println!("W_n(r)/n at r={r:.4}: {:.3}", coverage_fraction_nn(&nn, r)?.value);
    }
    println!("mse bound {:.4}", coincidence_mse_bound(corpus.len())?);
    let (threshold, pairs) = flagged_pairs(&d, 1.0)?;
    println!("{} pairs below the 1st percentile ({threshold:.4})", pairs.len());
    Ok(())
}
