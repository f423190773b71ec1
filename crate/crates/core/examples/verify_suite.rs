//! Runs the default simulation suite and prints the bound report as CSV.

use cascade::sim::{default_suite, render_csv, run_suite, SUITE_REPLICATIONS};

fn main() -> cascade::Result<()> {
    let seed = std::env::args().nth(1).map_or(Ok(42), |s| s.parse()).expect("seed must be an integer");
    let configs = default_suite(seed, SUITE_REPLICATIONS);
    let rows = run_suite(&configs, cascade::sim::default_workers())?;
    print!("{}", render_csv(&rows)?);
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).map(|r| format!("{} n={}", r.scenario, r.n)).collect();
    eprintln!("{} rows, failing: {failed:?}", rows.len());
    Ok(())
}
