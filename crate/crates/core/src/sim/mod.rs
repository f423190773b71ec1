//! Seeded Monte Carlo runner that checks each estimator's error bound.
//!
//! Replication `k` at sample size `n` draws from its own generator, seeded by
//! [`child_seed`] from the run seed, a scenario tag and `(n, k)`. Results are
//! collected in replication order before any summation, so reports do not
//! depend on how many worker threads ran them.

mod probes;
mod report;
pub mod sampling;
mod scenarios;

pub use probes::{GaussianProbes, SquareGrid};
pub use report::{emit_plot_data, emit_report, parse_csv_report, render_csv, render_json, ReportFormat};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    UnseenUniform,
    UnseenZipf,
    HullRect,
    HullDisk,
    HullGauss,
    HullGaussCorr,
    UpsetChain,
    UpsetAntichain,
    UpsetStaircase,
    PosetConvexInterval,
    PosetConvexForest,
    CoincideUniformSquare,
    DnaSplit,
    CoverageLinear,
    CoverageQuadraticMisspec,
    AldousDemo,
}

impl Scenario {
    pub const ALL: [Scenario; 16] = [
        Scenario::UnseenUniform,
        Scenario::UnseenZipf,
        Scenario::HullRect,
        Scenario::HullDisk,
        Scenario::HullGauss,
        Scenario::HullGaussCorr,
        Scenario::UpsetChain,
        Scenario::UpsetAntichain,
        Scenario::UpsetStaircase,
        Scenario::PosetConvexInterval,
        Scenario::PosetConvexForest,
        Scenario::CoincideUniformSquare,
        Scenario::DnaSplit,
        Scenario::CoverageLinear,
        Scenario::CoverageQuadraticMisspec,
        Scenario::AldousDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::UnseenUniform => "unseen_uniform",
            Scenario::UnseenZipf => "unseen_zipf",
            Scenario::HullRect => "hull_rect",
            Scenario::HullDisk => "hull_disk",
            Scenario::HullGauss => "hull_gauss",
            Scenario::HullGaussCorr => "hull_gauss_corr",
            Scenario::UpsetChain => "upset_chain",
            Scenario::UpsetAntichain => "upset_antichain",
            Scenario::UpsetStaircase => "upset_staircase",
            Scenario::PosetConvexInterval => "poset_convex_interval",
            Scenario::PosetConvexForest => "poset_convex_forest",
            Scenario::CoincideUniformSquare => "coincide_uniform_square",
            Scenario::DnaSplit => "dna_split",
            Scenario::CoverageLinear => "coverage_linear",
            Scenario::CoverageQuadraticMisspec => "coverage_quadratic_misspec",
            Scenario::AldousDemo => "aldous_demo",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// One experiment: a scenario, the sample sizes to run, replications per
/// size, the run seed and scenario-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl ScenarioConfig {
    /// Default grid, replications and parameters for `scenario`.
    pub fn default_for(scenario: Scenario, seed: u64) -> Self {
        use serde_json::json;
        let (n_grid, replications, params) = match scenario {
            Scenario::UnseenUniform => (vec![10, 50, 200], 2000, json!({"species": 100})),
            Scenario::UnseenZipf => (vec![10, 50, 200], 2000, json!({"species": 100, "exponent": 1.0})),
            Scenario::HullRect => (vec![20, 50, 100, 200], 1000, json!({"d": [2, 3]})),
            Scenario::HullDisk | Scenario::HullGauss => (vec![20, 50, 100, 200], 1000, json!({"d": [2, 3]})),
            Scenario::HullGaussCorr => (vec![20, 50, 100, 200], 1000, json!({"d": [2, 3], "r": 0.8})),
            Scenario::UpsetChain => (vec![30, 100], 2000, json!({"k": 1000})),
            Scenario::UpsetAntichain => (vec![30, 100], 2000, json!({"k": 100})),
            Scenario::UpsetStaircase => (vec![30, 100], 2000, json!({"c": 104})),
            Scenario::PosetConvexInterval => (vec![30, 100], 2000, json!({"k": 1000})),
            Scenario::PosetConvexForest => (vec![30, 100], 2000, json!({"nodes": 200, "components": 4})),
            Scenario::CoincideUniformSquare => {
                (vec![30, 100], 1000, json!({"r": [0.05, 0.1, 0.2], "grid_side": 317}))
            }
            Scenario::DnaSplit => (
                vec![200],
                500,
                json!({"length": 400, "base_freqs": [0.3, 0.2, 0.2, 0.3], "sample_size": 40, "null_population": 1000}),
            ),
            Scenario::CoverageLinear => (vec![50, 100, 200, 400], 500, json!({"alpha": 0.05, "holdout": 2000})),
            Scenario::CoverageQuadraticMisspec => (
                vec![50, 100, 200, 400],
                500,
                json!({"alpha": 0.05, "holdout": 2000, "x_scale": 2.0}),
            ),
            Scenario::AldousDemo => (vec![200], 2000, json!({"sphere_probes": 200})),
        };
        let params = match params {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        ScenarioConfig {
            scenario,
            n_grid,
            replications,
            seed,
            params,
        }
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_n_grid(mut self, n_grid: Vec<usize>) -> Self {
        self.n_grid = n_grid;
        self
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replications must be ≥ 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid is empty"));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 3) {
            return Err(Error::SampleTooSmall(n));
        }
        Ok(())
    }

    fn params(&self) -> Params<'_> {
        Params(&self.params)
    }
}

struct Params<'a>(&'a Map<String, Value>);

impl Params<'_> {
    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::invalid(format!("parameter {key} must be a number"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::invalid(format!("parameter {key} must be a nonnegative integer"))),
        }
    }

    /// A number or a list of numbers.
    fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| Error::invalid(format!("parameter {key} must hold numbers"))))
                .collect(),
            Some(v) => Ok(vec![v
                .as_f64()
                .ok_or_else(|| Error::invalid(format!("parameter {key} must be a number or list")))?]),
        }
    }

    fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let vals = self.f64_list(key, &default.iter().map(|&x| x as f64).collect::<Vec<_>>())?;
        vals.into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::invalid(format!("parameter {key} must hold integers")))
                }
            })
            .collect()
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }
}

/// One line of a bound report.
///
/// `pass` is `empirical_mse ≤ bound` together with any scenario-specific
/// checks, whose inputs are listed in `extras`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReportRow {
    pub scenario: String,
    pub n: usize,
    pub replications: usize,
    pub empirical_mse: f64,
    pub std_err: f64,
    pub bound: f64,
    pub pass: bool,
    pub extras: Map<String, Value>,
}

impl BoundReportRow {
    pub fn extra_f64(&self, key: &str) -> Option<f64> {
        self.extras.get(key).and_then(Value::as_f64)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `mix(mix(mix(mix(seed) ⊕ fnv1a(tag)) ⊕ n) ⊕ k)` with SplitMix64's
/// finalizer as `mix` and 64-bit FNV-1a over the tag's UTF-8 bytes.
pub fn child_seed(seed: u64, tag: &str, n: u64, k: u64) -> u64 {
    mix64(mix64(mix64(mix64(seed) ^ fnv1a(tag)) ^ n) ^ k)
}

pub(crate) fn child_rng(seed: u64, tag: &str, n: u64, k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(seed, tag, n, k))
}

/// Runs `f` for replications `0..reps`, in parallel, returning results in
/// replication order.
pub(crate) fn replicate<T, F>(seed: u64, tag: &str, n: usize, reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|k| f(&mut child_rng(seed, tag, n as u64, k as u64)))
        .collect()
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let r = values.len();
    if r == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / r as f64;
    if r == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
    (mean, (var / r as f64).sqrt())
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    cfg.validate()?;
    scenarios::run(cfg)
}

/// Runs `configs` on a pool of `workers` threads.
pub fn run_suite(configs: &[ScenarioConfig], workers: usize) -> Result<Vec<BoundReportRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut rows = Vec::new();
        for cfg in configs {
            rows.extend(run_scenario(cfg)?);
        }
        Ok(rows)
    })
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Replications per scenario in the default suite run by `verify --all`.
pub const SUITE_REPLICATIONS: usize = 200;

/// Every scenario with its default grid and parameters, at `replications`
/// replications each.
pub fn default_suite(seed: u64, replications: usize) -> Vec<ScenarioConfig> {
    Scenario::ALL
        .into_iter()
        .map(|s| ScenarioConfig::default_for(s, seed).with_replications(replications))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        assert!(matches!("hull_cube".parse::<Scenario>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn child_seeds_are_distinct_and_stable() {
        let a = child_seed(42, "hull_rect/d=2", 100, 0);
        assert_eq!(a, child_seed(42, "hull_rect/d=2", 100, 0));
        assert_ne!(a, child_seed(42, "hull_rect/d=2", 100, 1));
        assert_ne!(a, child_seed(42, "hull_rect/d=3", 100, 0));
        assert_ne!(a, child_seed(43, "hull_rect/d=2", 100, 0));
        assert_ne!(a, child_seed(42, "hull_rect/d=2", 101, 0));
        assert_eq!(fnv1a(""), FNV_OFFSET);
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn config_validation_and_json() {
        let cfg = ScenarioConfig::default_for(Scenario::HullRect, 7);
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&text).unwrap(), cfg);
        assert!(cfg.clone().with_replications(0).validate().is_err());
        assert!(cfg.clone().with_n_grid(vec![2]).validate().is_err());
        let minimal: ScenarioConfig =
            serde_json::from_str(r#"{"scenario":"unseen_uniform","n_grid":[10],"replications":5,"seed":1}"#).unwrap();
        assert!(minimal.params.is_empty());
    }

    #[test]
    fn mean_and_standard_error() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn every_scenario_runs_small() {
        for s in Scenario::ALL {
            let mut cfg = ScenarioConfig::default_for(s, 3).with_replications(3);
            cfg.n_grid.truncate(1);
            if s == Scenario::DnaSplit {
                cfg = cfg
                    .with_n_grid(vec![60])
                    .with_param("null_population", serde_json::json!(120))
                    .with_param("sample_size", serde_json::json!(10));
            }
            if s == Scenario::AldousDemo {
                cfg = cfg.with_n_grid(vec![30]);
            }
            let rows = run_scenario(&cfg).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert!(!rows.is_empty(), "{s}");
            for row in rows {
                assert_eq!(row.scenario, s.name());
                assert!(row.std_err >= 0.0 && row.empirical_mse >= 0.0, "{s}: {row:?}");
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_rows() {
        let cfgs = vec![
            ScenarioConfig::default_for(Scenario::HullGauss, 9).with_replications(6).with_n_grid(vec![20]),
            ScenarioConfig::default_for(Scenario::CoverageLinear, 9).with_replications(6).with_n_grid(vec![50]),
        ];
        assert_eq!(run_suite(&cfgs, 1).unwrap(), run_suite(&cfgs, 3).unwrap());
    }
}
