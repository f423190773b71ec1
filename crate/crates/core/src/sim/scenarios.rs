use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Map, Value};

use super::probes::{GaussianProbes, SquareGrid};
use super::sampling::{self, DnaModel};
use super::{child_rng, child_seed, mean_se, replicate, BoundReportRow, Scenario, ScenarioConfig};
use crate::coincide::{self, DistanceMatrix};
use crate::coverage::{self, RegressionDataset};
use crate::error::{Error, Result};
use crate::hull::{self, HalfSpaces, PointCloud};
use crate::loo::{cascade_bound, BoundInputs};
use crate::poset::{self, PartialOrder, ProductOrder, ReversedNaturals, TreeAncestor, TreePath};
use crate::unseen::{self, SpeciesDistribution};

pub(super) fn run(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    match cfg.scenario {
        Scenario::UnseenUniform | Scenario::UnseenZipf => unseen_rows(cfg),
        Scenario::HullRect | Scenario::HullDisk | Scenario::HullGauss | Scenario::HullGaussCorr => hull_rows(cfg),
        Scenario::UpsetChain | Scenario::UpsetAntichain | Scenario::UpsetStaircase => upset_rows(cfg),
        Scenario::PosetConvexInterval | Scenario::PosetConvexForest => poset_convex_rows(cfg),
        Scenario::CoincideUniformSquare => coincide_rows(cfg),
        Scenario::DnaSplit => dna_rows(cfg),
        Scenario::CoverageLinear | Scenario::CoverageQuadraticMisspec => coverage_rows(cfg),
        Scenario::AldousDemo => aldous_rows(cfg),
    }
}

fn row(cfg: &ScenarioConfig, n: usize, sq_errors: &[f64], bound: f64, checks: bool, extras: Map<String, Value>) -> BoundReportRow {
    let (mse, se) = mean_se(sq_errors);
    BoundReportRow {
        scenario: cfg.scenario.name().to_string(),
        n,
        replications: sq_errors.len(),
        empirical_mse: mse,
        std_err: se,
        bound,
        pass: mse <= bound && checks,
        extras,
    }
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = values.into_iter().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn unseen_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let species = p.usize("species", 100)?;
    let dist = match cfg.scenario {
        Scenario::UnseenZipf => SpeciesDistribution::zipf(species, p.f64("exponent", 1.0)?)?,
        _ => SpeciesDistribution::uniform(species)?,
    };
    let tag = cfg.scenario.name();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let pairs = replicate(cfg.seed, tag, n, cfg.replications, |rng| {
            let sample: Vec<usize> = (0..n).map(|_| dist.draw(rng)).collect();
            Ok((unseen::good_turing(&sample)?.value, unseen::missing_mass(&dist, &sample)?))
        })?;
        let sq: Vec<f64> = pairs.iter().map(|(e, t)| (e - t).powi(2)).collect();
        let cap = unseen::unseen_bound(n)?;
        let general = unseen::unseen_bound_general(&dist, n)?;
        let finite = unseen::unseen_bound_finite(n, species)?;
        let finite_applies = (n as f64) <= species as f64 * (species as f64).ln();
        let mut bound = cap.cap.min(general);
        if cfg.scenario == Scenario::UnseenUniform && finite_applies {
            bound = bound.min(finite);
        }
        let extras = json!({
            "species": species,
            "cap_bound": cap.cap,
            "three_term_bound": cap.three_term,
            "distribution_bound": general,
            "finite_species_bound": finite,
            "finite_species_bound_applies": finite_applies,
            "mean_estimate": mean(pairs.iter().map(|p| p.0)),
            "mean_missing_mass": mean(pairs.iter().map(|p| p.1)),
        });
        rows.push(row(cfg, n, &sq, bound, true, object(extras)));
    }
    Ok(rows)
}

/// How the true hull mass is measured for a hull scenario.
enum HullTruth {
    Uniform { volume: f64 },
    Gaussian { probes: GaussianProbes, whiten: Option<DMatrix<f64>> },
}

impl HullTruth {
    fn mass(&self, cloud: &PointCloud, region: Option<&HalfSpaces>, volume: Option<f64>) -> Result<f64> {
        match self {
            HullTruth::Uniform { volume: support } => Ok(volume.unwrap_or(0.0) / support),
            HullTruth::Gaussian { probes, whiten } => match whiten {
                None => Ok(region.map_or(0.0, |r| probes.mass(r))),
                Some(w) => {
                    let white = cloud.affine_map(w.transpose().as_slice(), &vec![0.0; cloud.dim()])?;
                    Ok(hull::hull_geometry(&white).map_or(0.0, |g| probes.mass(&g.region)))
                }
            },
        }
    }
}

struct HullRep {
    estimate: f64,
    uncovered: f64,
    uncovered_prev: f64,
    extreme: usize,
    hull_volume: f64,
    volume_ratio: Option<f64>,
    ci_covers: Option<bool>,
}

fn hull_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let dims = if cfg.scenario == Scenario::HullRect && p.has("sides") {
        vec![p.f64_list("sides", &[])?.len()]
    } else {
        p.usize_list("d", &[2, 3])?
    };
    let probe_count = p.usize("probes", 100_000)?;
    let alpha = p.f64("alpha", 0.05)?;
    let mut rows = Vec::new();
    for d in dims {
        if !(1..=3).contains(&d) {
            return Err(Error::invalid(format!("hull scenarios need 1 ≤ d ≤ 3, got {d}")));
        }
        let tag = format!("{}/d={d}", cfg.scenario.name());
        let sides = if p.has("sides") {
            p.f64_list("sides", &[])?
        } else {
            [4.0, 2.0, 1.0][..d].to_vec()
        };
        let probe_seed = child_seed(cfg.seed, &format!("{tag}/probes"), 0, 0);
        let chol = match cfg.scenario {
            Scenario::HullGaussCorr => Some(sampling::cholesky_factor(&sampling::equicorrelation(d, p.f64("r", 0.8)?)?)?),
            _ => None,
        };
        let truth = match cfg.scenario {
            Scenario::HullRect => HullTruth::Uniform {
                volume: sides.iter().product(),
            },
            Scenario::HullDisk => HullTruth::Uniform {
                volume: [2.0, std::f64::consts::PI, 4.0 * std::f64::consts::PI / 3.0][d - 1],
            },
            _ => HullTruth::Gaussian {
                probes: GaussianProbes::new(d, probe_count, probe_seed)?,
                whiten: match &chol {
                    Some(l) => Some(l.clone().try_inverse().ok_or_else(|| Error::invalid("singular covariance"))?),
                    None => None,
                },
            },
        };
        let support_volume = match &truth {
            HullTruth::Uniform { volume } => Some(*volume),
            HullTruth::Gaussian { .. } => None,
        };

        for &n in &cfg.n_grid {
            let reps = replicate(cfg.seed, &tag, n, cfg.replications, |rng| {
                let cloud = match cfg.scenario {
                    Scenario::HullRect => sampling::uniform_box(&sides, n, rng)?,
                    Scenario::HullDisk => sampling::uniform_ball(d, n, rng)?,
                    Scenario::HullGauss => sampling::gaussian(d, n, rng)?,
                    _ => sampling::correlated_gaussian(chol.as_ref().expect("factor built above"), n, rng)?,
                };
                let summary = hull::hull_summary_with_tol(&cloud, hull::DEFAULT_TOL)?;
                let hull_volume = summary.volume.unwrap_or(0.0);
                let covered = truth.mass(&cloud, summary.region.as_ref(), summary.volume)?;
                // The hull of the first n − 1 points differs only if the last point is extreme.
                let covered_prev = if summary.extreme_flags[n - 1] {
                    let prefix = cloud.prefix(n - 1).expect("n ≥ 3");
                    let geom = hull::hull_geometry(&prefix);
                    truth.mass(&prefix, geom.as_ref().map(|g| &g.region), Some(geom.as_ref().map_or(0.0, |g| g.volume)))?
                } else {
                    covered
                };
                let (volume_ratio, ci_covers) = match support_volume {
                    Some(vk) if summary.extreme_count < n => {
                        let ci = hull::volume_ci(&summary, alpha)?;
                        (Some(ci.estimate / vk), Some(ci.ci_low <= vk && vk <= ci.ci_high))
                    }
                    _ => (None, None),
                };
                Ok(HullRep {
                    estimate: summary.extreme_count as f64 / n as f64,
                    uncovered: 1.0 - covered,
                    uncovered_prev: 1.0 - covered_prev,
                    extreme: summary.extreme_count,
                    hull_volume,
                    volume_ratio,
                    ci_covers,
                })
            })?;
            let sq: Vec<f64> = reps.iter().map(|r| (r.estimate - r.uncovered).powi(2)).collect();
            let bound = hull::conv_mse_bound(n, d)?;
            let defect_bound = hull::consecutive_defect_bound(n, d)?;
            let defects: Vec<f64> = reps.iter().map(|r| (r.uncovered - r.uncovered_prev).abs()).collect();
            let (defect, defect_se) = mean_se(&defects);
            let (v_over_n, v_over_n_se) = mean_se(&reps.iter().map(|r| r.estimate).collect::<Vec<_>>());
            let (d_prev, d_prev_se) = mean_se(&reps.iter().map(|r| r.uncovered_prev).collect::<Vec<_>>());
            let mut extras = object(json!({
                "d": d,
                "mean_abs_defect": defect,
                "mean_abs_defect_se": defect_se,
                "defect_bound": defect_bound,
                "mean_extreme_count": mean(reps.iter().map(|r| r.extreme as f64)),
                "mean_hull_volume": mean(reps.iter().map(|r| r.hull_volume)),
                "mean_v_over_n": v_over_n,
                "mean_v_over_n_se": v_over_n_se,
                "mean_uncovered_prev": d_prev,
                "mean_uncovered_prev_se": d_prev_se,
            }));
            let mut checks = defect <= defect_bound;
            if let Some(vk) = support_volume {
                let ratios: Vec<f64> = reps.iter().filter_map(|r| r.volume_ratio).collect();
                let covers: Vec<f64> = reps.iter().filter_map(|r| r.ci_covers.map(|c| c as u8 as f64)).collect();
                extras.insert("support_volume".into(), json!(vk));
                extras.insert("mean_volume_ratio".into(), json!(mean(ratios.iter().copied())));
                extras.insert("volume_ratio_count".into(), json!(ratios.len()));
                extras.insert("ci_alpha".into(), json!(alpha));
                extras.insert("ci_coverage".into(), json!(mean(covers)));
            }
            if let HullTruth::Gaussian { probes, .. } = &truth {
                let max_se = reps
                    .iter()
                    .map(|r| probes.standard_error(1.0 - r.uncovered))
                    .fold(0.0, f64::max);
                let (mse, _) = mean_se(&sq);
                // Worst-case shift of the MSE if each truth is off by 3 s.e.
                let probe_error = 2.0 * mse.sqrt() * 3.0 * max_se + (3.0 * max_se).powi(2);
                let ok = probe_error <= 0.1 * bound;
                checks &= ok;
                extras.insert("probe_count".into(), json!(probes.len()));
                extras.insert("probe_seed".into(), json!(probes.seed()));
                extras.insert("probe_se_max".into(), json!(max_se));
                extras.insert("probe_mse_error".into(), json!(probe_error));
                extras.insert("probe_error_ok".into(), json!(ok));
            }
            rows.push(row(cfg, n, &sq, bound, checks, extras));
        }
    }
    Ok(rows)
}

/// `{(a, b) : a, b ≥ 1, a·b ≤ c}`, an up-set of the opposite product order.
pub(crate) fn staircase(c: u64) -> Vec<Vec<u64>> {
    (1..=c).flat_map(|a| (1..=c / a).map(move |b| vec![a, b])).collect()
}

fn upset_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let tag = cfg.scenario.name();
    let k = p.usize("k", 1000)?;
    let c = p.usize("c", 104)? as u64;
    let ground = staircase(c);
    let order = ProductOrder::new(2)?;
    let size = match cfg.scenario {
        Scenario::UpsetStaircase => ground.len(),
        _ => k,
    };
    if size == 0 {
        return Err(Error::invalid("ground set is empty"));
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let reps = replicate(cfg.seed, tag, n, cfg.replications, |rng| {
            let (inner, closure) = match cfg.scenario {
                Scenario::UpsetChain => {
                    let s: Vec<u64> = (0..n).map(|_| rng.random_range(1..=k as u64)).collect();
                    (poset::upset_dominated_count(&s, &ReversedNaturals), ReversedNaturals.upset_closure_size(&s)?)
                }
                Scenario::UpsetAntichain => {
                    let s: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
                    (poset::upset_dominated_count(&s, &poset::Antichain), poset::Antichain.upset_closure_size(&s)?)
                }
                _ => {
                    let s = sampling::uniform_from(&ground, n, rng)?;
                    (poset::upset_dominated_count(&s, &order), order.upset_closure_size(&s)?)
                }
            };
            Ok((inner, closure))
        })?;
        let sq: Vec<f64> = reps
            .iter()
            .map(|&(inner, closure)| (inner as f64 / n as f64 - closure as f64 / size as f64).powi(2))
            .collect();
        let size_ratios: Vec<f64> = reps
            .iter()
            .filter(|r| r.0 > 0)
            .map(|&(inner, closure)| n as f64 * closure as f64 / inner as f64 / size as f64)
            .collect();
        let extras = json!({
            "ground_size": size,
            "mean_size_ratio": mean(size_ratios.iter().copied()),
            "size_ratio_count": size_ratios.len(),
        });
        rows.push(row(cfg, n, &sq, poset::upset_mse_bound(n)?, true, object(extras)));
    }
    Ok(rows)
}

/// A random convex subset of the infinite tree: `components` trees rooted
/// at distinct depth-1 or depth-2 nodes, grown to `nodes` nodes in total by
/// attaching children to uniformly chosen existing nodes.
pub(crate) fn random_subforest<R: Rng + ?Sized>(nodes: usize, components: usize, rng: &mut R) -> Result<Vec<TreePath>> {
    if components == 0 || nodes < components {
        return Err(Error::invalid("subforest needs 1 ≤ components ≤ nodes"));
    }
    let mut forest: Vec<TreePath> = (0..components as u32)
        .map(|c| if rng.random::<bool>() { vec![c] } else { vec![c, rng.random_range(0..3)] })
        .collect();
    let mut children: Vec<u32> = vec![0; components];
    while forest.len() < nodes {
        let parent = rng.random_range(0..forest.len());
        let mut child = forest[parent].clone();
        child.push(children[parent]);
        children[parent] += 1;
        forest.push(child);
        children.push(0);
    }
    Ok(forest)
}

fn poset_convex_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let tag = cfg.scenario.name();
    let k = p.usize("k", 1000)?;
    let nodes = p.usize("nodes", 200)?;
    let components = p.usize("components", 4)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let reps = replicate(cfg.seed, tag, n, cfg.replications, |rng| match cfg.scenario {
            Scenario::PosetConvexInterval => {
                let s: Vec<u64> = (0..n).map(|_| rng.random_range(1..=k as u64)).collect();
                let inner = poset::convex_sandwiched_count(&s, &ReversedNaturals);
                Ok((inner, ReversedNaturals.convex_closure_size(&s)?, k))
            }
            _ => {
                let forest = random_subforest(nodes, components, rng)?;
                let s = sampling::uniform_from(&forest, n, rng)?;
                let inner = poset::convex_sandwiched_count(&s, &TreeAncestor);
                Ok((inner, TreeAncestor.convex_closure_size(&s)?, forest.len()))
            }
        })?;
        let sq: Vec<f64> = reps
            .iter()
            .map(|&(inner, closure, size)| (inner as f64 / n as f64 - closure as f64 / size as f64).powi(2))
            .collect();
        let size_ratios: Vec<f64> = reps
            .iter()
            .filter(|r| r.0 > 0)
            .map(|&(inner, closure, size)| n as f64 * closure as f64 / inner as f64 / size as f64)
            .collect();
        let extras = json!({
            "mean_size_ratio": mean(size_ratios.iter().copied()),
            "size_ratio_count": size_ratios.len(),
        });
        rows.push(row(cfg, n, &sq, poset::poset_convex_mse_bound(n)?, true, object(extras)));
    }
    Ok(rows)
}

fn coincide_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let radii = p.f64_list("r", &[0.05, 0.1, 0.2])?;
    let side = p.usize("grid_side", 317)?;
    let mut rows = Vec::new();
    for r in radii {
        if !(r >= 0.0) {
            return Err(Error::invalid("radius must be nonnegative"));
        }
        let tag = format!("{}/r={r}", cfg.scenario.name());
        let grid_seed = child_seed(cfg.seed, &format!("{tag}/probes"), 0, 0);
        let grid = SquareGrid::new(side, grid_seed)?;
        for &n in &cfg.n_grid {
            let reps = replicate(cfg.seed, &tag, n, cfg.replications, |rng| {
                let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
                let coords: Vec<f64> = pts.iter().flat_map(|&(x, y)| [x, y]).collect();
                let d = DistanceMatrix::euclidean(&coords, 2)?;
                let w = coincide::coverage_fraction(&d, r)?.value;
                Ok((w, grid.covered_fraction(&pts, r)))
            })?;
            let sq: Vec<f64> = reps.iter().map(|(w, t)| (w - t).powi(2)).collect();
            let probe_se = reps.iter().map(|r| grid.standard_error(r.1)).fold(0.0, f64::max);
            let extras = json!({
                "r": r,
                "mean_coverage_fraction": mean(reps.iter().map(|r| r.0)),
                "mean_union_mass": mean(reps.iter().map(|r| r.1)),
                "probe_count": grid.count(),
                "probe_seed": grid_seed,
                "probe_se_max": probe_se,
            });
            rows.push(row(cfg, n, &sq, coincide::coincidence_mse_bound(n)?, true, object(extras)));
        }
    }
    Ok(rows)
}

fn dna_model(p: &super::Params<'_>) -> Result<DnaModel> {
    let defaults = DnaModel::default();
    let freqs = p.f64_list("base_freqs", &defaults.base_freqs)?;
    let base_freqs: [f64; 4] = freqs
        .try_into()
        .map_err(|_| Error::invalid("base_freqs needs four entries (A, C, G, T)"))?;
    Ok(DnaModel {
        length: p.usize("length", defaults.length)?,
        base_freqs,
        clades: p.usize("clades", defaults.clades)?,
        clade_rate: p.f64("clade_rate", defaults.clade_rate)?,
        leaf_rate: p.f64("leaf_rate", defaults.leaf_rate)?,
        transition_share: p.f64("transition_share", defaults.transition_share)?,
    })
}

/// Within-sample versus sample-to-population distance distributions on a
/// synthetic population, compared with a null built from a larger one. The
/// row's `empirical_mse` column carries the Kolmogorov–Smirnov distance
/// between the two sets of Anderson–Darling statistics and `bound` its
/// acceptance threshold.
fn dna_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let model = dna_model(&p)?;
    let m = p.usize("sample_size", 40)?;
    let null_size = p.usize("null_population", 1000)?;
    let threshold = p.f64("ks_threshold", 0.15)?;
    let percentile = p.f64("threshold_percentile", 1.0)?;
    let tag = cfg.scenario.name();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        if m < 2 || n < m + 1 || null_size < 2 * m + (n - m) + m {
            return Err(Error::invalid("population too small for the requested split"));
        }
        let pop = model.population(n, &mut child_rng(cfg.seed, &format!("{tag}/population"), n as u64, 0))?;
        let dist = coincide::kimura_matrix(&pop)?;
        let splits = replicate(cfg.seed, tag, n, cfg.replications, |rng| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let (sample, rest) = idx.split_at(m);
            let within = coincide::nn_loo_distances(&dist.select(sample))?.values;
            let to_sample = dist.min_distances(rest, sample);
            Ok((coincide::ad_two_sample(&within, &to_sample)?, within, to_sample))
        })?;

        let null_pop = model.population(
            null_size,
            &mut child_rng(cfg.seed, &format!("{tag}/null_population"), null_size as u64, 0),
        )?;
        let null_dist = coincide::kimura_matrix(&null_pop)?;
        let null_tag = format!("{tag}/null");
        let nulls = replicate(cfg.seed, &null_tag, n, cfg.replications, |rng| {
            let picks = rand::seq::index::sample(rng, null_size, 2 * m + (n - m) + m).into_vec();
            let (a, rest) = picks.split_at(m);
            let (b, rest) = rest.split_at(m);
            let (c, d) = rest.split_at(n - m);
            let first = null_dist.min_distances(a, b);
            let second = null_dist.min_distances(c, d);
            coincide::ad_two_sample(&first, &second)
        })?;

        let split_ad: Vec<f64> = splits.iter().map(|s| s.0).collect();
        let ks = coincide::ks_distance(&split_ad, &nulls)?;
        let within_all: Vec<f64> = splits.iter().flat_map(|s| s.1.iter().copied()).collect();
        let pop_all: Vec<f64> = splits.iter().flat_map(|s| s.2.iter().copied()).collect();
        let (cutoff, flagged) = coincide::flagged_pairs(&dist, percentile)?;
        let extras = json!({
            "statistic": "ks_distance_between_ad_distributions",
            "sample_size": m,
            "sequence_length": model.length,
            "null_population": null_size,
            "mean_ad_split": mean(split_ad.iter().copied()),
            "mean_ad_null": mean(nulls.iter().copied()),
            "within_percentile": coincide::percentile(&within_all, percentile)?,
            "population_percentile": coincide::percentile(&pop_all, percentile)?,
            "threshold_percentile": percentile,
            "population_nn_threshold": cutoff,
            "flagged_pairs": flagged.len(),
        });
        rows.push(BoundReportRow {
            scenario: tag.to_string(),
            n,
            replications: cfg.replications,
            empirical_mse: ks,
            std_err: 0.0,
            bound: threshold,
            pass: ks <= threshold,
            extras: object(extras),
        });
    }
    Ok(rows)
}

fn regression_data<R: Rng + ?Sized>(n: usize, misspec: bool, x_scale: f64, rng: &mut R) -> Result<RegressionDataset> {
    let x = DMatrix::from_fn(n, 2, |_, _| { let z: f64 = StandardNormal.sample(rng); x_scale * z });
    let y = DVector::from_fn(n, |i, _| {
        let eps: f64 = StandardNormal.sample(rng);
        if misspec {
            x[(i, 0)] * x[(i, 0)] + 0.5 * x[(i, 1)] + eps
        } else {
            x[(i, 0)] - 0.5 * x[(i, 1)] + eps
        }
    });
    RegressionDataset::new(x, y)
}

struct CoverageRep {
    loo: f64,
    truth: f64,
    truth_prev: f64,
    delta1: f64,
    delta2: f64,
}

/// Holdout share where the intervals of two fits disagree about containment.
fn disagreement(a: &coverage::OlsFit, b: &coverage::OlsFit, test: &RegressionDataset, alpha: f64) -> Result<f64> {
    let mut diff = 0;
    for i in 0..test.n() {
        let x = test.row(i);
        let y = test.y()[i];
        if coverage::predict_interval(a, &x, alpha)?.contains(y) != coverage::predict_interval(b, &x, alpha)?.contains(y) {
            diff += 1;
        }
    }
    Ok(diff as f64 / test.n() as f64)
}

fn coverage_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let misspec = cfg.scenario == Scenario::CoverageQuadraticMisspec;
    let alpha = p.f64("alpha", 0.05)?;
    let holdout = p.usize("holdout", 2000)?;
    let x_scale = p.f64("x_scale", if misspec { 2.0 } else { 1.0 })?;
    let tag = cfg.scenario.name();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        if n < 5 {
            return Err(Error::invalid("coverage scenarios need n ≥ 5"));
        }
        let reps = replicate(cfg.seed, tag, n, cfg.replications, |rng| {
            let train = regression_data(n, misspec, x_scale, rng)?;
            let test = regression_data(holdout, misspec, x_scale, rng)?;
            let fit = coverage::ols_fit(&train)?;
            let drop_last = train.without(n - 1);
            let fit1 = coverage::ols_fit(&drop_last)?;
            let fit2 = coverage::ols_fit(&drop_last.without(n - 2))?;
            Ok(CoverageRep {
                loo: coverage::loo_coverage_fast(&train, alpha)?.value,
                truth: coverage::interval_coverage(&fit, &test, alpha)?,
                truth_prev: coverage::interval_coverage(&fit1, &test, alpha)?,
                delta1: disagreement(&fit, &fit1, &test, alpha)?,
                delta2: disagreement(&fit1, &fit2, &test, alpha)?,
            })
        })?;
        let sq: Vec<f64> = reps.iter().map(|r| (r.loo - r.truth).powi(2)).collect();
        let theta = mean(reps.iter().map(|r| r.truth_prev * (1.0 - r.truth_prev)));
        let d1 = mean(reps.iter().map(|r| r.delta1));
        let d2 = mean(reps.iter().map(|r| r.delta2));
        let bound = cascade_bound(&BoundInputs::new(theta.min(0.25), d1, d2, n)?)?;
        let extras = json!({
            "alpha": alpha,
            "holdout": holdout,
            "x_scale": x_scale,
            "mean_loo_coverage": mean(reps.iter().map(|r| r.loo)),
            "mean_holdout_coverage": mean(reps.iter().map(|r| r.truth)),
            "theta_hat": theta,
            "delta_prime_hat": d1,
            "delta_double_prime_hat": d2,
            "bound_kind": "cascade bound with holdout estimates of theta, delta', delta''",
        });
        rows.push(row(cfg, n, &sq, bound, true, object(extras)));
    }
    Ok(rows)
}

struct AldousRep {
    loo: f64,
    mass: f64,
    mass_prev: f64,
    mass_prev2: f64,
}

/// Mass of the union of radius-`rho` balls around the first `m` rows, for
/// the origin/sphere mixture: the origin is always covered (weight `1/n`), a
/// sphere point is covered if the sample contains the origin, and otherwise
/// with the probe-estimated probability of landing near a sample point.
fn aldous_mass(m: usize, n: usize, has_origin: bool, probe_max: &[Vec<f64>], cos_min: f64) -> f64 {
    let sphere = if has_origin {
        1.0
    } else {
        let hit = probe_max.iter().filter(|row| row[..m].iter().any(|&c| c >= cos_min)).count();
        hit as f64 / probe_max.len() as f64
    };
    1.0 / n as f64 + (1.0 - 1.0 / n as f64) * sphere
}

fn aldous_rows(cfg: &ScenarioConfig) -> Result<Vec<BoundReportRow>> {
    let p = cfg.params();
    let rho = p.f64("radius", 0.5 * (1.0 + 2f64.sqrt()))?;
    let probes = p.usize("sphere_probes", 200)?;
    let tag = cfg.scenario.name();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let d = p.usize("d", n)?;
        // Two unit vectors are within rho iff their inner product is at least this.
        let cos_min = 1.0 - rho * rho / 2.0;
        let reps = replicate(cfg.seed, tag, n, cfg.replications, |rng: &mut ChaCha8Rng| {
            let x = sampling::origin_sphere_mixture(d, n, rng);
            let is_origin: Vec<bool> = x.row_iter().map(|r| r.iter().all(|&v| v == 0.0)).collect();
            let gram = &x * x.transpose();
            let zeros = is_origin.iter().filter(|&&z| z).count();
            let hits = (0..n)
                .filter(|&i| {
                    if is_origin[i] {
                        // Every other point is within distance 1.
                        return n > 1;
                    }
                    (0..n).any(|j| j != i && (is_origin[j] || gram[(i, j)] >= cos_min))
                })
                .count();
            // Inner products of fresh sphere probes with the sample (origin rows give 0).
            let probe_max: Vec<Vec<f64>> = if zeros < 3 {
                let q = DMatrix::from_fn(probes, d, |_, _| 0.0);
                let mut q = q;
                for i in 0..probes {
                    let v = sampling::unit_sphere_point(d, rng);
                    for (j, val) in v.into_iter().enumerate() {
                        q[(i, j)] = val;
                    }
                }
                let prod = &q * x.transpose();
                prod.row_iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .map(|(j, &c)| if is_origin[j] { f64::NEG_INFINITY } else { c })
                            .collect()
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let origin_within = |m: usize| is_origin[..m].iter().any(|&z| z);
            Ok(AldousRep {
                loo: hits as f64 / n as f64,
                mass: aldous_mass(n, n, origin_within(n), &probe_max, cos_min),
                mass_prev: aldous_mass(n - 1, n, origin_within(n - 1), &probe_max, cos_min),
                mass_prev2: aldous_mass(n - 2, n, origin_within(n - 2), &probe_max, cos_min),
            })
        })?;
        let sq: Vec<f64> = reps.iter().map(|r| (r.loo - r.mass).powi(2)).collect();
        let theta = mean(reps.iter().map(|r| r.mass_prev * (1.0 - r.mass_prev)));
        let d1 = mean(reps.iter().map(|r| (r.mass - r.mass_prev).abs()));
        let d2 = mean(reps.iter().map(|r| (r.mass_prev - r.mass_prev2).abs()));
        let bound = cascade_bound(&BoundInputs::new(theta.min(0.25), d1, d2, n)?)?;
        let zero_mode = mean(reps.iter().map(|r| (r.mass < 0.5) as u8 as f64));
        let mean_abs = mean(reps.iter().map(|r| (r.loo - r.mass).abs()));
        let e_inv = (-1.0f64).exp();
        let modes_ok = (zero_mode - e_inv).abs() <= 0.06 && ((1.0 - zero_mode) - (1.0 - e_inv)).abs() <= 0.06;
        let extras = json!({
            "d": d,
            "radius": rho,
            "sphere_probes": probes,
            "zero_mode_frequency": zero_mode,
            "one_mode_frequency": 1.0 - zero_mode,
            "mean_abs_error": mean_abs,
            "modes_ok": modes_ok,
            "theta_hat": theta,
            "delta_prime_hat": d1,
            "delta_double_prime_hat": d2,
        });
        rows.push(row(cfg, n, &sq, bound, modes_ok && mean_abs <= 0.05, object(extras)));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn staircase_is_an_upset() {
        let t = staircase(104);
        assert_eq!(t.len(), 502);
        let order = ProductOrder::new(2).unwrap();
        let all = order.upset_closure_size(&t).unwrap();
        assert_eq!(all, t.len());
    }

    #[test]
    fn subforest_is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let f = random_subforest(60, 4, &mut rng).unwrap();
            assert_eq!(f.len(), 60);
            assert_eq!(TreeAncestor.convex_closure_size(&f).unwrap(), 60);
            let unique: std::collections::HashSet<_> = f.iter().collect();
            assert_eq!(unique.len(), 60);
        }
        assert!(random_subforest(2, 3, &mut rng).is_err());
    }
}
