//! Command-line front end for the `cascade` binary.
//!
//! Every subcommand prints one JSON object on stdout. `verify` and
//! `demo-aldous` report whether every bound check passed through
//! [`Outcome::all_pass`], which the binary turns into its exit code.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coincide::{self, DistanceMatrix, NnDistances};
use crate::coverage::{self, RegressionDataset};
use crate::error::{Error, Result};
use crate::hull::{self, PointCloud};
use crate::poset::{self, Antichain, ProductOrder, ReversedNaturals, SizeEstimate, TreeAncestor, TreePath};
use crate::sim::{self, BoundReportRow, ReportFormat, Scenario, ScenarioConfig};
use crate::unseen;

#[derive(Debug, Parser)]
#[command(name = "cascade", version, about = "Leave-one-out estimators with finite-sample MSE bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Good–Turing estimate of the unseen probability mass.
    Unseen(UnseenArgs),
    /// Convex hull extreme points and the volume estimate.
    Hull(HullArgs),
    /// Up-set or convex-hull size estimate in a partial order.
    Poset(PosetArgs),
    /// Nearest-neighbour coincidence test on sequences or a distance matrix.
    Coincide(CoincideArgs),
    /// Leave-one-out coverage of OLS prediction intervals.
    Coverage(CoverageArgs),
    /// Run Monte Carlo scenarios and check every bound.
    Verify(VerifyArgs),
    /// The origin/sphere mixture whose target mass does not concentrate.
    DemoAldous(DemoAldousArgs),
}

#[derive(Debug, Args)]
pub struct UnseenArgs {
    /// Labels file; `-` or omitted reads stdin.
    pub input: Option<PathBuf>,
    /// Read labels from the first CSV column instead of whitespace tokens.
    #[arg(long)]
    pub csv: bool,
    /// Skip a header line (CSV input only).
    #[arg(long, requires = "csv")]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct HullArgs {
    /// CSV with one point per row.
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Feasibility tolerance of the hull membership test.
    #[arg(long, default_value_t = hull::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PosetKind {
    /// Labels with no order between distinct elements.
    Antichain,
    /// Positive integers, larger below smaller.
    Chain,
    /// Integer tuples under the reversed componentwise order.
    Product,
    /// Slash-delimited child indices; ancestors sit above descendants.
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PosetRegion {
    Upset,
    Convex,
}

#[derive(Debug, Args)]
pub struct PosetArgs {
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: PosetKind,
    #[arg(long, value_enum, default_value_t = PosetRegion::Upset)]
    pub region: PosetRegion,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct CoincideArgs {
    /// FASTA file, or a square CSV distance matrix.
    pub input: PathBuf,
    /// Test this record against the rest instead of only summarising.
    #[arg(long)]
    pub query_id: Option<String>,
    /// Radius for `W_n(r)/n`; defaults to the percentile threshold.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub threshold_percentile: f64,
    /// Replace non-ACGT characters with N instead of rejecting them.
    #[arg(long)]
    pub mask_ambiguous: bool,
    /// The matrix CSV starts with a row of ids.
    #[arg(long)]
    pub header: bool,
    /// Write both distance distributions here as `kind,value` rows.
    #[arg(long)]
    pub distances_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// CSV with the feature columns followed by the response.
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Mean-centre X and y (the holdout with the training means).
    #[arg(long)]
    pub center: bool,
    #[arg(long)]
    pub holdout_file: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with_all = ["all", "config"])]
    pub scenario: Option<Scenario>,
    /// Run every scenario with its default grid.
    #[arg(long)]
    pub all: bool,
    /// JSON file holding one scenario config or a list of them.
    #[arg(long, conflicts_with = "all")]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Replications per sample size; defaults to each scenario's own count
    /// (the suite count with --all).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated sample sizes overriding the scenario grid.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: ReportFormat,
    /// Also write `scenario,inv_n,empirical_mse,std_err,bound` rows here.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DemoAldousArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// What a subcommand produced.
#[derive(Debug)]
pub struct Outcome {
    pub all_pass: bool,
}

impl Outcome {
    fn ok() -> Self {
        Outcome { all_pass: true }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Unseen(a) => unseen_cmd(&a, out),
        Command::Hull(a) => hull_cmd(&a, out),
        Command::Poset(a) => poset_cmd(&a, out),
        Command::Coincide(a) => coincide_cmd(&a, out),
        Command::Coverage(a) => coverage_cmd(&a, out),
        Command::Verify(a) => verify_cmd(&a, out),
        Command::DemoAldous(a) => demo_aldous_cmd(&a, out),
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p).map_err(|e| Error::io(p, e)),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Error::io("<stdin>", e))?;
            Ok(s)
        }
    }
}

fn csv_records(text: &str, header: bool) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("record {line}: `{s}` is not a valid {what}")))
}

fn numeric_rows(text: &str, header: bool) -> Result<Vec<Vec<f64>>> {
    csv_records(text, header)?
        .iter()
        .enumerate()
        .map(|(i, rec)| rec.iter().map(|s| parse_num(s, "number", i + 1)).collect())
        .collect()
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn unseen_cmd(a: &UnseenArgs, out: &mut dyn Write) -> Result<Outcome> {
    let text = read_input(a.input.as_deref())?;
    let labels: Vec<String> = if a.csv {
        csv_records(&text, a.header)?
            .into_iter()
            .filter_map(|r| r.into_iter().next())
            .collect()
    } else {
        text.split_whitespace().map(str::to_string).collect()
    };
    let est = unseen::good_turing(&labels)?;
    let bound = unseen::unseen_bound(est.n).ok();
    emit(
        out,
        &json!({
            "n": est.n,
            "T_n": est.hits,
            "estimate": est.value,
            "bound_three_term": bound.map(|b| b.three_term),
            "bound_cap": bound.map(|b| b.cap),
        }),
    )?;
    Ok(Outcome::ok())
}

fn hull_cmd(a: &HullArgs, out: &mut dyn Write) -> Result<Outcome> {
    let rows = numeric_rows(&read_input(a.input.as_deref())?, a.header)?;
    let cloud = PointCloud::from_rows(&rows)?;
    let summary = hull::hull_summary_with_tol(&cloud, a.tol)?;
    let ci = hull::volume_ci(&summary, a.alpha).ok();
    emit(
        out,
        &json!({
            "n": summary.n,
            "d": summary.dim,
            "V_n": summary.extreme_count,
            "hull_volume": summary.volume,
            "estimate": ci.map(|c| c.estimate),
            "ci_low": ci.map(|c| c.ci_low),
            "ci_high": ci.map(|c| c.ci_high).filter(|h| h.is_finite()),
            "alpha": a.alpha,
        }),
    )?;
    Ok(Outcome::ok())
}

fn parse_tree_path(s: &str, line: usize) -> Result<TreePath> {
    let s = s.trim_matches('/');
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split('/').map(|p| parse_num(p, "child index", line)).collect()
}

fn size_estimate<T, O: poset::PartialOrder<T>>(sample: &[T], order: &O, region: PosetRegion) -> Result<SizeEstimate> {
    match region {
        PosetRegion::Upset => poset::upset_estimate(sample, order),
        PosetRegion::Convex => poset::convex_estimate(sample, order),
    }
}

fn poset_cmd(a: &PosetArgs, out: &mut dyn Write) -> Result<Outcome> {
    let records = csv_records(&read_input(a.input.as_deref())?, a.header)?;
    let first = |r: &Vec<String>| r.first().cloned().unwrap_or_default();
    let est = match a.kind {
        PosetKind::Antichain => {
            let s: Vec<String> = records.iter().map(first).collect();
            size_estimate(&s, &Antichain, a.region)?
        }
        PosetKind::Chain => {
            let s = records
                .iter()
                .enumerate()
                .map(|(i, r)| parse_num::<u64>(&first(r), "positive integer", i + 1))
                .collect::<Result<Vec<_>>>()?;
            if s.contains(&0) {
                return Err(Error::invalid("chain elements must be positive integers"));
            }
            size_estimate(&s, &ReversedNaturals, a.region)?
        }
        PosetKind::Product => {
            let s = records
                .iter()
                .enumerate()
                .map(|(i, r)| r.iter().map(|v| parse_num::<u64>(v, "positive integer", i + 1)).collect())
                .collect::<Result<Vec<Vec<u64>>>>()?;
            let dim = s.first().map_or(0, Vec::len);
            size_estimate(&s, &ProductOrder::new(dim)?, a.region)?
        }
        PosetKind::Tree => {
            let s = records
                .iter()
                .enumerate()
                .map(|(i, r)| parse_tree_path(&first(r), i + 1))
                .collect::<Result<Vec<_>>>()?;
            size_estimate(&s, &TreeAncestor, a.region)?
        }
    };
    let bound = match a.region {
        PosetRegion::Upset => poset::upset_mse_bound(est.n).ok(),
        PosetRegion::Convex => poset::poset_convex_mse_bound(est.n).ok(),
    };
    emit(
        out,
        &json!({
            "n": est.n,
            "N_n": est.inner,
            "closure_size": est.closure_size,
            "estimate": est.size_estimate,
            "bound": bound,
            "region": match a.region { PosetRegion::Upset => "upset", PosetRegion::Convex => "convex" },
        }),
    )?;
    Ok(Outcome::ok())
}

fn load_distances(a: &CoincideArgs) -> Result<(Vec<String>, DistanceMatrix)> {
    let text = read_input(Some(&a.input))?;
    if text.trim_start().starts_with('>') {
        let records = coincide::parse_fasta(&text, a.mask_ambiguous)?;
        let ids = records.iter().map(|r| r.id().to_string()).collect();
        return Ok((ids, coincide::kimura_matrix(&records)?));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(a.header)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let ids: Option<Vec<String>> = if a.header {
        Some(reader.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        rows.push(rec?.iter().map(|s| parse_num(s, "distance", i + 1)).collect::<Result<Vec<f64>>>()?);
    }
    let d = DistanceMatrix::from_rows(&rows)?;
    let ids = ids.unwrap_or_else(|| (0..d.len()).map(|i| i.to_string()).collect());
    if ids.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            got: ids.len(),
        });
    }
    Ok((ids, d))
}

fn summary(values: &[f64]) -> Result<Value> {
    Ok(json!({
        "count": values.len(),
        "min": coincide::percentile(values, 0.0)?,
        "p01": coincide::percentile(values, 1.0)?,
        "median": coincide::percentile(values, 50.0)?,
        "mean": values.iter().sum::<f64>() / values.len() as f64,
        "max": coincide::percentile(values, 100.0)?,
    }))
}

fn coincide_cmd(a: &CoincideArgs, out: &mut dyn Write) -> Result<Outcome> {
    let (ids, full) = load_distances(a)?;
    let query = match &a.query_id {
        Some(q) => Some(
            ids.iter()
                .position(|id| id == q)
                .ok_or_else(|| Error::invalid(format!("no record with id `{q}`")))?,
        ),
        None => None,
    };
    let corpus: Vec<usize> = (0..full.len()).filter(|&i| Some(i) != query).collect();
    let d = full.select(&corpus);
    let nn = coincide::nn_loo_distances(&d)?;
    let (threshold, pairs) = coincide::flagged_pairs(&d, a.threshold_percentile)?;
    let radius = a.radius.unwrap_or(threshold);
    let w = coincide::coverage_fraction_nn(&nn, radius)?;
    let query_report = match query {
        Some(q) => {
            let to_corpus: Vec<f64> = corpus.iter().map(|&j| full.get(q, j)).collect();
            let nearest = to_corpus.iter().copied().fold(f64::INFINITY, f64::min);
            let p = coincide::nn_test_pvalue(&nn, nearest)?;
            Some((to_corpus, nearest, p))
        }
        None => None,
    };
    if let Some(path) = &a.distances_out {
        write_distances(path, &nn, &d, query_report.as_ref().map(|q| &q.0))?;
    }
    let flagged: Vec<Value> = pairs
        .iter()
        .map(|p| json!({"a": ids[corpus[p.i]], "b": ids[corpus[p.j]], "distance": p.distance}))
        .collect();
    emit(
        out,
        &json!({
            "n": d.len(),
            "nn_distances": summary(&nn.values)?,
            "radius": radius,
            "W_n(r)/n": w.value,
            "bound": coincide::coincidence_mse_bound(d.len()).ok(),
            "query_id": a.query_id,
            "query_nn_distance": query_report.as_ref().map(|q| q.1),
            "p_value": query_report.as_ref().map(|q| q.2),
            "p_value_rule": "(1 + #{corpus nn distances <= query nn distance}) / (n + 1)",
            "threshold_percentile": a.threshold_percentile,
            "threshold": threshold,
            "flagged_pairs": flagged,
        }),
    )?;
    Ok(Outcome::ok())
}

/// `kind,value` rows: the corpus LOO nearest-neighbour distances, then either
/// the query's distances to the corpus or every corpus pair.
fn write_distances(path: &Path, nn: &NnDistances, d: &DistanceMatrix, query: Option<&Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{other:?}")),
    })?;
    w.write_record(["kind", "value"])?;
    for v in &nn.values {
        w.write_record(["nn_loo", &v.to_string()])?;
    }
    match query {
        Some(q) => {
            for v in q {
                w.write_record(["query", &v.to_string()])?;
            }
        }
        None => {
            for i in 0..d.len() {
                for j in i + 1..d.len() {
                    w.write_record(["pairwise", &d.get(i, j).to_string()])?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn regression_csv(text: &str, header: bool) -> Result<RegressionDataset> {
    let rows = numeric_rows(text, header)?;
    let width = rows.first().map_or(0, Vec::len);
    if width < 2 {
        return Err(Error::invalid("coverage input needs at least one feature column and a response"));
    }
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: row.len(),
            });
        }
        y.push(row[width - 1]);
        x.push(row[..width - 1].to_vec());
    }
    RegressionDataset::from_rows(&x, &y)
}

fn coverage_cmd(a: &CoverageArgs, out: &mut dyn Write) -> Result<Outcome> {
    let raw = regression_csv(&read_input(a.input.as_deref())?, a.header)?;
    let train = if a.center { raw.centered() } else { raw.clone() };
    let fit = coverage::ols_fit(&train)?;
    let loo = coverage::loo_coverage_fast(&train, a.alpha)?;
    let holdout = match &a.holdout_file {
        Some(path) => {
            let test = regression_csv(&read_input(Some(path))?, a.header)?;
            if test.p() != raw.p() {
                return Err(Error::DimensionMismatch {
                    expected: raw.p(),
                    got: test.p(),
                });
            }
            let test = if a.center { test.centered_like(&raw) } else { test };
            Some(coverage::interval_coverage(&fit, &test, a.alpha)?)
        }
        None => None,
    };
    emit(
        out,
        &json!({
            "n": train.n(),
            "p": train.p(),
            "alpha": a.alpha,
            "centered": a.center,
            "loo_coverage": loo.value,
            "holdout_coverage": holdout,
            "beta": fit.beta.as_slice(),
            "sigma_hat": fit.sigma_hat,
        }),
    )?;
    Ok(Outcome::ok())
}

fn load_configs(path: &Path) -> Result<Vec<ScenarioConfig>> {
    let text = read_input(Some(path))?;
    let value: Value = serde_json::from_str(&text)?;
    Ok(match value {
        Value::Array(_) => serde_json::from_value(value)?,
        _ => vec![serde_json::from_value(value)?],
    })
}

fn verify_cmd(a: &VerifyArgs, out: &mut dyn Write) -> Result<Outcome> {
    let mut configs = if a.all {
        sim::default_suite(a.seed, a.reps.unwrap_or(sim::SUITE_REPLICATIONS))
    } else if let Some(path) = &a.config {
        load_configs(path)?
    } else if let Some(s) = a.scenario {
        vec![ScenarioConfig::default_for(s, a.seed)]
    } else {
        return Err(Error::invalid("verify needs --scenario, --all or --config"));
    };
    if !a.all {
        for cfg in &mut configs {
            if let Some(r) = a.reps {
                cfg.replications = r;
            }
        }
    }
    if let Some(grid) = &a.n {
        for cfg in &mut configs {
            cfg.n_grid = grid.clone();
        }
    }
    let rows = sim::run_suite(&configs, a.workers.unwrap_or_else(sim::default_workers))?;
    for r in &rows {
        eprintln!(
            "{} {:<28} n={:<5} mse={:.3e} (se {:.1e}) bound={:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.scenario,
            r.n,
            r.empirical_mse,
            r.std_err,
            r.bound
        );
    }
    match &a.out {
        Some(path) => sim::emit_report(&rows, path, a.format)?,
        None => {
            let text = match a.format {
                ReportFormat::Csv => sim::render_csv(&rows)?,
                ReportFormat::Json => sim::render_json(&rows)?,
            };
            write!(out, "{text}").map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    if let Some(path) = &a.plot_data {
        sim::emit_plot_data(&rows, path)?;
    }
    Ok(Outcome {
        all_pass: rows.iter().all(|r| r.pass),
    })
}

fn demo_aldous_cmd(a: &DemoAldousArgs, out: &mut dyn Write) -> Result<Outcome> {
    let cfg = ScenarioConfig::default_for(Scenario::AldousDemo, a.seed)
        .with_n_grid(vec![a.n])
        .with_replications(a.reps);
    let rows = sim::run_suite(&[cfg], a.workers.unwrap_or_else(sim::default_workers))?;
    let row: &BoundReportRow = &rows[0];
    emit(out, &serde_json::to_value(row)?)?;
    Ok(Outcome { all_pass: row.pass })
}
