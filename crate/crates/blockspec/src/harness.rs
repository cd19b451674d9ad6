//! Monte Carlo experiment runner.
//!
//! Three studies over a common configuration:
//!
//! * `misassignment` — known-K partitioning across `(n, R)` cells, recording
//!   the misassignment fraction per replicate.
//! * `kstat` — the residual statistic `log_n ||C - Z||_F` across
//!   `(n, R, K')` cells, plus both block-count estimators per replicate.
//! * `bounds` — the spectral bound reports per `(n, replicate, modality)`.
//!
//! One graph is realized per `(n, replicate)` and shared across the `R`
//! (and `K'`) cells of that replicate: the decomposition is computed once at
//! the largest requested rank and truncated per cell, which yields exactly
//! the per-R embeddings while keeping the runtime linear in the number of
//! replicates. Replicate seeds are distinct streams derived from the base
//! seed; records are assembled in cell order, so the output is byte-stable
//! under any worker count.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{self};
use crate::diagnostics::{self, BoundReport};
use crate::embedding::{self, KnowledgeMode};
use crate::evaluation;
use crate::io;
use crate::linalg::Svd;
use crate::model::{self, SbmParams};
use crate::sampler::{self, GraphSample, Seed};
use crate::selection::{self, ClustererConfig};
use crate::{Error, Result};

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Misassignment,
    Kstat,
    Bounds,
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Misassignment => "misassignment",
            Self::Kstat => "kstat",
            Self::Bounds => "bounds",
        })
    }
}

impl std::str::FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "misassignment" => Ok(Self::Misassignment),
            "kstat" => Ok(Self::Kstat),
            "bounds" => Ok(Self::Bounds),
            other => Err(Error::Parse(format!(
                "unknown study '{other}' (expected misassignment|kstat|bounds)"
            ))),
        }
    }
}

/// Full description of one study run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: SbmParams,
    pub study: Study,
    pub n_list: Vec<usize>,
    pub r_list: Vec<usize>,
    pub kprime_list: Vec<usize>,
    pub replicates: usize,
    pub seed: Seed,
    pub mode: KnowledgeMode,
    pub xi: f64,
    pub omega: f64,
    pub zeta: f64,
    pub theta: f64,
    pub restarts: usize,
    /// Grow one realization per replicate across `n_list` by adding vertices
    /// instead of re-realizing each size independently.
    pub growth: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigFile {
    study: Study,
    n_list: Vec<usize>,
    #[serde(default)]
    r_list: Vec<usize>,
    #[serde(default)]
    kprime_list: Vec<usize>,
    replicates: usize,
    seed: Seed,
    #[serde(default)]
    mode: KnowledgeMode,
    #[serde(default = "default_xi")]
    xi: f64,
    #[serde(default = "default_omega")]
    omega: f64,
    #[serde(default = "default_zeta")]
    zeta: f64,
    #[serde(default = "default_theta")]
    theta: f64,
    #[serde(default = "default_restarts")]
    restarts: usize,
    #[serde(default)]
    growth: bool,
    params: toml::Value,
}

fn default_xi() -> f64 {
    0.40
}
fn default_omega() -> f64 {
    0.8
}
fn default_zeta() -> f64 {
    0.01
}
fn default_theta() -> f64 {
    0.25
}
fn default_restarts() -> usize {
    clustering::DEFAULT_RESTARTS
}

impl ExperimentConfig {
    /// Parses and validates a configuration from TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let params_text =
            toml::to_string(&file.params).map_err(|e| Error::Parse(e.to_string()))?;
        let params = io::parse_params_toml(&params_text)?;
        let config = Self {
            params,
            study: file.study,
            n_list: file.n_list,
            r_list: file.r_list,
            kprime_list: file.kprime_list,
            replicates: file.replicates,
            seed: file.seed,
            mode: file.mode,
            xi: file.xi,
            omega: file.omega,
            zeta: file.zeta,
            theta: file.theta,
            restarts: file.restarts,
            growth: file.growth,
        };
        config.validate()?;
        Ok(config)
    }

    /// Loads a configuration from a TOML file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must not be empty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        match self.study {
            Study::Misassignment | Study::Kstat => {
                if self.r_list.is_empty() {
                    return Err(Error::Config("r_list must not be empty".into()));
                }
            }
            Study::Bounds => {}
        }
        if self.study == Study::Kstat && self.kprime_list.is_empty() {
            return Err(Error::Config(
                "kprime_list must not be empty for the kstat study".into(),
            ));
        }
        if self.growth && !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "growth mode requires a strictly increasing n_list".into(),
            ));
        }
        Ok(())
    }

    /// Renders the full configuration as TOML (used by the run manifest).
    pub fn to_toml(&self) -> String {
        let params_value: toml::Value = toml::from_str(&io::params_to_toml(&self.params))
            .expect("parameters round-trip through TOML");
        let file = ConfigFile {
            study: self.study,
            n_list: self.n_list.clone(),
            r_list: self.r_list.clone(),
            kprime_list: self.kprime_list.clone(),
            replicates: self.replicates,
            seed: self.seed,
            mode: self.mode,
            xi: self.xi,
            omega: self.omega,
            zeta: self.zeta,
            theta: self.theta,
            restarts: self.restarts,
            growth: self.growth,
            params: params_value,
        };
        toml::to_string(&file).expect("configuration serializes to TOML")
    }

    fn clusterer(&self, seed: Seed) -> ClustererConfig {
        ClustererConfig::new(seed).with_restarts(self.restarts)
    }
}

/// One study measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub study: Study,
    pub n: usize,
    pub r: usize,
    pub k_prime: Option<usize>,
    pub replicate: usize,
    pub seed: Seed,
    pub misassignment: Option<f64>,
    pub k_hat: Option<usize>,
    pub k_check: Option<usize>,
    pub r_hat: Option<usize>,
    pub statistic: Option<f64>,
    pub error: Option<String>,
}

/// One bound check on one sampled instance.
#[derive(Debug, Clone)]
pub struct BoundRecord {
    pub n: usize,
    pub modality: usize,
    pub replicate: usize,
    pub seed: Seed,
    pub report: BoundReport,
}

/// Per-cell mean and sample standard deviation of the study metric.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub study: Study,
    pub n: usize,
    pub r: usize,
    pub k_prime: Option<usize>,
    pub metric: &'static str,
    pub count_ok: usize,
    pub count_err: usize,
    pub mean: f64,
    pub stddev: f64,
}

/// Per-bound pass rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAggregateRow {
    pub name: String,
    pub n: usize,
    pub passes: usize,
    pub total: usize,
}

/// Wall-clock entry; informational only and excluded from the deterministic
/// outputs.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub label: String,
    pub wall_ms: u128,
}

/// Everything a study produces.
#[derive(Debug, Default)]
pub struct StudyOutput {
    pub records: Vec<ExperimentRecord>,
    pub bound_records: Vec<BoundRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub bound_aggregates: Vec<BoundAggregateRow>,
    pub timings: Vec<TimingRow>,
}

/// Runs a study on a dedicated thread pool.
///
/// `workers = 0` uses one worker per available core. The record tables are
/// identical for every worker count; only the timing sidecar varies.
pub fn run_study(config: &ExperimentConfig, workers: usize) -> Result<StudyOutput> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        builder = builder.num_threads(workers);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_study_inner(config))
}

fn run_study_inner(config: &ExperimentConfig) -> Result<StudyOutput> {
    match config.study {
        Study::Misassignment | Study::Kstat => run_record_study(config),
        Study::Bounds => run_bounds_study(config),
    }
}

/// Work item: one realized graph.
#[derive(Debug, Clone, Copy)]
struct Item {
    n: usize,
    replicate: usize,
    seed: Seed,
}

fn items(config: &ExperimentConfig) -> Vec<Item> {
    let mut out = Vec::with_capacity(config.n_list.len() * config.replicates);
    for (n_idx, &n) in config.n_list.iter().enumerate() {
        for replicate in 0..config.replicates {
            let offset = (n_idx * config.replicates + replicate) as u64;
            out.push(Item {
                n,
                replicate,
                seed: config.seed.offset_stream(offset),
            });
        }
    }
    out
}

fn run_record_study(config: &ExperimentConfig) -> Result<StudyOutput> {
    let (mut records, mut timings) = (Vec::new(), Vec::new());
    if config.growth {
        let results: Vec<(Vec<ExperimentRecord>, Vec<TimingRow>)> = (0..config.replicates)
            .into_par_iter()
            .map(|replicate| {
                let seed = config.seed.offset_stream(replicate as u64);
                let mut recs = Vec::new();
                let mut times = Vec::new();
                let mut sample =
                    GraphSample::empty(config.params.num_modalities(), config.params.directed());
                for &n in &config.n_list {
                    sample = grow_sample_to(sample, &config.params, seed, n);
                    let item = Item {
                        n,
                        replicate,
                        seed,
                    };
                    let (rs, ts) = record_item_for_sample(config, &item, &sample);
                    recs.extend(rs);
                    times.extend(ts);
                }
                (recs, times)
            })
            .collect();
        // Reorder replicate-major results into cell order (n outermost).
        let mut by_cell: Vec<Vec<ExperimentRecord>> = Vec::new();
        for (rs, ts) in results {
            by_cell.push(rs);
            timings.extend(ts);
        }
        for &n in &config.n_list {
            for replicate_records in &by_cell {
                records.extend(
                    replicate_records
                        .iter()
                        .filter(|r| r.n == n)
                        .cloned(),
                );
            }
        }
    } else {
        let work = items(config);
        let results: Vec<(Vec<ExperimentRecord>, Vec<TimingRow>)> = work
            .par_iter()
            .map(|item| {
                let t0 = Instant::now();
                let sample = sampler::sample_graph(item.n, &config.params, item.seed);
                let mut out = record_item_for_sample(config, item, &sample);
                out.1.push(TimingRow {
                    label: format!(
                        "{}/n{}/rep{}/sample",
                        config.study, item.n, item.replicate
                    ),
                    wall_ms: t0.elapsed().as_millis(),
                });
                out
            })
            .collect();
        for (rs, ts) in results {
            records.extend(rs);
            timings.extend(ts);
        }
    }
    let aggregates = aggregate_records(config, &records);
    Ok(StudyOutput {
        records,
        aggregates,
        timings,
        ..Default::default()
    })
}

fn grow_sample_to(
    mut sample: GraphSample,
    params: &SbmParams,
    seed: Seed,
    target: usize,
) -> GraphSample {
    while sample.n() < target {
        sample = sampler::extend_sample(&sample, params, seed);
    }
    sample
}

/// Decomposes each modality once; the per-R cells truncate the result.
fn decompose(
    config: &ExperimentConfig,
    item: &Item,
    sample: &GraphSample,
) -> (Vec<Svd>, Option<usize>, Vec<TimingRow>) {
    let t0 = Instant::now();
    let svds: Vec<Svd> = (0..sample.num_modalities())
        .map(|s| crate::linalg::svd_full(&sample.adjacency_f64(s)))
        .collect();
    let timings = vec![TimingRow {
        label: format!("{}/n{}/rep{}/svd", config.study, item.n, item.replicate),
        wall_ms: t0.elapsed().as_millis(),
    }];
    let r_hat = embedding::estimate_rank(&svds[0].sigma, item.n, config.omega).ok();
    (svds, r_hat, timings)
}

fn features_at(
    config: &ExperimentConfig,
    svds: &[Svd],
    r: usize,
) -> Result<ndarray::Array2<f64>> {
    let n = svds[0].u.nrows();
    if r == 0 || r > n {
        return Err(Error::DimensionError(format!(
            "embedding dimension {r} must lie in 1..={n}"
        )));
    }
    let embeddings: Vec<embedding::ModalityEmbedding> = svds
        .iter()
        .map(|svd| embedding::truncate_embedding(svd, r))
        .collect();
    embedding::assemble_features(&embeddings, config.mode)
}

fn record_item_for_sample(
    config: &ExperimentConfig,
    item: &Item,
    sample: &GraphSample,
) -> (Vec<ExperimentRecord>, Vec<TimingRow>) {
    let (svds, r_hat, mut timings) = decompose(config, item, sample);
    let mut records = Vec::new();
    for &r in &config.r_list {
        let t0 = Instant::now();
        let mut record = ExperimentRecord {
            study: config.study,
            n: item.n,
            r,
            k_prime: None,
            replicate: item.replicate,
            seed: item.seed,
            misassignment: None,
            k_hat: None,
            k_check: None,
            r_hat,
            statistic: None,
            error: None,
        };
        match config.study {
            Study::Misassignment => {
                match features_at(config, &svds, r) {
                    Ok(z) => {
                        let clustering = clustering::lloyd_cluster(
                            &z,
                            config.params.k(),
                            config.restarts,
                            item.seed,
                        );
                        let tau_hat = clustering::assignment_from_clustering(&clustering);
                        match evaluation::misassignment_fraction(sample.tau(), &tau_hat) {
                            Ok(f) => record.misassignment = Some(f),
                            Err(e) => record.error = Some(error_code(&e)),
                        }
                    }
                    Err(e) => record.error = Some(error_code(&e)),
                }
                records.push(record);
            }
            Study::Kstat => match features_at(config, &svds, r) {
                Ok(z) => {
                    let cfg = config.clusterer(item.seed);
                    let r_total = r * sample.num_modalities();
                    let k_max = selection::default_k_max(r_total, item.n);
                    let k_hat = selection::estimate_k_hat(&z, config.xi, k_max, &cfg)
                        .ok()
                        .and_then(|o| o.k_hat);
                    let k_check = selection::estimate_k_check(&z, config.zeta, config.theta, &cfg)
                        .ok()
                        .map(|o| o.k_check);
                    for &k_prime in &config.kprime_list {
                        let clustering =
                            clustering::lloyd_cluster(&z, k_prime, config.restarts, item.seed);
                        let mut row = record.clone();
                        row.k_prime = Some(k_prime);
                        row.statistic = Some(selection::statistic(clustering.residual(), item.n));
                        row.k_hat = k_hat;
                        row.k_check = k_check;
                        records.push(row);
                    }
                }
                Err(e) => {
                    for &k_prime in &config.kprime_list {
                        let mut row = record.clone();
                        row.k_prime = Some(k_prime);
                        row.error = Some(error_code(&e));
                        records.push(row);
                    }
                }
            },
            Study::Bounds => unreachable!("bounds study handled separately"),
        }
        timings.push(TimingRow {
            label: format!(
                "{}/n{}/rep{}/r{}",
                config.study, item.n, item.replicate, r
            ),
            wall_ms: t0.elapsed().as_millis(),
        });
    }
    (records, timings)
}

fn run_bounds_study(config: &ExperimentConfig) -> Result<StudyOutput> {
    let factors = config.params.factorize_all();
    let constants = model::compute_constants(&config.params, &factors)?;
    let ranks: Vec<usize> = factors.iter().map(|f| f.rank).collect();

    let mut bound_records = Vec::new();
    let mut timings = Vec::new();
    if config.growth {
        let results: Vec<(Vec<BoundRecord>, Vec<TimingRow>)> = (0..config.replicates)
            .into_par_iter()
            .map(|replicate| {
                let seed = config.seed.offset_stream(replicate as u64);
                let mut recs = Vec::new();
                let mut times = Vec::new();
                let mut sample =
                    GraphSample::empty(config.params.num_modalities(), config.params.directed());
                for &n in &config.n_list {
                    sample = grow_sample_to(sample, &config.params, seed, n);
                    let item = Item {
                        n,
                        replicate,
                        seed,
                    };
                    let (rs, ts) = bounds_item_for_sample(config, &item, &sample, &constants, &ranks);
                    recs.extend(rs);
                    times.extend(ts);
                }
                (recs, times)
            })
            .collect();
        let mut by_replicate: Vec<Vec<BoundRecord>> = Vec::new();
        for (rs, ts) in results {
            by_replicate.push(rs);
            timings.extend(ts);
        }
        for &n in &config.n_list {
            for replicate_records in &by_replicate {
                bound_records.extend(replicate_records.iter().filter(|r| r.n == n).cloned());
            }
        }
    } else {
        let work = items(config);
        let results: Vec<(Vec<BoundRecord>, Vec<TimingRow>)> = work
            .par_iter()
            .map(|item| {
                let sample = sampler::sample_graph(item.n, &config.params, item.seed);
                bounds_item_for_sample(config, item, &sample, &constants, &ranks)
            })
            .collect();
        for (rs, ts) in results {
            bound_records.extend(rs);
            timings.extend(ts);
        }
    }
    let bound_aggregates = aggregate_bounds(&bound_records);
    Ok(StudyOutput {
        bound_records,
        bound_aggregates,
        timings,
        ..Default::default()
    })
}

fn bounds_item_for_sample(
    config: &ExperimentConfig,
    item: &Item,
    sample: &GraphSample,
    constants: &model::ModelConstants,
    ranks: &[usize],
) -> (Vec<BoundRecord>, Vec<TimingRow>) {
    let t0 = Instant::now();
    let mut records = Vec::new();
    for s in 0..sample.num_modalities() {
        let a = sample.adjacency_f64(s);
        let p = diagnostics::probability_matrix(sample.tau(), config.params.modality(s));
        let reports = diagnostics::full_report(&a, &p, ranks[s], constants);
        records.extend(reports.into_iter().map(|report| BoundRecord {
            n: item.n,
            modality: s,
            replicate: item.replicate,
            seed: item.seed,
            report,
        }));
    }
    let timings = vec![TimingRow {
        label: format!("{}/n{}/rep{}", config.study, item.n, item.replicate),
        wall_ms: t0.elapsed().as_millis(),
    }];
    (records, timings)
}

fn error_code(e: &Error) -> String {
    // Single token, comma free, stable across runs.
    let text = e.to_string();
    let head: String = text
        .chars()
        .map(|c| if c == ',' { ';' } else { c })
        .take(120)
        .collect();
    head
}

fn mean_and_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

fn aggregate_records(
    config: &ExperimentConfig,
    records: &[ExperimentRecord],
) -> Vec<AggregateRow> {
    let metric: &'static str = match config.study {
        Study::Misassignment => "misassignment",
        Study::Kstat => "statistic",
        Study::Bounds => "",
    };
    let mut cells: Vec<(usize, usize, Option<usize>)> = Vec::new();
    for rec in records {
        let key = (rec.n, rec.r, rec.k_prime);
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    cells
        .into_iter()
        .map(|(n, r, k_prime)| {
            let values: Vec<f64> = records
                .iter()
                .filter(|rec| rec.n == n && rec.r == r && rec.k_prime == k_prime)
                .filter_map(|rec| match config.study {
                    Study::Misassignment => rec.misassignment,
                    Study::Kstat => rec.statistic,
                    Study::Bounds => None,
                })
                .collect();
            let errors = records
                .iter()
                .filter(|rec| {
                    rec.n == n && rec.r == r && rec.k_prime == k_prime && rec.error.is_some()
                })
                .count();
            let (mean, stddev) = mean_and_stddev(&values);
            AggregateRow {
                study: config.study,
                n,
                r,
                k_prime,
                metric,
                count_ok: values.len(),
                count_err: errors,
                mean,
                stddev,
            }
        })
        .collect()
}

fn aggregate_bounds(records: &[BoundRecord]) -> Vec<BoundAggregateRow> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for rec in records {
        let key = (rec.report.name.clone(), rec.n);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(name, n)| {
            let matching: Vec<&BoundRecord> = records
                .iter()
                .filter(|rec| rec.report.name == name && rec.n == n)
                .collect();
            BoundAggregateRow {
                name,
                n,
                passes: matching.iter().filter(|rec| rec.report.holds).count(),
                total: matching.len(),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Tabular output

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, T::to_string)
}

/// Writes study records as CSV.
pub fn write_records_csv(w: &mut impl Write, records: &[ExperimentRecord]) -> Result<()> {
    writeln!(
        w,
        "study,n,r,k_prime,replicate,seed_value,seed_stream,misassignment,k_hat,k_check,r_hat,statistic,error"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.study,
            r.n,
            r.r,
            opt(&r.k_prime),
            r.replicate,
            r.seed.value,
            r.seed.stream,
            opt(&r.misassignment),
            opt(&r.k_hat),
            opt(&r.k_check),
            opt(&r.r_hat),
            opt(&r.statistic),
            r.error.clone().unwrap_or_default()
        )?;
    }
    Ok(())
}

/// Writes bound records as CSV.
pub fn write_bound_records_csv(w: &mut impl Write, records: &[BoundRecord]) -> Result<()> {
    writeln!(
        w,
        "name,n,modality,replicate,seed_value,seed_stream,lhs,rhs,holds,margin"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.report.name,
            r.n,
            r.modality,
            r.replicate,
            r.seed.value,
            r.seed.stream,
            r.report.lhs,
            r.report.rhs,
            r.report.holds,
            r.report.margin
        )?;
    }
    Ok(())
}

/// Writes per-cell aggregates as CSV.
pub fn write_aggregates_csv(w: &mut impl Write, rows: &[AggregateRow]) -> Result<()> {
    writeln!(w, "study,n,r,k_prime,metric,count_ok,count_err,mean,stddev")?;
    for a in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            a.study,
            a.n,
            a.r,
            opt(&a.k_prime),
            a.metric,
            a.count_ok,
            a.count_err,
            a.mean,
            a.stddev
        )?;
    }
    Ok(())
}

/// Writes per-bound pass rates as CSV.
pub fn write_bound_aggregates_csv(w: &mut impl Write, rows: &[BoundAggregateRow]) -> Result<()> {
    writeln!(w, "name,n,passes,total,pass_rate")?;
    for a in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            a.name,
            a.n,
            a.passes,
            a.total,
            a.passes as f64 / a.total as f64
        )?;
    }
    Ok(())
}

fn write_timings_csv(w: &mut impl Write, rows: &[TimingRow]) -> Result<()> {
    writeln!(w, "label,wall_ms")?;
    for t in rows {
        writeln!(w, "{},{}", t.label, t.wall_ms)?;
    }
    Ok(())
}

/// Writes records, aggregates, the run manifest, and the timing sidecar into
/// `dir`. The manifest and the record/aggregate tables are deterministic
/// functions of `(config, seed)`; `timings.csv` is informational.
pub fn write_study_output(
    dir: impl AsRef<Path>,
    config: &ExperimentConfig,
    output: &StudyOutput,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    match config.study {
        Study::Bounds => {
            io::write_file(dir.join("bounds.csv"), |w| {
                write_bound_records_csv(w, &output.bound_records)
            })?;
            io::write_file(dir.join("aggregates.csv"), |w| {
                write_bound_aggregates_csv(w, &output.bound_aggregates)
            })?;
        }
        _ => {
            io::write_file(dir.join("records.csv"), |w| {
                write_records_csv(w, &output.records)
            })?;
            io::write_file(dir.join("aggregates.csv"), |w| {
                write_aggregates_csv(w, &output.aggregates)
            })?;
        }
    }
    let manifest = format!(
        "library_version = \"{}\"\n\n{}",
        crate::VERSION,
        config.to_toml()
    );
    std::fs::write(dir.join("manifest.toml"), manifest)?;
    io::write_file(dir.join("timings.csv"), |w| {
        write_timings_csv(w, &output.timings)
    })?;
    Ok(())
}
