//! Estimators for the number of blocks.
//!
//! Two estimators over successive part counts `K'`:
//!
//! * `K-hat` — the least `K'` whose clustering residual `||C - Z||_F` drops
//!   to `n^xi`, `xi` in `(3/8, 1/2)`.
//! * `K-check` — the greatest `K'` up to `floor(1/theta)` whose parts all
//!   exceed `theta * n` vertices with centroid separation at least `zeta`.
//!
//! Both record a full trace of the examined `K'` values.

use ndarray::Array2;

use crate::clustering::{self, Clustering};
use crate::embedding::{self, KnowledgeMode};
use crate::sampler::{GraphSample, Seed};
use crate::{Error, Result};

/// Lower exclusive bound on `xi`.
pub const XI_MIN: f64 = 3.0 / 8.0;
/// Upper exclusive bound on `xi`.
pub const XI_MAX: f64 = 0.5;

/// Clusterer settings shared by the selection loops.
#[derive(Debug, Clone, Copy)]
pub struct ClustererConfig {
    pub restarts: usize,
    pub seed: Seed,
}

impl ClustererConfig {
    pub fn new(seed: Seed) -> Self {
        Self {
            restarts: clustering::DEFAULT_RESTARTS,
            seed,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// One examined part count.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub k_prime: usize,
    /// Frobenius residual `||C - Z||_F` (not squared).
    pub objective: f64,
    /// `log_n` of the residual.
    pub statistic: f64,
    /// Smallest part cardinality (zero when a part is empty).
    pub min_part: usize,
    /// Minimum distance between centroids of nonempty parts.
    pub separation: f64,
}

/// Every `K'` examined by a selection run, in order.
#[derive(Debug, Clone, Default)]
pub struct SelectionTrace {
    pub rows: Vec<TraceRow>,
}

impl SelectionTrace {
    fn push(&mut self, k_prime: usize, n: usize, clustering: &Clustering) {
        let objective = clustering.residual();
        self.rows.push(TraceRow {
            k_prime,
            objective,
            statistic: statistic(objective, n),
            min_part: clustering.min_part_size(),
            separation: clustering.centroid_separation(),
        });
    }
}

/// `log_n` of the residual; negative infinity for a zero residual.
pub fn statistic(residual: f64, n: usize) -> f64 {
    residual.ln() / (n as f64).ln()
}

/// Result of the residual-threshold estimator.
#[derive(Debug)]
pub struct KHatOutcome {
    /// Least qualifying `K'`, or `None` when no `K' <= k_max` qualifies.
    pub k_hat: Option<usize>,
    pub trace: SelectionTrace,
    /// The clustering at `k_hat`, when one was found.
    pub clustering: Option<Clustering>,
}

/// Least `K' <= k_max` with `||C - Z||_F <= n^xi`.
///
/// The loop stops at the first success, so the trace covers `1..=K-hat` on
/// success and `1..=k_max` on failure.
pub fn estimate_k_hat(
    z: &Array2<f64>,
    xi: f64,
    k_max: usize,
    config: &ClustererConfig,
) -> Result<KHatOutcome> {
    if xi.is_nan() || xi <= XI_MIN || xi >= XI_MAX {
        return Err(Error::XiOutOfRange(xi));
    }
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let n = z.nrows();
    if n < 2 {
        return Err(Error::DimensionError(
            "block-count selection needs at least two vertices".into(),
        ));
    }
    let threshold = (n as f64).powf(xi);
    let mut trace = SelectionTrace::default();
    for k_prime in 1..=k_max {
        let clustering = clustering::lloyd_cluster(z, k_prime, config.restarts, config.seed);
        trace.push(k_prime, n, &clustering);
        if clustering.residual() <= threshold {
            return Ok(KHatOutcome {
                k_hat: Some(k_prime),
                trace,
                clustering: Some(clustering),
            });
        }
    }
    Ok(KHatOutcome {
        k_hat: None,
        trace,
        clustering: None,
    })
}

/// Evaluates the residual threshold on an existing trace, without new
/// clusterings. Useful for comparing several `xi` values on shared results.
pub fn k_hat_from_trace(trace: &SelectionTrace, n: usize, xi: f64) -> Option<usize> {
    let threshold = (n as f64).powf(xi);
    trace
        .rows
        .iter()
        .find(|row| row.objective <= threshold)
        .map(|row| row.k_prime)
}

/// Default part-count cap for the residual estimator.
pub fn default_k_max(r_total: usize, n: usize) -> usize {
    (2 * r_total + 2).min(n).max(1)
}

/// Result of the part-size/separation estimator.
#[derive(Debug)]
pub struct KCheckOutcome {
    /// Greatest qualifying `K'`; zero when none qualifies.
    pub k_check: usize,
    pub trace: SelectionTrace,
    /// Clustering of every examined `K'`, aligned with the trace rows.
    pub clusterings: Vec<Clustering>,
}

/// Greatest `K' <= floor(1/theta)` whose minimum part size exceeds
/// `theta * n` with centroid separation at least `zeta`.
///
/// `theta` and `zeta` are caller-supplied lower bounds; only positivity (and
/// `theta <= 1`) can be validated because the model constants they relate to
/// are unknown in practice. Returns the sentinel `0` when no `K'` qualifies.
pub fn estimate_k_check(
    z: &Array2<f64>,
    zeta: f64,
    theta: f64,
    config: &ClustererConfig,
) -> Result<KCheckOutcome> {
    if theta.is_nan() || theta <= 0.0 || theta > 1.0 {
        return Err(Error::ThetaOutOfRange(theta));
    }
    if zeta.is_nan() || zeta <= 0.0 {
        return Err(Error::ZetaOutOfRange(zeta));
    }
    let n = z.nrows();
    if n < 2 {
        return Err(Error::DimensionError(
            "block-count selection needs at least two vertices".into(),
        ));
    }
    let k_limit = (1.0 / theta).floor() as usize;
    let mut trace = SelectionTrace::default();
    let mut clusterings = Vec::with_capacity(k_limit);
    let mut k_check = 0usize;
    for k_prime in 1..=k_limit {
        let clustering = clustering::lloyd_cluster(z, k_prime, config.restarts, config.seed);
        trace.push(k_prime, n, &clustering);
        let row = trace.rows.last().unwrap();
        if row.min_part as f64 > theta * n as f64 && row.separation >= zeta {
            k_check = k_prime;
        }
        clusterings.push(clustering);
    }
    Ok(KCheckOutcome {
        k_check,
        trace,
        clusterings,
    })
}

/// Result of the extended procedure: embed, select `K-hat`, partition.
#[derive(Debug)]
pub struct ExtendedPartition {
    pub tau_hat: Vec<usize>,
    pub k_hat: usize,
    pub trace: SelectionTrace,
}

/// Runs the embedding, the residual estimator, and returns the block
/// assignment from the final iteration.
pub fn extended_partition(
    sample: &GraphSample,
    r_per_modality: &[usize],
    mode: KnowledgeMode,
    xi: f64,
    k_max: usize,
    config: &ClustererConfig,
) -> Result<ExtendedPartition> {
    let (_, z) = embedding::embed_sample(sample, r_per_modality, mode)?;
    let outcome = estimate_k_hat(&z, xi, k_max, config)?;
    let threshold = (sample.n() as f64).powf(xi);
    match (outcome.k_hat, outcome.clustering) {
        (Some(k_hat), Some(clustering)) => Ok(ExtendedPartition {
            tau_hat: clustering::assignment_from_clustering(&clustering),
            k_hat,
            trace: outcome.trace,
        }),
        _ => Err(Error::NoKFound { k_max, threshold }),
    }
}
