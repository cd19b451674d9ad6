//! Least-squares row clustering.
//!
//! The target is the matrix `C` with at most `k` distinct-valued rows
//! minimizing `||C - Z||_F`. [`exact_min_sse`] solves this globally by
//! enumerating set partitions (small `n` only); [`lloyd_cluster`] approximates
//! it with seeded k-means++ restarts and Lloyd iteration, which is how every
//! experiment at scale runs.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::sq_dist;
use crate::sampler::Seed;
use crate::{Error, Result};

/// Largest row count accepted by the exact enumerator (Bell-number growth).
pub const EXACT_ENUMERATION_LIMIT: usize = 14;
/// Default number of Lloyd restarts.
pub const DEFAULT_RESTARTS: usize = 50;
const MAX_LLOYD_ITERS: usize = 300;
const REL_IMPROVEMENT_TOL: f64 = 1e-9;

/// A partition of the rows of `Z` into at most `k_parts` parts.
#[derive(Debug, Clone)]
pub struct Clustering {
    k_parts: usize,
    assignment: Vec<usize>,
    centroids: Array2<f64>,
    objective: f64,
}

impl Clustering {
    fn from_labels(z: &Array2<f64>, k_parts: usize, assignment: Vec<usize>) -> Self {
        Self::from_labels_keeping(z, k_parts, assignment, None)
    }

    /// Rebuilds centroids as part means and the objective from labels.
    /// Empty parts keep their position from `carry` when provided.
    fn from_labels_keeping(
        z: &Array2<f64>,
        k_parts: usize,
        assignment: Vec<usize>,
        carry: Option<&Array2<f64>>,
    ) -> Self {
        let (n, d) = z.dim();
        let mut centroids = Array2::<f64>::zeros((k_parts, d));
        let mut counts = vec![0usize; k_parts];
        for (i, &lab) in assignment.iter().enumerate() {
            counts[lab] += 1;
            for c in 0..d {
                centroids[[lab, c]] += z[[i, c]];
            }
        }
        for (lab, &count) in counts.iter().enumerate() {
            if count > 0 {
                for c in 0..d {
                    centroids[[lab, c]] /= count as f64;
                }
            } else if let Some(prev) = carry {
                for c in 0..d {
                    centroids[[lab, c]] = prev[[lab, c]];
                }
            }
        }
        let mut objective = 0.0;
        for i in 0..n {
            objective += sq_dist(
                z.row(i).as_slice().unwrap(),
                centroids.row(assignment[i]).as_slice().unwrap(),
            );
        }
        Self {
            k_parts,
            assignment,
            centroids,
            objective,
        }
    }

    /// Number of parts requested (some may be empty).
    pub fn k_parts(&self) -> usize {
        self.k_parts
    }

    /// Part label of each row, `0..k_parts`.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// `k_parts x d` centroid matrix; rows of empty parts are unconstrained.
    pub fn centroids(&self) -> &Array2<f64> {
        &self.centroids
    }

    /// `||C - Z||_F^2`, the sum of squared row-to-centroid distances.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// `||C - Z||_F`.
    pub fn residual(&self) -> f64 {
        self.objective.sqrt()
    }

    /// The `n x d` matrix whose row `i` is the centroid of row `i`'s part.
    pub fn c_matrix(&self) -> Array2<f64> {
        let d = self.centroids.ncols();
        let mut c = Array2::<f64>::zeros((self.assignment.len(), d));
        for (i, &lab) in self.assignment.iter().enumerate() {
            c.row_mut(i).assign(&self.centroids.row(lab));
        }
        c
    }

    /// Cardinality of every part, including empty ones.
    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k_parts];
        for &lab in &self.assignment {
            sizes[lab] += 1;
        }
        sizes
    }

    /// Size of the smallest part; zero when any part is empty.
    pub fn min_part_size(&self) -> usize {
        self.part_sizes().into_iter().min().unwrap_or(0)
    }

    /// Minimum pairwise distance between centroids of nonempty parts.
    ///
    /// Infinite when fewer than two parts are nonempty; zero when two
    /// nonempty parts share a centroid value.
    pub fn centroid_separation(&self) -> f64 {
        let sizes = self.part_sizes();
        let nonempty: Vec<usize> = (0..self.k_parts).filter(|&j| sizes[j] > 0).collect();
        let mut sep = f64::INFINITY;
        for a in 0..nonempty.len() {
            for b in (a + 1)..nonempty.len() {
                let d = sq_dist(
                    self.centroids.row(nonempty[a]).as_slice().unwrap(),
                    self.centroids.row(nonempty[b]).as_slice().unwrap(),
                )
                .sqrt();
                sep = sep.min(d);
            }
        }
        sep
    }
}

/// Canonical relabeling: the part containing the lowest row index gets label
/// 0, the next unseen part label 1, and so on.
pub fn assignment_from_clustering(clustering: &Clustering) -> Vec<usize> {
    let mut remap = vec![usize::MAX; clustering.k_parts];
    let mut next = 0usize;
    clustering
        .assignment
        .iter()
        .map(|&lab| {
            if remap[lab] == usize::MAX {
                remap[lab] = next;
                next += 1;
            }
            remap[lab]
        })
        .collect()
}

/// Globally minimal sum-of-squares clustering into at most `k` parts.
///
/// Enumerates set partitions as restricted growth strings with
/// branch-and-bound pruning on the partial objective, which is monotone
/// under point insertion.
pub fn exact_min_sse(z: &Array2<f64>, k: usize) -> Result<Clustering> {
    let (n, d) = z.dim();
    assert!(k >= 1, "k must be positive");
    if n == 0 {
        return Err(Error::EmptyInput("no rows to cluster".into()));
    }
    if n > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            max: EXACT_ENUMERATION_LIMIT,
        });
    }
    let k_eff = k.min(n);

    struct State<'a> {
        z: &'a Array2<f64>,
        d: usize,
        k_eff: usize,
        labels: Vec<usize>,
        counts: Vec<usize>,
        sums: Vec<Vec<f64>>,
        sumsq: Vec<f64>,
        row_sq: Vec<f64>,
        sse: f64,
        best_sse: f64,
        best_labels: Vec<usize>,
    }

    impl State<'_> {
        fn block_sse(&self, b: usize) -> f64 {
            if self.counts[b] == 0 {
                return 0.0;
            }
            let norm2: f64 = self.sums[b].iter().map(|s| s * s).sum();
            self.sumsq[b] - norm2 / self.counts[b] as f64
        }

        fn recurse(&mut self, i: usize, used: usize) {
            if i == self.z.nrows() {
                if self.sse < self.best_sse {
                    self.best_sse = self.sse;
                    self.best_labels.copy_from_slice(&self.labels);
                }
                return;
            }
            let row = self.z.row(i);
            let limit = (used + 1).min(self.k_eff);
            for b in 0..limit {
                let before = self.block_sse(b);
                self.counts[b] += 1;
                for c in 0..self.d {
                    self.sums[b][c] += row[c];
                }
                self.sumsq[b] += self.row_sq[i];
                let delta = self.block_sse(b) - before;
                self.sse += delta;
                self.labels[i] = b;
                if self.sse < self.best_sse {
                    self.recurse(i + 1, used.max(b + 1));
                }
                self.sse -= delta;
                self.counts[b] -= 1;
                for c in 0..self.d {
                    self.sums[b][c] -= row[c];
                }
                self.sumsq[b] -= self.row_sq[i];
            }
        }
    }

    let row_sq: Vec<f64> = (0..n)
        .map(|i| z.row(i).iter().map(|v| v * v).sum())
        .collect();
    let mut state = State {
        z,
        d,
        k_eff,
        labels: vec![0; n],
        counts: vec![0; k_eff],
        sums: vec![vec![0.0; d]; k_eff],
        sumsq: vec![0.0; k_eff],
        row_sq,
        sse: 0.0,
        best_sse: f64::INFINITY,
        best_labels: vec![0; n],
    };
    state.recurse(0, 0);
    let labels = state.best_labels;
    Ok(Clustering::from_labels(z, k, labels))
}

/// Best of `restarts` independent seeded Lloyd runs.
///
/// Each restart draws a k-means++ initialization from its own generator
/// stream, iterates assignment and mean updates (reseeding empty parts at
/// the point farthest from the stranded centroid), and stops when the
/// relative objective improvement falls below 1e-9 or after 300 iterations.
/// Restarts run in parallel; the winner is the lexicographically smallest
/// `(objective, restart index)`, so the result does not depend on scheduling.
pub fn lloyd_cluster(z: &Array2<f64>, k: usize, restarts: usize, seed: Seed) -> Clustering {
    assert!(k >= 1, "k must be positive");
    assert!(restarts >= 1, "at least one restart is required");
    let runs: Vec<Clustering> = (0..restarts)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.cluster_rng(t as u64);
            lloyd_single(z, k, &mut rng).0
        })
        .collect();
    runs.into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.objective.total_cmp(&b.objective).then(ia.cmp(ib)))
        .map(|(_, c)| c)
        .expect("at least one restart")
}

/// One seeded Lloyd run; also returns the per-iteration assignment
/// objectives for the monotonicity checks.
pub(crate) fn lloyd_single(
    z: &Array2<f64>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (Clustering, Vec<f64>) {
    let (n, _d) = z.dim();
    let mut centroids = kmeanspp_init(z, k, rng);
    let mut labels = vec![0usize; n];
    let mut trace = Vec::new();
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_LLOYD_ITERS {
        let mut objective = 0.0;
        for i in 0..n {
            let (lab, dist) = nearest_centroid(z, i, &centroids, k);
            labels[i] = lab;
            objective += dist;
        }
        trace.push(objective);
        if objective == 0.0
            || (prev.is_finite() && prev - objective < REL_IMPROVEMENT_TOL * prev)
        {
            break;
        }
        prev = objective;
        update_means(z, &labels, &mut centroids, k);
        repair_empty_parts(z, &labels, &mut centroids, k);
    }
    let clustering = Clustering::from_labels_keeping(z, k, labels, Some(&centroids));
    trace.push(clustering.objective);
    (clustering, trace)
}

fn nearest_centroid(z: &Array2<f64>, i: usize, centroids: &Array2<f64>, k: usize) -> (usize, f64) {
    let row = z.row(i);
    let row = row.as_slice().unwrap();
    let mut best = (0usize, f64::INFINITY);
    for j in 0..k {
        let d = sq_dist(row, centroids.row(j).as_slice().unwrap());
        // Strict comparison keeps the lowest index on ties.
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn update_means(z: &Array2<f64>, labels: &[usize], centroids: &mut Array2<f64>, k: usize) {
    let d = z.ncols();
    let mut counts = vec![0usize; k];
    let mut sums = Array2::<f64>::zeros((k, d));
    for (i, &lab) in labels.iter().enumerate() {
        counts[lab] += 1;
        for c in 0..d {
            sums[[lab, c]] += z[[i, c]];
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            for c in 0..d {
                centroids[[j, c]] = sums[[j, c]] / counts[j] as f64;
            }
        }
        // Empty parts keep their position until repaired.
    }
}

fn repair_empty_parts(z: &Array2<f64>, labels: &[usize], centroids: &mut Array2<f64>, k: usize) {
    let n = z.nrows();
    let mut counts = vec![0usize; k];
    for &lab in labels {
        counts[lab] += 1;
    }
    let mut taken = vec![false; n];
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut far = (usize::MAX, f64::NEG_INFINITY);
        for i in 0..n {
            if taken[i] {
                continue;
            }
            let d = sq_dist(
                z.row(i).as_slice().unwrap(),
                centroids.row(j).as_slice().unwrap(),
            );
            if d > far.1 {
                far = (i, d);
            }
        }
        if far.0 != usize::MAX {
            taken[far.0] = true;
            let point = z.row(far.0).to_owned();
            centroids.row_mut(j).assign(&point);
        }
    }
}

/// Greedy distance-weighted seeding: the first center is uniform, each
/// subsequent one is drawn with probability proportional to the squared
/// distance to the nearest chosen center.
fn kmeanspp_init(z: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (n, d) = z.dim();
    let mut centroids = Array2::<f64>::zeros((k, d));
    let first = rng.gen_range(0..n);
    centroids.row_mut(0).assign(&z.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| {
            sq_dist(
                z.row(i).as_slice().unwrap(),
                centroids.row(0).as_slice().unwrap(),
            )
        })
        .collect();
    for j in 1..k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if target < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All points coincide with chosen centers; placement is moot.
            rng.gen_range(0..n)
        };
        centroids.row_mut(j).assign(&z.row(idx));
        for i in 0..n {
            let d = sq_dist(
                z.row(i).as_slice().unwrap(),
                centroids.row(j).as_slice().unwrap(),
            );
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}
