//! Misassignment metric: the number of vertices on which the true and
//! estimated labelings disagree, minimized over bijections of the label sets.
//!
//! The minimization is a linear assignment problem on the confusion matrix,
//! solved by an `O(K^3)` augmenting-path method with potentials. When the two
//! labelings use different numbers of labels the confusion matrix is padded
//! square with zero rows or columns so bijections exist.

use ndarray::Array2;

use crate::{Error, Result};

/// Cross-tabulation of two labelings: entry `(k, l)` counts the vertices
/// with true label `k` and estimated label `l`.
#[derive(Debug, Clone)]
pub struct ConfusionMatrix {
    counts: Array2<u64>,
}

impl ConfusionMatrix {
    /// Builds the confusion matrix; label sets are inferred from the data.
    pub fn new(tau: &[usize], tau_hat: &[usize]) -> Result<Self> {
        if tau.len() != tau_hat.len() {
            return Err(Error::LengthMismatch(tau.len(), tau_hat.len()));
        }
        let rows = tau.iter().copied().max().map_or(0, |m| m + 1);
        let cols = tau_hat.iter().copied().max().map_or(0, |m| m + 1);
        let mut counts = Array2::<u64>::zeros((rows, cols));
        for (&t, &th) in tau.iter().zip(tau_hat) {
            counts[[t, th]] += 1;
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    /// Total number of vertices.
    pub fn n(&self) -> u64 {
        self.counts.sum()
    }

    /// Maximum total agreement achievable by a bijection between the (zero
    /// padded) label sets.
    pub fn max_agreement(&self) -> u64 {
        let (rows, cols) = self.counts.dim();
        let dim = rows.max(cols);
        if dim == 0 {
            return 0;
        }
        let mut padded = Array2::<i64>::zeros((dim, dim));
        for i in 0..rows {
            for j in 0..cols {
                padded[[i, j]] = self.counts[[i, j]] as i64;
            }
        }
        max_assignment(&padded) as u64
    }
}

/// Minimum number of disagreements over all label bijections.
pub fn misassignment_count(tau: &[usize], tau_hat: &[usize]) -> Result<usize> {
    let confusion = ConfusionMatrix::new(tau, tau_hat)?;
    Ok((confusion.n() - confusion.max_agreement()) as usize)
}

/// [`misassignment_count`] divided by the number of vertices.
pub fn misassignment_fraction(tau: &[usize], tau_hat: &[usize]) -> Result<f64> {
    if tau.is_empty() && tau_hat.is_empty() {
        return Ok(0.0);
    }
    Ok(misassignment_count(tau, tau_hat)? as f64 / tau.len() as f64)
}

/// Maximum-total-value perfect assignment on a square matrix.
///
/// Augmenting-path Hungarian method with row/column potentials, minimizing
/// the negated values; `O(dim^3)`.
fn max_assignment(values: &Array2<i64>) -> i64 {
    let dim = values.nrows();
    debug_assert_eq!(dim, values.ncols());
    // 1-based arrays; index 0 is the virtual unmatched column.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; dim + 1];
    let mut v = vec![0i64; dim + 1];
    let mut matched_row = vec![0usize; dim + 1];
    let mut way = vec![0usize; dim + 1];
    for i in 1..=dim {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; dim + 1];
        let mut used = vec![false; dim + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=dim {
                if used[j] {
                    continue;
                }
                let cur = -values[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=dim {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0i64;
    for j in 1..=dim {
        if matched_row[j] > 0 {
            total += values[[matched_row[j] - 1, j - 1]];
        }
    }
    total
}
