//! Scaled spectral embeddings of adjacency matrices.
//!
//! Each modality is decomposed as `A = U Sigma V^T`; the embedding keeps the
//! top `R` singular triples scaled by the square roots of their singular
//! values, `X = U sqrt(Sigma)` and `Y = V sqrt(Sigma)`. The full singular
//! value list is retained for rank estimation and the bound checks.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Svd};
use crate::sampler::GraphSample;
use crate::{Error, Result};

/// Which side of the communication matrix is known to have pairwise distinct
/// entries, determining the clustering features: `X`, `Y`, or `[X|Y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KnowledgeMode {
    /// Rows of every modality matrix are pairwise distinct; cluster `X`.
    #[default]
    #[serde(rename = "rows")]
    RowsDistinct,
    /// Columns are pairwise distinct; cluster `Y`.
    #[serde(rename = "columns")]
    ColumnsDistinct,
    /// No side is known distinct; cluster `[X|Y]`.
    #[serde(rename = "neither")]
    Neither,
}

impl std::str::FromStr for KnowledgeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" => Ok(Self::RowsDistinct),
            "columns" => Ok(Self::ColumnsDistinct),
            "neither" => Ok(Self::Neither),
            other => Err(Error::Parse(format!(
                "unknown mode '{other}' (expected rows|columns|neither)"
            ))),
        }
    }
}

impl std::fmt::Display for KnowledgeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RowsDistinct => "rows",
            Self::ColumnsDistinct => "columns",
            Self::Neither => "neither",
        })
    }
}

/// Spectral embedding of one adjacency matrix.
#[derive(Debug, Clone)]
pub struct ModalityEmbedding {
    /// Embedding dimension used.
    pub r: usize,
    /// All `n` singular values, nonincreasing.
    pub sigma: Vec<f64>,
    /// `n x R` matrix `U sqrt(Sigma)`.
    pub x: Array2<f64>,
    /// `n x R` matrix `V sqrt(Sigma)`.
    pub y: Array2<f64>,
}

impl ModalityEmbedding {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }
}

/// Embeds one adjacency matrix with the top `r` scaled singular triples.
pub fn svd_embed(a: &Array2<f64>, r: usize) -> Result<ModalityEmbedding> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionError(format!(
            "adjacency matrix must be square, got {:?}",
            a.dim()
        )));
    }
    if r == 0 || r > n {
        return Err(Error::DimensionError(format!(
            "embedding dimension {r} must lie in 1..={n}"
        )));
    }
    Ok(truncate_embedding(&linalg::svd_full(a), r))
}

/// Builds the embedding from a precomputed decomposition.
///
/// Splitting this out lets a harness decompose once and reuse the result for
/// several values of `r`; the output is identical to [`svd_embed`] at `r`.
pub fn truncate_embedding(svd: &Svd, r: usize) -> ModalityEmbedding {
    let n = svd.u.nrows();
    assert!(r >= 1 && r <= n, "embedding dimension out of range");
    let mut x = Array2::<f64>::zeros((n, r));
    let mut y = Array2::<f64>::zeros((n, r));
    for j in 0..r {
        // A zero singular value inside the top R yields zero columns.
        let root = svd.sigma[j].max(0.0).sqrt();
        for i in 0..n {
            x[[i, j]] = svd.u[[i, j]] * root;
            y[[i, j]] = svd.vt[[j, i]] * root;
        }
    }
    ModalityEmbedding {
        r,
        sigma: svd.sigma.clone(),
        x,
        y,
    }
}

/// Concatenates per-modality embeddings into the clustering feature matrix.
///
/// Column blocks appear in modality order; in [`KnowledgeMode::Neither`] all
/// `X` blocks precede all `Y` blocks.
pub fn assemble_features(
    embeddings: &[ModalityEmbedding],
    mode: KnowledgeMode,
) -> Result<Array2<f64>> {
    if embeddings.is_empty() {
        return Err(Error::EmptyInput("no embeddings to assemble".into()));
    }
    let n = embeddings[0].n();
    if embeddings.iter().any(|e| e.n() != n) {
        return Err(Error::DimensionError(
            "embeddings disagree on the number of vertices".into(),
        ));
    }
    let total_r: usize = embeddings.iter().map(|e| e.r).sum();
    let d = match mode {
        KnowledgeMode::Neither => 2 * total_r,
        _ => total_r,
    };
    let mut z = Array2::<f64>::zeros((n, d));
    let mut col = 0;
    let mut paste = |block: &Array2<f64>, col: &mut usize| {
        z.slice_mut(ndarray::s![.., *col..*col + block.ncols()])
            .assign(block);
        *col += block.ncols();
    };
    match mode {
        KnowledgeMode::RowsDistinct => {
            for e in embeddings {
                paste(&e.x, &mut col);
            }
        }
        KnowledgeMode::ColumnsDistinct => {
            for e in embeddings {
                paste(&e.y, &mut col);
            }
        }
        KnowledgeMode::Neither => {
            for e in embeddings {
                paste(&e.x, &mut col);
            }
            for e in embeddings {
                paste(&e.y, &mut col);
            }
        }
    }
    Ok(z)
}

/// Embeds every modality of a sample with its own dimension and assembles
/// the feature matrix.
pub fn embed_sample(
    sample: &GraphSample,
    r_per_modality: &[usize],
    mode: KnowledgeMode,
) -> Result<(Vec<ModalityEmbedding>, Array2<f64>)> {
    if r_per_modality.len() != sample.num_modalities() {
        return Err(Error::DimensionError(format!(
            "{} embedding dimensions for {} modalities",
            r_per_modality.len(),
            sample.num_modalities()
        )));
    }
    let embeddings: Vec<ModalityEmbedding> = (0..sample.num_modalities())
        .map(|s| svd_embed(&sample.adjacency_f64(s), r_per_modality[s]))
        .collect::<Result<_>>()?;
    let z = assemble_features(&embeddings, mode)?;
    Ok((embeddings, z))
}

/// Counts the singular values exceeding `n^omega`, `omega` in `(3/4, 1)`.
///
/// A consistent estimator of the communication matrix rank as `n` grows;
/// at moderate `n` it is conservative because the signal singular values
/// scale linearly in `n` against a threshold that is sublinear only
/// eventually.
pub fn estimate_rank(sigma: &[f64], n: usize, omega: f64) -> Result<usize> {
    if omega.is_nan() || omega <= 0.75 || omega >= 1.0 {
        return Err(Error::OmegaOutOfRange(omega));
    }
    let threshold = (n as f64).powf(omega);
    Ok(sigma.iter().filter(|&&s| s > threshold).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_params;
    use crate::sampler::{sample_graph, Seed};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_matrix_embeds_to_zero() {
        let a = Array2::<f64>::zeros((5, 5));
        let e = svd_embed(&a, 3).unwrap();
        assert!(e.sigma.iter().all(|&s| s == 0.0));
        assert!(e.x.iter().all(|&v| v == 0.0));
        assert!(e.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_out_of_range_dimension() {
        let a = Array2::<f64>::zeros((4, 4));
        assert!(matches!(
            svd_embed(&a, 5),
            Err(Error::DimensionError(_))
        ));
        assert!(matches!(svd_embed(&a, 0), Err(Error::DimensionError(_))));
    }

    #[test]
    fn truncation_error_matches_discarded_spectrum() {
        // ||A - X Y^T||_F^2 must equal the sum of squared discarded singular
        // values, the defining property of the best rank-R approximation.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 30;
        let mut a = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let bit = f64::from(rng.gen::<f64>() < 0.3);
                a[[i, j]] = bit;
                a[[j, i]] = bit;
            }
        }
        for r in [1, 3, 10] {
            let e = svd_embed(&a, r).unwrap();
            let recon = e.x.dot(&e.y.t());
            let err2 = linalg::frobenius_norm(&(&a - &recon)).powi(2);
            let tail2: f64 = e.sigma[r..].iter().map(|s| s * s).sum();
            let scale = tail2.max(1.0);
            assert!((err2 - tail2).abs() <= 1e-8 * scale, "r={r}: {err2} vs {tail2}");
        }
    }

    #[test]
    fn column_norms_carry_singular_values() {
        let params = test_params::assortative_rank2();
        let g = sample_graph(120, &params, Seed::new(5, 0));
        let e = svd_embed(&g.adjacency_f64(0), 4).unwrap();
        for j in 0..4 {
            let xn: f64 = e.x.column(j).iter().map(|v| v * v).sum();
            let yn: f64 = e.y.column(j).iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(xn, e.sigma[j], epsilon = 1e-8);
            assert_abs_diff_eq!(yn, e.sigma[j], epsilon = 1e-8);
        }
        assert!(e.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(e.sigma[0] <= 120.0);
    }

    #[test]
    fn sign_flips_leave_row_distances_unchanged() {
        let params = test_params::assortative_rank2();
        let g = sample_graph(60, &params, Seed::new(6, 0));
        let e = svd_embed(&g.adjacency_f64(0), 3).unwrap();
        let mut flipped = e.x.clone();
        for j in [0usize, 2] {
            for i in 0..60 {
                flipped[[i, j]] = -flipped[[i, j]];
            }
        }
        for i in 0..60 {
            for j in (i + 1)..60 {
                let d0 = linalg::sq_dist(
                    e.x.row(i).as_slice().unwrap(),
                    e.x.row(j).as_slice().unwrap(),
                );
                let d1 = linalg::sq_dist(
                    flipped.row(i).as_slice().unwrap(),
                    flipped.row(j).as_slice().unwrap(),
                );
                assert_abs_diff_eq!(d0.sqrt(), d1.sqrt(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn feature_assembly_shapes_and_order() {
        let params = test_params::assortative_rank2();
        let g = sample_graph(40, &params, Seed::new(7, 0));
        let a = g.adjacency_f64(0);
        let e2 = svd_embed(&a, 2).unwrap();
        let e3 = svd_embed(&a, 3).unwrap();

        let z = assemble_features(std::slice::from_ref(&e2), KnowledgeMode::RowsDistinct).unwrap();
        assert_eq!(z, e2.x);

        let z = assemble_features(std::slice::from_ref(&e2), KnowledgeMode::Neither).unwrap();
        assert_eq!(z.dim(), (40, 4));
        assert_eq!(z.slice(ndarray::s![.., ..2]), e2.x);
        assert_eq!(z.slice(ndarray::s![.., 2..]), e2.y);

        let z = assemble_features(
            &[e2.clone(), e3.clone()],
            KnowledgeMode::RowsDistinct,
        )
        .unwrap();
        assert_eq!(z.dim(), (40, 5));
        assert_eq!(z.slice(ndarray::s![.., ..2]), e2.x);
        assert_eq!(z.slice(ndarray::s![.., 2..]), e3.x);

        let z = assemble_features(&[e2.clone(), e3.clone()], KnowledgeMode::ColumnsDistinct)
            .unwrap();
        assert_eq!(z.slice(ndarray::s![.., ..2]), e2.y);

        assert!(matches!(
            assemble_features(&[], KnowledgeMode::RowsDistinct),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn rank_estimate_validates_omega_and_handles_zero() {
        assert!(matches!(
            estimate_rank(&[1.0], 10, 0.5),
            Err(Error::OmegaOutOfRange(_))
        ));
        assert!(matches!(
            estimate_rank(&[1.0], 10, 1.0),
            Err(Error::OmegaOutOfRange(_))
        ));
        assert_eq!(estimate_rank(&[0.0, 0.0, 0.0], 50, 0.8).unwrap(), 0);
    }

    #[test]
    fn rank_estimate_is_monotone_in_omega() {
        let params = test_params::assortative_full_rank();
        let g = sample_graph(300, &params, Seed::new(8, 0));
        let sigma = linalg::singular_values(&g.adjacency_f64(0));
        let mut last = usize::MAX;
        for omega in [0.76, 0.8, 0.85, 0.9, 0.95, 0.99] {
            let r = estimate_rank(&sigma, 300, omega).unwrap();
            assert!(r <= last);
            last = r;
        }
    }

    // The count for the noiseless edge-probability matrix is checked against
    // an independent K x K route: the nonzero spectrum of P equals the
    // spectrum of diag(n_k)^{1/2} M diag(n_k)^{1/2}.
    #[test]
    fn noiseless_rank_count_matches_small_matrix_oracle() {
        let params = test_params::assortative_rank2();
        let n = 400;
        let tau = crate::sampler::sample_tau(n, params.rho(), Seed::new(400, 0));
        let p = crate::diagnostics::probability_matrix(&tau, params.modality(0));
        let sigma_p = linalg::singular_values(&p);

        let mut counts = [0f64; 3];
        for &t in &tau {
            counts[t] += 1.0;
        }
        let m = params.modality(0);
        let mut small = Array2::<f64>::zeros((3, 3));
        for i in 0..3 {
            for j in 0..3 {
                small[[i, j]] = counts[i].sqrt() * m[[i, j]] * counts[j].sqrt();
            }
        }
        let oracle_sigma: Vec<f64> = linalg::symmetric_eigenvalues(&small)
            .into_iter()
            .map(f64::abs)
            .collect();
        let threshold = (n as f64).powf(0.8);
        let oracle_count = oracle_sigma.iter().filter(|&&s| s > threshold).count();

        assert_eq!(
            estimate_rank(&sigma_p, n, 0.8).unwrap(),
            oracle_count,
            "sigma(P) head: {:?}",
            &sigma_p[..3]
        );
        // Cross-check the top singular value itself between the two routes.
        let top_oracle = oracle_sigma.iter().cloned().fold(0.0, f64::max);
        assert_abs_diff_eq!(sigma_p[0], top_oracle, epsilon = 1e-6 * n as f64);
    }

    // Frozen regression value: at this scale the signal singular values sit
    // well below n^0.8, so the count picks up only the leading one.
    #[test]
    fn sampled_rank_count_regression_at_n1600() {
        let params = test_params::assortative_full_rank();
        let g = sample_graph(1600, &params, Seed::new(1600, 0));
        let sigma = linalg::singular_values(&g.adjacency_f64(0));
        assert_eq!(estimate_rank(&sigma, 1600, 0.8).unwrap(), 1);
    }

    #[test]
    fn trailing_embedding_energy_is_bounded_by_first_discarded_value() {
        // ||X_c||_F <= sqrt(R - r_hat) * sigma_{r_hat+1}^{1/2}, forced by the
        // sqrt(Sigma) column scaling.
        let params = test_params::assortative_full_rank();
        let g = sample_graph(200, &params, Seed::new(9, 0));
        let e = svd_embed(&g.adjacency_f64(0), 6).unwrap();
        let r_hat = estimate_rank(&e.sigma, 200, 0.8).unwrap().min(e.r);
        let tail: f64 = (r_hat..e.r)
            .map(|j| e.x.column(j).iter().map(|v| v * v).sum::<f64>())
            .sum();
        let bound = ((e.r - r_hat) as f64).sqrt() * e.sigma[r_hat].sqrt();
        assert!(tail.sqrt() <= bound + 1e-9, "{} vs {}", tail.sqrt(), bound);
    }
}
