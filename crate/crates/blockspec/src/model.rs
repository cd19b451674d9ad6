//! Stochastic block model parameters and the analysis quantities derived
//! from them.
//!
//! A model is `(K, rho, M^(1)..M^(S), directed)`: `K` blocks, block
//! probability vector `rho`, and one `K x K` communication probability matrix
//! per modality. Identifiability requires every pair of blocks to differ in
//! some row or column of some modality. The latent factorization `M = mu nu^T`
//! and the constants `alpha`, `beta`, `gamma` are not needed to run the
//! partitioning procedure itself; they feed the diagnostic bound checks.

use ndarray::Array2;

use crate::linalg::{self, sq_dist};
use crate::{Error, Result};

/// Additive tolerance for `sum(rho) == 1`.
pub const RHO_SUM_TOL: f64 = 1e-12;
/// Euclidean tolerance below which two rows or columns count as equal-valued.
pub const ROW_EQ_TOL: f64 = 1e-10;
/// Pairwise distinguishability threshold for identifiability.
pub const IDENTIFIABILITY_TOL: f64 = 1e-10;
/// Relative singular-value cutoff for numerical rank.
pub const RANK_REL_TOL: f64 = 1e-10;
/// Shrink factor placing the constants strictly inside their inequalities.
const CONSTANT_SHRINK: f64 = 0.99;

/// Validated stochastic block model parameters.
///
/// Construction via [`SbmParams::new`] enforces every invariant; the fields
/// are read-only afterwards.
#[derive(Debug, Clone)]
pub struct SbmParams {
    rho: Vec<f64>,
    modalities: Vec<Array2<f64>>,
    directed: bool,
}

impl SbmParams {
    /// Validates and constructs model parameters.
    ///
    /// Checks, in order: `rho` entries positive and summing to one, matrix
    /// shapes `K x K` with entries in `[0, 1]`, symmetry of every modality
    /// when undirected, and pairwise block identifiability across modalities.
    pub fn new(rho: Vec<f64>, modalities: Vec<Array2<f64>>, directed: bool) -> Result<Self> {
        let k = rho.len();
        if k == 0 {
            return Err(Error::RhoInvalid("empty block probability vector".into()));
        }
        if let Some(bad) = rho.iter().find(|&&r| r <= 0.0 || !r.is_finite()) {
            return Err(Error::RhoInvalid(format!("nonpositive entry {bad}")));
        }
        let sum: f64 = rho.iter().sum();
        if (sum - 1.0).abs() > RHO_SUM_TOL {
            return Err(Error::RhoInvalid(format!("entries sum to {sum}, not 1")));
        }
        if modalities.is_empty() {
            return Err(Error::EmptyInput("at least one modality is required".into()));
        }
        for (s, m) in modalities.iter().enumerate() {
            if m.dim() != (k, k) {
                return Err(Error::DimensionError(format!(
                    "modality {s} has shape {:?}, expected ({k}, {k})",
                    m.dim()
                )));
            }
            if let Some(bad) = m.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::EntryOutOfRange(format!("modality {s} entry {bad}")));
            }
            if !directed {
                for p in 0..k {
                    for q in (p + 1)..k {
                        if m[[p, q]] != m[[q, p]] {
                            return Err(Error::SymmetryViolation(format!(
                                "modality {s}, entries ({p},{q}) and ({q},{p}) differ"
                            )));
                        }
                    }
                }
            }
        }
        // Identifiability: every block pair must differ in some row or column
        // of some modality.
        for p in 0..k {
            for q in (p + 1)..k {
                let distinguishable = modalities.iter().any(|m| {
                    let row_p: Vec<f64> = m.row(p).to_vec();
                    let row_q: Vec<f64> = m.row(q).to_vec();
                    let col_p: Vec<f64> = m.column(p).to_vec();
                    let col_q: Vec<f64> = m.column(q).to_vec();
                    sq_dist(&row_p, &row_q).sqrt() > IDENTIFIABILITY_TOL
                        || sq_dist(&col_p, &col_q).sqrt() > IDENTIFIABILITY_TOL
                });
                if !distinguishable {
                    return Err(Error::NotIdentifiable { p, q });
                }
            }
        }
        Ok(Self {
            rho,
            modalities,
            directed,
        })
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.rho.len()
    }

    /// Block probability vector.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Number of modalities.
    pub fn num_modalities(&self) -> usize {
        self.modalities.len()
    }

    /// Communication matrix of modality `s`.
    pub fn modality(&self, s: usize) -> &Array2<f64> {
        &self.modalities[s]
    }

    /// All communication matrices.
    pub fn modalities(&self) -> &[Array2<f64>] {
        &self.modalities
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Latent factorization of every modality.
    pub fn factorize_all(&self) -> Vec<LatentFactors> {
        self.modalities.iter().map(factorize).collect()
    }
}

/// Rank-revealing factorization `M = mu nu^T`.
#[derive(Debug, Clone)]
pub struct LatentFactors {
    /// `K x r` left factor, `U sqrt(Sigma)` truncated to the numerical rank.
    pub mu: Array2<f64>,
    /// `K x r` right factor, `V sqrt(Sigma)` truncated to the numerical rank.
    pub nu: Array2<f64>,
    /// Numerical rank of `M`.
    pub rank: usize,
}

/// Constants extracted from the model for the spectral bound checks.
///
/// The defaults computed by [`compute_constants`] sit a factor 0.99 inside
/// their strict inequalities; all fields are public so callers may override
/// them from configuration.
#[derive(Debug, Clone, Copy)]
pub struct ModelConstants {
    /// Strictly below every block probability.
    pub alpha: f64,
    /// Strictly below the minimum distance between nonequal latent rows;
    /// `+inf` when no such pair exists (single block).
    pub beta: f64,
    /// Strictly below every eigenvalue of `mu^T mu` and `nu^T nu`.
    pub gamma: f64,
}

/// Number of singular values exceeding `rel_tol` times the largest one.
pub fn numerical_rank(m: &Array2<f64>, rel_tol: f64) -> usize {
    let sigma = linalg::singular_values(m);
    match sigma.first() {
        None => 0,
        Some(&s0) if s0 > 0.0 => sigma.iter().filter(|&&s| s > rel_tol * s0).count(),
        Some(_) => 0,
    }
}

/// Factorizes `M = mu nu^T` through the SVD, truncated to the numerical rank.
///
/// Nonequal rows of `M` map to nonequal rows of `mu`, and nonequal columns of
/// `M` to nonequal rows of `nu`; the reconstruction residual is bounded by
/// `1e-10 * max(1, ||M||_F)`.
pub fn factorize(m: &Array2<f64>) -> LatentFactors {
    let svd = linalg::svd_full(m);
    let k = m.nrows();
    let s0 = svd.sigma.first().copied().unwrap_or(0.0);
    let rank = if s0 == 0.0 {
        0
    } else {
        svd.sigma.iter().filter(|&&s| s > RANK_REL_TOL * s0).count()
    };
    let mut mu = Array2::<f64>::zeros((k, rank));
    let mut nu = Array2::<f64>::zeros((k, rank));
    for j in 0..rank {
        let root = svd.sigma[j].sqrt();
        for i in 0..k {
            mu[[i, j]] = svd.u[[i, j]] * root;
            nu[[i, j]] = svd.vt[[j, i]] * root;
        }
    }
    LatentFactors { mu, nu, rank }
}

/// Derives `alpha`, `beta`, `gamma` from validated parameters and their
/// factorizations.
pub fn compute_constants(params: &SbmParams, factors: &[LatentFactors]) -> Result<ModelConstants> {
    let min_rho = params
        .rho()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let alpha = CONSTANT_SHRINK * min_rho;

    let mut min_sep = f64::INFINITY;
    let mut min_eig = f64::INFINITY;
    for f in factors {
        for factor in [&f.mu, &f.nu] {
            let k = factor.nrows();
            for p in 0..k {
                for q in (p + 1)..k {
                    let d = sq_dist(
                        factor.row(p).as_slice().unwrap(),
                        factor.row(q).as_slice().unwrap(),
                    )
                    .sqrt();
                    // Rows within ROW_EQ_TOL count as equal-valued and impose
                    // no separation constraint.
                    if d > ROW_EQ_TOL {
                        min_sep = min_sep.min(d);
                    }
                }
            }
            let gram = factor.t().dot(factor);
            if let Some(&smallest) = linalg::symmetric_eigenvalues(&gram).first() {
                min_eig = min_eig.min(smallest);
            }
        }
    }

    let beta = if min_sep.is_finite() {
        CONSTANT_SHRINK * min_sep
    } else {
        f64::INFINITY
    };
    let gamma = CONSTANT_SHRINK * min_eig;
    if beta <= 0.0 {
        return Err(Error::DegenerateFactors(format!(
            "row separation bound {beta} is not positive"
        )));
    }
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::DegenerateFactors(format!(
            "factor Gram eigenvalue bound {gamma} is not positive"
        )));
    }
    Ok(ModelConstants { alpha, beta, gamma })
}

#[cfg(test)]
pub(crate) mod test_params {
    use super::SbmParams;
    use ndarray::array;

    /// Three blocks, rank-2 symmetric communication matrix.
    pub fn assortative_rank2() -> SbmParams {
        SbmParams::new(
            vec![0.3, 0.3, 0.4],
            vec![array![
                [0.205, 0.045, 0.150],
                [0.045, 0.205, 0.150],
                [0.150, 0.150, 0.180]
            ]],
            false,
        )
        .unwrap()
    }

    /// Three blocks, full-rank strongly assortative communication matrix.
    pub fn assortative_full_rank() -> SbmParams {
        SbmParams::new(
            vec![0.3, 0.3, 0.4],
            vec![array![[0.5, 0.1, 0.1], [0.1, 0.5, 0.1], [0.1, 0.1, 0.5]]],
            false,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn accepts_reference_parameter_sets() {
        test_params::assortative_rank2();
        test_params::assortative_full_rank();
    }

    #[test]
    fn rejects_indistinguishable_blocks() {
        let err = SbmParams::new(
            vec![0.5, 0.5],
            vec![array![[0.5, 0.5], [0.5, 0.5]]],
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotIdentifiable { p: 0, q: 1 }));
    }

    #[test]
    fn rejects_bad_rho() {
        let err = SbmParams::new(
            vec![0.6, 0.5],
            vec![array![[0.2, 0.1], [0.1, 0.2]]],
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::RhoInvalid(_)));

        let err = SbmParams::new(
            vec![-0.2, 1.2],
            vec![array![[0.2, 0.1], [0.1, 0.2]]],
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::RhoInvalid(_)));
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let err = SbmParams::new(
            vec![0.5, 0.5],
            vec![array![[0.2, 1.1], [1.1, 0.2]]],
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EntryOutOfRange(_)));
    }

    #[test]
    fn rejects_asymmetric_undirected() {
        let err = SbmParams::new(
            vec![0.5, 0.5],
            vec![array![[0.2, 0.3], [0.1, 0.2]]],
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SymmetryViolation(_)));
        // The same matrix is fine for a directed model.
        SbmParams::new(vec![0.5, 0.5], vec![array![[0.2, 0.3], [0.1, 0.2]]], true).unwrap();
    }

    #[test]
    fn numerical_rank_of_reference_matrices() {
        let p = test_params::assortative_rank2();
        assert_eq!(numerical_rank(p.modality(0), RANK_REL_TOL), 2);
        let p = test_params::assortative_full_rank();
        assert_eq!(numerical_rank(p.modality(0), RANK_REL_TOL), 3);
        let eye = Array2::<f64>::eye(3);
        assert_eq!(numerical_rank(&eye, RANK_REL_TOL), 3);
        let zero = Array2::<f64>::zeros((4, 4));
        assert_eq!(numerical_rank(&zero, RANK_REL_TOL), 0);
    }

    #[test]
    fn numerical_rank_is_transpose_invariant() {
        let mats = [
            test_params::assortative_rank2().modality(0).clone(),
            test_params::assortative_full_rank().modality(0).clone(),
            array![[0.1, 0.9], [0.3, 0.3]],
            array![[0.5, 0.5], [0.5, 0.5]],
        ];
        for m in &mats {
            let mt = m.t().to_owned();
            assert_eq!(
                numerical_rank(m, RANK_REL_TOL),
                numerical_rank(&mt, RANK_REL_TOL)
            );
        }
    }

    #[test]
    fn factorize_constant_matrix_is_rank_one() {
        let m = array![[0.5, 0.5], [0.5, 0.5]];
        let f = factorize(&m);
        assert_eq!(f.rank, 1);
        assert_eq!(f.mu.dim(), (2, 1));
        let recon = f.mu.dot(&f.nu.t());
        for &x in recon.iter() {
            assert_abs_diff_eq!(x, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn factorize_reconstructs_reference_matrices() {
        for params in [
            test_params::assortative_rank2(),
            test_params::assortative_full_rank(),
        ] {
            let m = params.modality(0);
            let f = factorize(m);
            let residual = linalg::frobenius_norm(&(m - &f.mu.dot(&f.nu.t())));
            let norm = linalg::frobenius_norm(m);
            assert!(residual <= 1e-10 * norm.max(1.0), "residual {residual}");
        }
        let f = factorize(test_params::assortative_rank2().modality(0));
        assert_eq!(f.rank, 2);
        assert_eq!(f.mu.ncols(), 2);
    }

    #[test]
    fn factorize_preserves_row_distinctions() {
        // Distinct rows of M must stay distinct in mu, distinct columns in nu.
        let m = array![[0.9, 0.1, 0.1], [0.1, 0.9, 0.1], [0.1, 0.1, 0.9]];
        let f = factorize(&m);
        for p in 0..3 {
            for q in (p + 1)..3 {
                let dm = sq_dist(
                    f.mu.row(p).as_slice().unwrap(),
                    f.mu.row(q).as_slice().unwrap(),
                )
                .sqrt();
                let dn = sq_dist(
                    f.nu.row(p).as_slice().unwrap(),
                    f.nu.row(q).as_slice().unwrap(),
                )
                .sqrt();
                assert!(dm > ROW_EQ_TOL && dn > ROW_EQ_TOL);
            }
        }
    }

    #[test]
    fn constants_alpha_from_rho() {
        let params = test_params::assortative_rank2();
        let c = compute_constants(&params, &params.factorize_all()).unwrap();
        assert_abs_diff_eq!(c.alpha, 0.297, epsilon = 1e-15);
    }

    // Reference values computed once with an independent eigendecomposition
    // and pairwise-distance oracle (numpy) and frozen here.
    #[test]
    fn constants_of_full_rank_model_match_oracle() {
        let params = test_params::assortative_full_rank();
        let c = compute_constants(&params, &params.factorize_all()).unwrap();
        assert_abs_diff_eq!(c.alpha, 0.297, epsilon = 1e-15);
        assert_abs_diff_eq!(c.beta, 0.885_482_919_089_916_7, epsilon = 1e-10);
        assert_abs_diff_eq!(c.gamma, 0.396, epsilon = 1e-10);
    }

    #[test]
    fn constants_of_rank2_model_match_oracle() {
        let params = test_params::assortative_rank2();
        let c = compute_constants(&params, &params.factorize_all()).unwrap();
        assert_abs_diff_eq!(c.beta, 0.288_632_118_794_842_4, epsilon = 1e-10);
        assert_abs_diff_eq!(c.gamma, 0.1584, epsilon = 1e-10);
    }

    #[test]
    fn single_block_beta_is_infinite() {
        let params = SbmParams::new(vec![1.0], vec![array![[0.5]]], false).unwrap();
        let c = compute_constants(&params, &params.factorize_all()).unwrap();
        assert!(c.beta.is_infinite());
        assert_abs_diff_eq!(c.gamma, 0.99 * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn constants_satisfy_strict_inequalities() {
        for params in [
            test_params::assortative_rank2(),
            test_params::assortative_full_rank(),
        ] {
            let factors = params.factorize_all();
            let c = compute_constants(&params, &factors).unwrap();
            for &r in params.rho() {
                assert!(c.alpha < r);
            }
            for f in &factors {
                for factor in [&f.mu, &f.nu] {
                    for p in 0..factor.nrows() {
                        for q in (p + 1)..factor.nrows() {
                            let d = sq_dist(
                                factor.row(p).as_slice().unwrap(),
                                factor.row(q).as_slice().unwrap(),
                            )
                            .sqrt();
                            if d > ROW_EQ_TOL {
                                assert!(d > c.beta);
                            }
                        }
                    }
                    let gram = factor.t().dot(factor);
                    for ev in linalg::symmetric_eigenvalues(&gram) {
                        assert!(ev > c.gamma);
                    }
                }
            }
        }
    }
}
