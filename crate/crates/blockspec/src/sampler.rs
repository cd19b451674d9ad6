//! Seeded realization of stochastic block model graphs.
//!
//! Randomness comes from ChaCha8, a portable counter-based stream cipher
//! generator: a [`Seed`] plus a purpose tag and an index are packed into the
//! 256-bit cipher key, so every `(value, stream)` pair reproduces the same
//! sample bit-for-bit on any platform. Draw order is fixed and documented on
//! each operation.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::SbmParams;

/// Reproducibility handle: a base value plus a stream number.
///
/// Distinct streams of the same value give statistically independent draws;
/// the harness assigns one stream per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

/// Domain separators for the generators derived from one seed.
mod purpose {
    pub const TAU: u64 = 0;
    pub const ADJACENCY: u64 = 1;
    pub const EXTEND: u64 = 2;
    pub const CLUSTER: u64 = 3;
}

impl Seed {
    pub fn new(value: u64, stream: u64) -> Self {
        Self { value, stream }
    }

    /// Same value, different stream.
    pub fn with_stream(self, stream: u64) -> Self {
        Self {
            value: self.value,
            stream,
        }
    }

    /// Stream shifted by `offset` (wrapping).
    pub fn offset_stream(self, offset: u64) -> Self {
        Self {
            value: self.value,
            stream: self.stream.wrapping_add(offset),
        }
    }

    /// Generator keyed by `(value, stream, purpose, index)`, little-endian
    /// packed into the ChaCha8 key.
    fn rng(&self, purpose: u64, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.value.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream.to_le_bytes());
        key[16..24].copy_from_slice(&purpose.to_le_bytes());
        key[24..32].copy_from_slice(&index.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// Generator for clustering initialization, one per restart.
    pub(crate) fn cluster_rng(&self, restart: u64) -> ChaCha8Rng {
        self.rng(purpose::CLUSTER, restart)
    }
}

/// A realized graph: block memberships and one adjacency matrix per modality.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    tau: Vec<usize>,
    adjacency: Vec<Array2<u8>>,
    directed: bool,
}

impl GraphSample {
    /// A sample with no vertices, the base case for growth by extension.
    pub fn empty(num_modalities: usize, directed: bool) -> Self {
        Self {
            tau: Vec::new(),
            adjacency: vec![Array2::<u8>::zeros((0, 0)); num_modalities.max(1)],
            directed,
        }
    }

    /// Assembles a sample from parts, checking shapes, zero diagonals, the
    /// 0/1 alphabet, and symmetry when undirected.
    pub fn from_parts(
        tau: Vec<usize>,
        adjacency: Vec<Array2<u8>>,
        directed: bool,
    ) -> crate::Result<Self> {
        let n = tau.len();
        if adjacency.is_empty() {
            return Err(crate::Error::EmptyInput("no adjacency matrices".into()));
        }
        for (s, a) in adjacency.iter().enumerate() {
            if a.dim() != (n, n) {
                return Err(crate::Error::DimensionError(format!(
                    "modality {s} has shape {:?}, expected ({n}, {n})",
                    a.dim()
                )));
            }
            for i in 0..n {
                if a[[i, i]] != 0 {
                    return Err(crate::Error::Parse(format!(
                        "modality {s} has a nonzero diagonal at {i}"
                    )));
                }
                for j in 0..n {
                    if a[[i, j]] > 1 {
                        return Err(crate::Error::Parse(format!(
                            "modality {s} entry ({i},{j}) is not 0/1"
                        )));
                    }
                    if !directed && a[[i, j]] != a[[j, i]] {
                        return Err(crate::Error::SymmetryViolation(format!(
                            "modality {s} entries ({i},{j}) and ({j},{i}) differ"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            tau,
            adjacency,
            directed,
        })
    }

    pub fn n(&self) -> usize {
        self.tau.len()
    }

    /// Realized block membership labels, `0..K`.
    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    pub fn num_modalities(&self) -> usize {
        self.adjacency.len()
    }

    pub fn adjacency(&self, s: usize) -> &Array2<u8> {
        &self.adjacency[s]
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Adjacency matrix of modality `s` as floating point, for the SVD.
    pub fn adjacency_f64(&self, s: usize) -> Array2<f64> {
        self.adjacency[s].mapv(f64::from)
    }
}

/// Draws `n` i.i.d. block labels from `rho` by inverse-CDF lookup.
///
/// Draw order: one uniform per vertex, vertex 0 first.
pub fn sample_tau(n: usize, rho: &[f64], seed: Seed) -> Vec<usize> {
    let mut rng = seed.rng(purpose::TAU, 0);
    (0..n).map(|_| draw_label(rho, &mut rng)).collect()
}

fn draw_label(rho: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &r) in rho.iter().enumerate() {
        acc += r;
        if u < acc {
            return k;
        }
    }
    rho.len() - 1
}

/// Realizes adjacency matrices for given labels.
///
/// Each modality uses its own generator. Undirected graphs draw the strict
/// upper triangle in row-major order and mirror it; directed graphs draw all
/// ordered pairs `i != j` in row-major order. An edge occurs when the uniform
/// draw is strictly below the communication probability.
pub fn sample_adjacency(tau: &[usize], params: &SbmParams, seed: Seed) -> GraphSample {
    let n = tau.len();
    let mut adjacency = Vec::with_capacity(params.num_modalities());
    for s in 0..params.num_modalities() {
        let m = params.modality(s);
        let mut rng = seed.rng(purpose::ADJACENCY, s as u64);
        let mut a = Array2::<u8>::zeros((n, n));
        if params.directed() {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let u: f64 = rng.gen();
                        a[[i, j]] = u8::from(u < m[[tau[i], tau[j]]]);
                    }
                }
            }
        } else {
            for i in 0..n {
                for j in (i + 1)..n {
                    let u: f64 = rng.gen();
                    let bit = u8::from(u < m[[tau[i], tau[j]]]);
                    a[[i, j]] = bit;
                    a[[j, i]] = bit;
                }
            }
        }
        adjacency.push(a);
    }
    GraphSample {
        tau: tau.to_vec(),
        adjacency,
        directed: params.directed(),
    }
}

/// Convenience: labels plus adjacencies in one call.
pub fn sample_graph(n: usize, params: &SbmParams, seed: Seed) -> GraphSample {
    let tau = sample_tau(n, params.rho(), seed);
    sample_adjacency(&tau, params, seed)
}

/// Grows a sample by one vertex, preserving everything already realized.
///
/// The new vertex (index `n`) uses a generator keyed by its index: one label
/// draw, then per modality its edges to vertices `0..n` in order (for
/// directed graphs the outgoing row first, then the incoming column).
pub fn extend_sample(existing: &GraphSample, params: &SbmParams, seed: Seed) -> GraphSample {
    let n = existing.n();
    let mut rng = seed.rng(purpose::EXTEND, n as u64);
    let mut tau = existing.tau.clone();
    tau.push(draw_label(params.rho(), &mut rng));
    let new = tau[n];

    let mut adjacency = Vec::with_capacity(existing.num_modalities());
    for s in 0..existing.num_modalities() {
        let m = params.modality(s);
        let old = &existing.adjacency[s];
        let mut a = Array2::<u8>::zeros((n + 1, n + 1));
        a.slice_mut(ndarray::s![..n, ..n]).assign(old);
        if params.directed() {
            for i in 0..n {
                let u: f64 = rng.gen();
                a[[n, i]] = u8::from(u < m[[new, tau[i]]]);
            }
            for i in 0..n {
                let u: f64 = rng.gen();
                a[[i, n]] = u8::from(u < m[[tau[i], new]]);
            }
        } else {
            for i in 0..n {
                let u: f64 = rng.gen();
                let bit = u8::from(u < m[[new, tau[i]]]);
                a[[n, i]] = bit;
                a[[i, n]] = bit;
            }
        }
        adjacency.push(a);
    }
    GraphSample {
        tau,
        adjacency,
        directed: existing.directed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_params;
    use ndarray::array;

    fn seed() -> Seed {
        Seed::new(42, 0)
    }

    #[test]
    fn single_block_labels_are_constant() {
        let tau = sample_tau(50, &[1.0], seed());
        assert!(tau.iter().all(|&t| t == 0));
    }

    #[test]
    fn tau_is_deterministic() {
        let rho = [0.3, 0.3, 0.4];
        assert_eq!(sample_tau(1000, &rho, seed()), sample_tau(1000, &rho, seed()));
        assert_ne!(
            sample_tau(1000, &rho, seed()),
            sample_tau(1000, &rho, Seed::new(42, 1))
        );
    }

    #[test]
    fn tau_proportions_track_rho() {
        let rho = [0.3, 0.3, 0.4];
        let n = 10_000;
        let tau = sample_tau(n, &rho, seed());
        for (k, &r) in rho.iter().enumerate() {
            let prop = tau.iter().filter(|&&t| t == k).count() as f64 / n as f64;
            assert!((prop - r).abs() <= 0.02, "block {k}: {prop} vs {r}");
        }
    }

    #[test]
    fn extreme_probabilities_give_complete_and_empty_graphs() {
        let ones = SbmParams::new(vec![0.5, 0.5], vec![array![[1.0, 1.0], [1.0, 0.9]]], false)
            .unwrap();
        let tau = sample_tau(20, ones.rho(), seed());
        // Force every pair through the probability-1 entry.
        let tau: Vec<usize> = tau.iter().map(|_| 0).collect();
        let g = sample_adjacency(&tau, &ones, seed());
        let a = g.adjacency(0);
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(a[[i, j]], u8::from(i != j));
            }
        }

        let zeros = SbmParams::new(vec![0.5, 0.5], vec![array![[0.0, 0.0], [0.0, 0.1]]], false)
            .unwrap();
        let g = sample_adjacency(&tau, &zeros, seed());
        assert_eq!(g.adjacency(0).sum(), 0);
    }

    #[test]
    fn per_block_edge_densities_match_probabilities() {
        let params = test_params::assortative_rank2();
        let n = 2000;
        let g = sample_graph(n, &params, seed());
        let a = g.adjacency(0);
        let m = params.modality(0);
        for p in 0..3 {
            for q in 0..3 {
                let mut edges = 0usize;
                let mut pairs = 0usize;
                for i in 0..n {
                    for j in 0..n {
                        if i != j && g.tau()[i] == p && g.tau()[j] == q {
                            pairs += 1;
                            edges += a[[i, j]] as usize;
                        }
                    }
                }
                let density = edges as f64 / pairs as f64;
                assert!(
                    (density - m[[p, q]]).abs() <= 0.02,
                    "pair ({p},{q}): {density} vs {}",
                    m[[p, q]]
                );
            }
        }
    }

    #[test]
    fn undirected_samples_are_symmetric_with_zero_diagonal() {
        let params = test_params::assortative_full_rank();
        let g = sample_graph(300, &params, seed());
        let a = g.adjacency(0);
        for i in 0..300 {
            assert_eq!(a[[i, i]], 0);
            for j in 0..300 {
                assert_eq!(a[[i, j]], a[[j, i]]);
                assert!(a[[i, j]] <= 1);
            }
        }
    }

    #[test]
    fn directed_sampling_is_not_forced_symmetric() {
        let params = SbmParams::new(
            vec![0.5, 0.5],
            vec![array![[0.5, 0.9], [0.1, 0.5]]],
            true,
        )
        .unwrap();
        let g = sample_graph(100, &params, seed());
        let a = g.adjacency(0);
        let asym = (0..100)
            .flat_map(|i| (0..100).map(move |j| (i, j)))
            .filter(|&(i, j)| i < j && a[[i, j]] != a[[j, i]])
            .count();
        assert!(asym > 0);
        for i in 0..100 {
            assert_eq!(a[[i, i]], 0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let params = test_params::assortative_rank2();
        let g1 = sample_graph(200, &params, seed());
        let g2 = sample_graph(200, &params, seed());
        assert_eq!(g1, g2);
        let g3 = sample_graph(200, &params, Seed::new(42, 1));
        assert_ne!(g1, g3);
    }

    #[test]
    fn modalities_are_sampled_independently() {
        let m = array![[0.205, 0.045, 0.150], [0.045, 0.205, 0.150], [0.150, 0.150, 0.180]];
        let params =
            SbmParams::new(vec![0.3, 0.3, 0.4], vec![m.clone(), m], false).unwrap();
        let n = 2000;
        let g = sample_graph(n, &params, seed());
        let (a, b) = (g.adjacency(0), g.adjacency(1));
        // Pearson correlation over off-diagonal entries.
        let mut sa = 0.0;
        let mut sb = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        let mut sab = 0.0;
        let mut count = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let (x, y) = (a[[i, j]] as f64, b[[i, j]] as f64);
                    sa += x;
                    sb += y;
                    saa += x * x;
                    sbb += y * y;
                    sab += x * y;
                    count += 1.0;
                }
            }
        }
        let cov = sab / count - (sa / count) * (sb / count);
        let var_a = saa / count - (sa / count) * (sa / count);
        let var_b = sbb / count - (sb / count) * (sb / count);
        let corr = cov / (var_a * var_b).sqrt();
        assert!(corr.abs() <= 0.05, "correlation {corr}");
    }

    #[test]
    fn extension_preserves_the_existing_sample() {
        let params = test_params::assortative_rank2();
        let base = sample_graph(100, &params, seed());
        let grown = extend_sample(&base, &params, seed());
        assert_eq!(grown.n(), 101);
        assert_eq!(&grown.tau()[..100], base.tau());
        let (a0, a1) = (base.adjacency(0), grown.adjacency(0));
        for i in 0..100 {
            for j in 0..100 {
                assert_eq!(a0[[i, j]], a1[[i, j]]);
            }
        }
        assert_eq!(a1[[100, 100]], 0);
        for i in 0..100 {
            assert_eq!(a1[[100, i]], a1[[i, 100]]);
        }
    }

    #[test]
    fn extension_from_empty_base() {
        let params = test_params::assortative_rank2();
        let empty = GraphSample {
            tau: vec![],
            adjacency: vec![Array2::<u8>::zeros((0, 0))],
            directed: false,
        };
        let one = extend_sample(&empty, &params, seed());
        assert_eq!(one.n(), 1);
        assert!(one.tau()[0] < 3);
        assert_eq!(one.adjacency(0)[[0, 0]], 0);
    }

    #[test]
    fn repeated_extension_matches_model_densities() {
        let params = test_params::assortative_rank2();
        let mut g = sample_graph(100, &params, seed());
        while g.n() < 1000 {
            g = extend_sample(&g, &params, seed());
        }
        let n = g.n();
        let a = g.adjacency(0);
        let m = params.modality(0);
        for p in 0..3 {
            for q in 0..3 {
                let mut edges = 0usize;
                let mut pairs = 0usize;
                for i in 0..n {
                    for j in 0..n {
                        if i != j && g.tau()[i] == p && g.tau()[j] == q {
                            pairs += 1;
                            edges += a[[i, j]] as usize;
                        }
                    }
                }
                let density = edges as f64 / pairs as f64;
                assert!(
                    (density - m[[p, q]]).abs() <= 0.05,
                    "pair ({p},{q}): {density} vs {}",
                    m[[p, q]]
                );
            }
        }
    }
}
