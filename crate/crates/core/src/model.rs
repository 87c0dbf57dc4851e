//! The generative model: affinity matrices, attribute priors, edge
//! probabilities, sampling and complete-data likelihoods.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attributes::BinaryAttributeMatrix;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::math::{ln, ln_1p};

/// Smallest distance from 0 and 1 accepted for an affinity entry at load time.
pub const AFFINITY_MARGIN: f64 = 1e-9;

/// Default cap on `N` for dense probability matrices.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// 2x2 affinity matrix; entry `[r][c]` couples a source with value `r` to a
/// destination with value `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityMatrix([[f64; 2]; 2]);

impl AffinityMatrix {
    pub fn new(entries: [[f64; 2]; 2]) -> Result<Self> {
        for v in entries.iter().flatten() {
            if !(AFFINITY_MARGIN..=1.0 - AFFINITY_MARGIN).contains(v) {
                return Err(Error::InvalidParameter(format!(
                    "affinity entry {v} outside [{AFFINITY_MARGIN}, 1 - {AFFINITY_MARGIN}]"
                )));
            }
        }
        Ok(Self(entries))
    }

    /// All four entries equal to `value`.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new([[value; 2]; 2])
    }

    // Callers keep entries inside the open unit interval.
    pub(crate) fn from_raw(entries: [[f64; 2]; 2]) -> Self {
        Self(entries)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.0[r][c]
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }
}

/// Attribute priors `mu[l] = P(F_il = 1)` and one affinity matrix per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct MagParams {
    mu: Vec<f64>,
    thetas: Vec<AffinityMatrix>,
}

impl MagParams {
    pub fn new(mu: Vec<f64>, thetas: Vec<AffinityMatrix>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidParameter("at least one attribute is required".into()));
        }
        if mu.len() != thetas.len() {
            return Err(Error::Dimension {
                what: "affinity matrices",
                expected: mu.len(),
                found: thetas.len(),
            });
        }
        if let Some(m) = mu.iter().find(|m| !(**m > 0.0 && **m < 1.0)) {
            return Err(Error::InvalidParameter(format!("attribute prior {m} outside (0, 1)")));
        }
        Ok(Self { mu, thetas })
    }

    pub(crate) fn from_raw(mu: Vec<f64>, thetas: Vec<AffinityMatrix>) -> Self {
        Self { mu, thetas }
    }

    pub fn n_attrs(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn thetas(&self) -> &[AffinityMatrix] {
        &self.thetas
    }
}

/// Dense `N x N` edge-probability matrix; the diagonal is never read.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbAdjacency {
    n: usize,
    values: Vec<f64>,
}

impl ProbAdjacency {
    /// Builds the matrix from a per-pair function. Entries are nudged into the
    /// open unit interval so that log-likelihoods stay finite.
    pub fn from_fn(n: usize, cap: usize, mut p: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n > cap {
            return Err(Error::TooLarge {
                what: "dense probability matrix",
                size: n,
                cap,
            });
        }
        let hi = 1.0 - f64::EPSILON / 2.0;
        let mut values = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    values[i * n + j] = p(i, j).clamp(f64::MIN_POSITIVE, hi);
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// `prod_l thetas[l][f_i[l]][f_j[l]]`.
pub fn edge_probability(f_i: &[u8], f_j: &[u8], thetas: &[AffinityMatrix]) -> Result<f64> {
    for f in [f_i, f_j] {
        if f.len() != thetas.len() {
            return Err(Error::Dimension {
                what: "attribute vector",
                expected: thetas.len(),
                found: f.len(),
            });
        }
    }
    Ok(pair_probability(f_i, f_j, thetas))
}

#[inline]
pub(crate) fn pair_probability(f_i: &[u8], f_j: &[u8], thetas: &[AffinityMatrix]) -> f64 {
    thetas
        .iter()
        .zip(f_i.iter().zip(f_j))
        .map(|(t, (&a, &b))| t.get(usize::from(a), usize::from(b)))
        .product()
}

fn check_attrs(f: &BinaryAttributeMatrix, l: usize, n: Option<usize>) -> Result<()> {
    if f.n_attrs() != l {
        return Err(Error::Dimension {
            what: "attribute columns",
            expected: l,
            found: f.n_attrs(),
        });
    }
    if let Some(n) = n {
        if f.n_nodes() != n {
            return Err(Error::Dimension {
                what: "attribute rows",
                expected: n,
                found: f.n_nodes(),
            });
        }
    }
    Ok(())
}

/// Draws `F_il ~ Bernoulli(mu_l)` independently for `n` nodes.
pub fn sample_attributes(params: &MagParams, n: usize, seed: u64) -> BinaryAttributeMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = BinaryAttributeMatrix::zeros(n, params.n_attrs());
    for i in 0..n {
        for (l, &mu) in params.mu().iter().enumerate() {
            f.set(i, l, rng.gen::<f64>() < mu);
        }
    }
    f
}

pub fn prob_adjacency(
    f: &BinaryAttributeMatrix,
    thetas: &[AffinityMatrix],
    cap: usize,
) -> Result<ProbAdjacency> {
    check_attrs(f, thetas.len(), None)?;
    ProbAdjacency::from_fn(f.n_nodes(), cap, |i, j| pair_probability(f.row(i), f.row(j), thetas))
}

/// Flips one coin per ordered pair `i != j`.
///
/// Source node `i` draws from its own ChaCha stream, so each row is
/// reproducible in isolation and independent of visiting order.
pub fn sample_graph(f: &BinaryAttributeMatrix, thetas: &[AffinityMatrix], seed: u64) -> Result<DirectedGraph> {
    check_attrs(f, thetas.len(), None)?;
    let n = f.n_nodes();
    let mut edges = Vec::new();
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        for j in 0..n {
            if i == j {
                continue;
            }
            let u: f64 = rng.gen();
            if u < pair_probability(f.row(i), f.row(j), thetas) {
                edges.push((i, j));
            }
        }
    }
    Ok(DirectedGraph::from_edges(n, edges)?.0)
}

/// `log P(A | F, Theta)` over ordered pairs `i != j`.
pub fn graph_log_likelihood_given_attrs(
    graph: &DirectedGraph,
    f: &BinaryAttributeMatrix,
    thetas: &[AffinityMatrix],
) -> Result<f64> {
    check_attrs(f, thetas.len(), Some(graph.n_nodes()))?;
    let n = graph.n_nodes();
    let mut total = 0.0;
    for i in 0..n {
        let out = graph.out_neighbors(i);
        let mut next = 0;
        let mut row = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = pair_probability(f.row(i), f.row(j), thetas);
            if next < out.len() && out[next] == j {
                next += 1;
                row += ln(p);
            } else {
                row += ln_1p(-p);
            }
        }
        total += row;
    }
    Ok(total)
}

/// `sum_il [F_il log mu_l + (1 - F_il) log(1 - mu_l)]`.
pub fn attribute_log_likelihood(f: &BinaryAttributeMatrix, mu: &[f64]) -> Result<f64> {
    check_attrs(f, mu.len(), None)?;
    let mut total = 0.0;
    for i in 0..f.n_nodes() {
        for (l, &m) in mu.iter().enumerate() {
            total += if f.get(i, l) == 1 { ln(m) } else { ln_1p(-m) };
        }
    }
    Ok(total)
}

/// `log P(A, F | mu, Theta)`.
pub fn joint_log_likelihood(graph: &DirectedGraph, f: &BinaryAttributeMatrix, params: &MagParams) -> Result<f64> {
    Ok(graph_log_likelihood_given_attrs(graph, f, params.thetas())? + attribute_log_likelihood(f, params.mu())?)
}
