//! Logistic-regression edge model `P(i -> j) = σ(c + α·F_i + β·F_j)`.
//!
//! Training uses every ordered pair. Pairs are grouped by the endpoints'
//! attribute patterns, which gives the exact full-pair likelihood at a cost that
//! depends on the number of distinct patterns rather than `N²`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::attributes::BinaryAttributeMatrix;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::math::{abs, exp, ln_1p, sigmoid, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    pub intercept: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LogisticParams {
    pub fn zeros(n_attrs: usize) -> Self {
        Self {
            intercept: 0.0,
            alpha: vec![0.0; n_attrs],
            beta: vec![0.0; n_attrs],
        }
    }

    pub fn n_attrs(&self) -> usize {
        self.alpha.len()
    }

    /// `[c, α_1..α_L, β_1..β_L]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.intercept];
        v.extend_from_slice(&self.alpha);
        v.extend_from_slice(&self.beta);
        v
    }

    pub fn from_slice(w: &[f64]) -> Result<Self> {
        if w.is_empty() || w.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("logistic weight vector must have odd length".into()));
        }
        let l = (w.len() - 1) / 2;
        Ok(Self {
            intercept: w[0],
            alpha: w[1..=l].to_vec(),
            beta: w[l + 1..].to_vec(),
        })
    }
}

fn logit(params: &LogisticParams, f_i: &[u8], f_j: &[u8]) -> f64 {
    let mut z = params.intercept;
    for l in 0..params.alpha.len() {
        z += params.alpha[l] * f64::from(f_i[l]) + params.beta[l] * f64::from(f_j[l]);
    }
    z
}

pub fn logistic_edge_prob(params: &LogisticParams, f_i: &[u8], f_j: &[u8]) -> Result<f64> {
    for f in [f_i, f_j] {
        if f.len() != params.n_attrs() {
            return Err(Error::Dimension {
                what: "attribute vector",
                expected: params.n_attrs(),
                found: f.len(),
            });
        }
    }
    Ok(sigmoid(logit(params, f_i, f_j)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub max_iters: usize,
    /// Stop when the gradient norm divided by the pair count falls below this.
    pub tol: f64,
    /// Largest allowed `N (N - 1)`.
    pub pair_cap: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-6,
            pair_cap: 25_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub params: LogisticParams,
    pub log_likelihood: f64,
    /// Log-likelihood after each iteration, starting from the all-zero model.
    pub trace: Vec<f64>,
}

// Ordered pairs grouped by (source pattern, destination pattern).
struct Groups {
    patterns: Vec<Vec<u8>>,
    // (source pattern, destination pattern, pairs, edges)
    cells: Vec<(usize, usize, f64, f64)>,
    pairs: f64,
}

impl Groups {
    fn new(graph: &DirectedGraph, f: &BinaryAttributeMatrix) -> Self {
        let mut index: BTreeMap<&[u8], usize> = BTreeMap::new();
        let mut patterns = Vec::new();
        let mut of_node = Vec::with_capacity(f.n_nodes());
        let mut counts: Vec<f64> = Vec::new();
        for i in 0..f.n_nodes() {
            let row = f.row(i);
            let id = *index.entry(row).or_insert_with(|| {
                patterns.push(row.to_vec());
                counts.push(0.0);
                patterns.len() - 1
            });
            counts[id] += 1.0;
            of_node.push(id);
        }
        let p = patterns.len();
        let mut edges = vec![0.0; p * p];
        for (i, j) in graph.edges() {
            edges[of_node[i] * p + of_node[j]] += 1.0;
        }
        let mut cells = Vec::with_capacity(p * p);
        for a in 0..p {
            for b in 0..p {
                let pairs = counts[a] * counts[b] - if a == b { counts[a] } else { 0.0 };
                if pairs > 0.0 {
                    cells.push((a, b, pairs, edges[a * p + b]));
                }
            }
        }
        let n = f.n_nodes() as f64;
        Self {
            patterns,
            cells,
            pairs: n * (n - 1.0),
        }
    }

    fn features(&self, a: usize, b: usize, out: &mut [f64]) {
        let l = self.patterns[a].len();
        out[0] = 1.0;
        for k in 0..l {
            out[1 + k] = f64::from(self.patterns[a][k]);
            out[1 + l + k] = f64::from(self.patterns[b][k]);
        }
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let mut x = vec![0.0; w.len()];
        let mut total = 0.0;
        for &(a, b, pairs, pos) in &self.cells {
            self.features(a, b, &mut x);
            let z: f64 = x.iter().zip(w).map(|(x, w)| x * w).sum();
            total += pos * log_sigmoid(z) + (pairs - pos) * log_sigmoid(-z);
        }
        total
    }

    // Gradient and negated Hessian of the objective.
    fn derivatives(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = w.len();
        let mut x = vec![0.0; d];
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        for &(a, b, pairs, pos) in &self.cells {
            self.features(a, b, &mut x);
            let z: f64 = x.iter().zip(w).map(|(x, w)| x * w).sum();
            let s = sigmoid(z);
            let r = pos - pairs * s;
            let c = pairs * s * (1.0 - s);
            for p in 0..d {
                grad[p] += r * x[p];
                for q in 0..d {
                    hess[p * d + q] += c * x[p] * x[q];
                }
            }
        }
        (grad, hess)
    }
}

// ln σ(z), stable for large |z|.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -ln_1p(exp(-z))
    } else {
        z - ln_1p(exp(z))
    }
}

fn check(graph: &DirectedGraph, f: &BinaryAttributeMatrix) -> Result<()> {
    if f.n_nodes() != graph.n_nodes() {
        return Err(Error::Dimension {
            what: "attribute rows",
            expected: graph.n_nodes(),
            found: f.n_nodes(),
        });
    }
    Ok(())
}

/// Full-pair Bernoulli log-likelihood of the logistic model.
pub fn logistic_log_likelihood(graph: &DirectedGraph, f: &BinaryAttributeMatrix, params: &LogisticParams) -> Result<f64> {
    check(graph, f)?;
    check_width(f, params)?;
    Ok(Groups::new(graph, f).objective(&params.to_vec()))
}

/// Gradient of [`logistic_log_likelihood`] in `[c, α, β]` order.
pub fn logistic_gradient(graph: &DirectedGraph, f: &BinaryAttributeMatrix, params: &LogisticParams) -> Result<Vec<f64>> {
    check(graph, f)?;
    check_width(f, params)?;
    Ok(Groups::new(graph, f).derivatives(&params.to_vec()).0)
}

fn check_width(f: &BinaryAttributeMatrix, params: &LogisticParams) -> Result<()> {
    if f.n_attrs() != params.n_attrs() {
        return Err(Error::Dimension {
            what: "logistic weights",
            expected: f.n_attrs(),
            found: params.n_attrs(),
        });
    }
    Ok(())
}

/// Maximum-likelihood fit by damped Newton steps with backtracking.
pub fn fit_logistic(graph: &DirectedGraph, f: &BinaryAttributeMatrix, config: &LogisticConfig) -> Result<LogisticFit> {
    check(graph, f)?;
    let n = graph.n_nodes() as u64;
    let pairs = n * n.saturating_sub(1);
    if pairs > config.pair_cap {
        return Err(Error::TooLarge {
            what: "logistic training pairs",
            size: pairs as usize,
            cap: config.pair_cap as usize,
        });
    }
    let groups = Groups::new(graph, f);
    let dim = 2 * f.n_attrs() + 1;
    let mut w = vec![0.0; dim];
    let mut obj = groups.objective(&w);
    let mut trace = vec![obj];
    let scale = groups.pairs.max(1.0);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..config.max_iters {
        let (grad, hess) = groups.derivatives(&w);
        grad_norm = sqrt(grad.iter().map(|g| g * g).sum()) / scale;
        if grad_norm <= config.tol {
            return Ok(LogisticFit {
                params: LogisticParams::from_slice(&w)?,
                log_likelihood: obj,
                trace,
            });
        }
        let step = newton_direction(&hess, &grad, dim);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = w.iter().zip(&step).map(|(w, s)| w + t * s).collect();
            let value = groups.objective(&cand);
            if value >= obj {
                w = cand;
                obj = value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        trace.push(obj);
        if !accepted {
            break;
        }
    }
    Err(Error::LogisticNoConvergence { grad_norm })
}

// Solves (H + δI) d = g by Cholesky, raising δ until H + δI is positive definite.
fn newton_direction(hess: &[f64], grad: &[f64], dim: usize) -> Vec<f64> {
    let trace: f64 = (0..dim).map(|i| hess[i * dim + i]).sum();
    let mut damping = 1e-10 * (trace / dim as f64).max(1e-12);
    loop {
        if let Some(d) = cholesky_solve(hess, grad, dim, damping) {
            return d;
        }
        damping *= 10.0;
    }
}

fn cholesky_solve(a: &[f64], b: &[f64], n: usize, shift: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j] + if i == j { shift } else { 0.0 };
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    x.iter().all(|v| v.is_finite() && abs(*v) < 1e12).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::ln;

    #[test]
    fn edge_prob_cases() {
        let zero = LogisticParams::zeros(1);
        assert_eq!(logistic_edge_prob(&zero, &[1], &[0]).unwrap(), 0.5);
        let p = LogisticParams {
            intercept: ln(3.0),
            ..LogisticParams::zeros(1)
        };
        assert!(abs(logistic_edge_prob(&p, &[0], &[1]).unwrap() - 0.75) < 1e-15);
        let p = LogisticParams {
            intercept: 0.0,
            alpha: vec![1.0],
            beta: vec![0.0],
        };
        assert!(abs(logistic_edge_prob(&p, &[1], &[0]).unwrap() - 0.731_058_578_630_004_9) < 1e-15);
        assert!(logistic_edge_prob(&p, &[1, 0], &[0]).is_err());
    }

    #[test]
    fn intercept_only_matches_density() {
        let graph = DirectedGraph::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap().0;
        let f = BinaryAttributeMatrix::zeros(5, 0);
        let fit = fit_logistic(&graph, &f, &LogisticConfig::default()).unwrap();
        assert!(abs(sigmoid(fit.params.intercept) - 3.0 / 20.0) < 1e-6);
    }

    #[test]
    fn cholesky_identity() {
        let x = cholesky_solve(&[4.0, 0.0, 0.0, 9.0], &[8.0, 3.0], 2, 0.0).unwrap();
        assert!(abs(x[0] - 2.0) < 1e-15 && abs(x[1] - 1.0 / 3.0) < 1e-15);
    }
}
