//! Variational EM estimation of MAG parameters.
//!
//! The posterior over attributes is mean-field. The E-step does stochastic
//! gradient ascent on the per-entry Bernoulli parameters, regularized by mutual
//! information between posterior columns. The M-step sets the priors in closed
//! form and takes projected gradient steps on the affinity matrices.
//!
//! Three evaluation modes share one code path:
//!
//! * [`Mode::Exact`] enumerates the non-edge expectation `E[log(1 - p)]` exactly.
//! * [`Mode::Taylor`] replaces it with the second-order expansion, still over all pairs.
//! * [`Mode::Fast`] treats the graph as empty under the prior marginals and
//!   corrects each edge, so a round costs `O(L E)` rather than `O(L N²)`.

mod bound;
mod estep;
mod expect;
mod mi;
mod mstep;
mod posterior;
mod select;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use bound::{lower_bound, lower_bound_capped};
pub use estep::{e_step, phi_gradient, ptilde_log};
pub use mi::{mi_gradient, mi_pair};
pub use mstep::{m_step, m_step_mu, theta_gradient, theta_gradients};
pub use posterior::{VariationalPosterior, DEFAULT_EPS};
pub use select::forward_select;

use crate::attributes::BinaryAttributeMatrix;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::math::abs;
use crate::model::{AffinityMatrix, MagParams, DEFAULT_DENSE_CAP};

/// Largest attribute count the exact mode will enumerate (`4^L` states per pair).
pub const EXACT_MAX_ATTRS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Taylor,
    Fast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub n_attrs: usize,
    pub lambda: f64,
    /// Entries updated per E-step round; `None` means `max(N L / 10, 1)`.
    pub batch_size: Option<usize>,
    pub estep_rate: f64,
    pub mstep_rate: f64,
    pub estep_iters: usize,
    pub mstep_iters: usize,
    pub em_rounds: usize,
    pub tol: f64,
    pub mode: Mode,
    pub seed: u64,
    pub eps: f64,
    pub dense_cap: usize,
}

impl FitConfig {
    pub fn new(n_attrs: usize) -> Self {
        Self {
            n_attrs,
            lambda: 0.1,
            batch_size: None,
            estep_rate: 0.05,
            mstep_rate: 0.01,
            estep_iters: 10,
            mstep_iters: 20,
            em_rounds: 100,
            tol: 1e-4,
            mode: Mode::Fast,
            seed: 0,
            eps: DEFAULT_EPS,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.n_attrs == 0 {
            return bad("attribute count must be at least 1");
        }
        if self.estep_iters == 0 || self.mstep_iters == 0 || self.em_rounds == 0 || self.batch_size == Some(0) {
            return bad("iteration counts and batch size must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.estep_rate >= 0.0 && self.estep_rate.is_finite() && self.mstep_rate >= 0.0 && self.mstep_rate.is_finite()) {
            return bad("step sizes must be finite and non-negative");
        }
        if !(self.tol >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad("clamp eps must lie in (0, 0.5)");
        }
        Ok(())
    }

    pub(crate) fn batch_for(&self, n: usize) -> usize {
        self.batch_size.unwrap_or_else(|| (n * self.n_attrs / 10).max(1))
    }
}

/// Operation counts, one unit per per-attribute factor expectation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Work {
    pub estep: u64,
    pub mstep: u64,
    pub bound: u64,
}

impl Work {
    pub fn total(&self) -> u64 {
        self.estep + self.mstep + self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: MagParams,
    pub posterior: VariationalPosterior,
    /// Bound after each round.
    pub lq_trace: Vec<f64>,
    /// Bound at the initial point.
    pub initial_lq: f64,
    pub converged: bool,
    pub rounds_used: usize,
    pub work: Work,
}

impl FitResult {
    pub fn final_lq(&self) -> f64 {
        self.lq_trace.last().copied().unwrap_or(self.initial_lq)
    }
}

pub(crate) fn check_inputs(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    mode: Mode,
    dense_cap: usize,
) -> Result<()> {
    if posterior.n_nodes() != graph.n_nodes() {
        return Err(Error::Dimension {
            what: "posterior rows",
            expected: graph.n_nodes(),
            found: posterior.n_nodes(),
        });
    }
    if posterior.n_attrs() != params.n_attrs() {
        return Err(Error::Dimension {
            what: "posterior columns",
            expected: params.n_attrs(),
            found: posterior.n_attrs(),
        });
    }
    if mode != Mode::Fast && graph.n_nodes() > dense_cap {
        return Err(Error::TooLarge {
            what: "pairwise evaluation nodes",
            size: graph.n_nodes(),
            cap: dense_cap,
        });
    }
    if mode == Mode::Exact && params.n_attrs() > EXACT_MAX_ATTRS {
        return Err(Error::TooLarge {
            what: "exact enumeration attributes",
            size: params.n_attrs(),
            cap: EXACT_MAX_ATTRS,
        });
    }
    Ok(())
}

/// Fits MAG parameters to `graph` by variational EM.
///
/// Columns of `fixed` pin the first attributes to observed bits; the remaining
/// `config.n_attrs - fixed.n_attrs()` attributes are latent.
pub fn fit(graph: &DirectedGraph, config: &FitConfig, fixed: Option<&BinaryAttributeMatrix>) -> Result<FitResult> {
    config.validate()?;
    let (n, l) = (graph.n_nodes(), config.n_attrs);
    if let Some(f) = fixed {
        if f.n_attrs() > l {
            return Err(Error::Dimension {
                what: "fixed attribute columns",
                expected: l,
                found: f.n_attrs(),
            });
        }
        if f.n_nodes() != n {
            return Err(Error::Dimension {
                what: "fixed attribute rows",
                expected: n,
                found: f.n_nodes(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mu: Vec<f64> = (0..l).map(|_| rng.gen_range(0.2..0.8)).collect();
    let thetas: Vec<AffinityMatrix> = (0..l)
        .map(|_| {
            let mut m = [[0.0; 2]; 2];
            for r in &mut m {
                for c in r.iter_mut() {
                    *c = rng.gen_range(0.2..0.8);
                }
            }
            AffinityMatrix::from_raw(m)
        })
        .collect();
    let mut params = MagParams::from_raw(mu, thetas);
    let phi: Vec<f64> = (0..n * l).map(|_| rng.gen_range(0.3..0.7)).collect();
    let mut posterior = VariationalPosterior::from_phi(n, l, phi, config.eps)?;
    if let Some(f) = fixed {
        for c in 0..f.n_attrs() {
            posterior.pin_column(c, f, c)?;
        }
    }
    check_inputs(graph, &posterior, &params, config.mode, config.dense_cap)?;

    let mut work = Work::default();
    let initial_lq = bound::bound_counted(graph, &posterior, &params, config.mode, &mut work.bound);
    if !initial_lq.is_finite() {
        return Err(Error::NonFinite { round: 0, value: initial_lq });
    }
    let (mut rate_e, mut rate_m) = (config.estep_rate, config.mstep_rate);
    let mut prev = initial_lq;
    let mut trace = Vec::new();
    let mut converged = false;
    for round in 1..=config.em_rounds {
        posterior = estep::e_step_counted(graph, &posterior, &params, config, rate_e, &mut rng, &mut work.estep);
        params = mstep::m_step_counted(graph, &posterior, &params, config, rate_m, &mut work.mstep);
        let lq = bound::bound_counted(graph, &posterior, &params, config.mode, &mut work.bound);
        if !lq.is_finite() {
            return Err(Error::NonFinite { round, value: lq });
        }
        trace.push(lq);
        let delta = lq - prev;
        if delta < -0.05 * abs(prev) {
            rate_e *= 0.5;
            rate_m *= 0.5;
        }
        if abs(delta) < config.tol * abs(lq) || config.tol.is_infinite() {
            converged = true;
            break;
        }
        prev = lq;
    }
    Ok(FitResult {
        params,
        posterior,
        rounds_used: trace.len(),
        lq_trace: trace,
        initial_lq,
        converged,
        work,
    })
}
