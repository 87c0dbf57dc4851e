use alloc::vec::Vec;

use super::expect::{Ctx, Mat};
use super::{check_inputs, FitConfig, Mode, VariationalPosterior};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::math::clamp;
use crate::model::{AffinityMatrix, MagParams};

/// Closed-form prior update: clamped column means of `phi`.
pub fn m_step_mu(posterior: &VariationalPosterior) -> Vec<f64> {
    let (n, l) = (posterior.n_nodes(), posterior.n_attrs());
    let eps = posterior.eps();
    (0..l)
        .map(|k| {
            let sum: f64 = (0..n).map(|i| posterior.phi(i, k)).sum();
            let mean = if n == 0 { 0.5 } else { sum / n as f64 };
            clamp(mean, eps, 1.0 - eps)
        })
        .collect()
}

/// Gradient of the bound with respect to the entries of `Θ_l`.
pub fn theta_gradient(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    l: usize,
    mode: Mode,
) -> Result<[[f64; 2]; 2]> {
    if l >= params.n_attrs() {
        return Err(Error::Dimension {
            what: "attribute index",
            expected: params.n_attrs(),
            found: l,
        });
    }
    Ok(theta_gradients(graph, posterior, params, mode)?[l])
}

/// Gradients for every affinity matrix at once.
pub fn theta_gradients(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    mode: Mode,
) -> Result<Vec<[[f64; 2]; 2]>> {
    check_inputs(graph, posterior, params, mode, usize::MAX)?;
    let ctx = Ctx::new(graph, posterior, params.mu(), params.thetas(), mode);
    Ok(ctx.theta_gradients(&mut 0))
}

/// Prior update followed by `config.mstep_iters` projected gradient steps on every `Θ_l`.
///
/// Gradients are divided by `max(E, 1)` so the step size does not depend on graph size.
pub fn m_step(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    config: &FitConfig,
) -> Result<MagParams> {
    config.validate()?;
    check_inputs(graph, posterior, params, config.mode, config.dense_cap)?;
    Ok(m_step_counted(graph, posterior, params, config, config.mstep_rate, &mut 0))
}

pub(crate) fn m_step_counted(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    config: &FitConfig,
    rate: f64,
    work: &mut u64,
) -> MagParams {
    let mu = m_step_mu(posterior);
    let mut thetas: Vec<Mat> = params.thetas().iter().map(AffinityMatrix::entries).collect();
    let scale = rate / graph.n_edges().max(1) as f64;
    let (lo, hi) = (config.eps, 1.0 - config.eps);
    if rate > 0.0 {
        for _ in 0..config.mstep_iters {
            let current: Vec<AffinityMatrix> = thetas.iter().map(|&m| AffinityMatrix::from_raw(m)).collect();
            let ctx = Ctx::new(graph, posterior, &mu, &current, config.mode);
            let grads = ctx.theta_gradients(work);
            for (t, g) in thetas.iter_mut().zip(&grads) {
                for z1 in 0..2 {
                    for z2 in 0..2 {
                        t[z1][z2] = clamp(t[z1][z2] + scale * g[z1][z2], lo, hi);
                    }
                }
            }
        }
    }
    MagParams::from_raw(mu, thetas.into_iter().map(AffinityMatrix::from_raw).collect())
}
