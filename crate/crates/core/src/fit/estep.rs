use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use super::expect::Ctx;
use super::mi::MiStats;
use super::{check_inputs, FitConfig, Mode, VariationalPosterior};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::math::{clamp, ln};
use crate::model::MagParams;

/// `log P~_il(v)` up to a constant shared by `v = 0` and `v = 1`.
pub fn ptilde_log(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    i: usize,
    l: usize,
    v: u8,
    mode: Mode,
) -> Result<f64> {
    check_entry(graph, posterior, params, i, l, mode)?;
    if v > 1 {
        return Err(Error::InvalidParameter("attribute value must be 0 or 1".into()));
    }
    let ctx = Ctx::new(graph, posterior, params.mu(), params.thetas(), mode);
    Ok(ctx.ptilde(i, l, &mut 0)[usize::from(v)])
}

/// Partial derivative of the lower bound with respect to `phi_il`.
pub fn phi_gradient(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    i: usize,
    l: usize,
    mode: Mode,
) -> Result<f64> {
    check_entry(graph, posterior, params, i, l, mode)?;
    if posterior.is_fixed(l) {
        return Err(Error::Contract("gradient requested for a fixed attribute"));
    }
    let ctx = Ctx::new(graph, posterior, params.mu(), params.thetas(), mode);
    Ok(gradient_at(&ctx, posterior, i, l, &mut 0))
}

fn check_entry(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    i: usize,
    l: usize,
    mode: Mode,
) -> Result<()> {
    check_inputs(graph, posterior, params, mode, usize::MAX)?;
    if i >= posterior.n_nodes() {
        return Err(Error::NodeOutOfRange { node: i, n: posterior.n_nodes() });
    }
    if l >= posterior.n_attrs() {
        return Err(Error::Dimension {
            what: "attribute index",
            expected: posterior.n_attrs(),
            found: l,
        });
    }
    Ok(())
}

fn gradient_at(ctx: &Ctx<'_>, post: &VariationalPosterior, i: usize, l: usize, work: &mut u64) -> f64 {
    let p = ctx.ptilde(i, l, work);
    let phi = post.phi(i, l);
    (p[1] - p[0]) - ln(phi) + ln(1.0 - phi)
}

/// Runs `config.estep_iters` stochastic rounds of the variational E-step.
pub fn e_step<R: Rng + ?Sized>(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    config: &FitConfig,
    rng: &mut R,
) -> Result<VariationalPosterior> {
    config.validate()?;
    check_inputs(graph, posterior, params, config.mode, config.dense_cap)?;
    let mut work = 0;
    Ok(e_step_counted(graph, posterior, params, config, config.estep_rate, rng, &mut work))
}

pub(crate) fn e_step_counted<R: Rng + ?Sized>(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    config: &FitConfig,
    rate: f64,
    rng: &mut R,
    work: &mut u64,
) -> VariationalPosterior {
    let (n, l) = (posterior.n_nodes(), posterior.n_attrs());
    let latent: Vec<usize> = (0..l).filter(|&k| !posterior.is_fixed(k)).collect();
    let mut current = posterior.clone();
    let total = n * latent.len();
    if total == 0 || rate == 0.0 {
        return current;
    }
    let batch = config.batch_for(n).min(total);
    let use_mi = config.lambda > 0.0 && l > 1;
    for _ in 0..config.estep_iters {
        let snapshot = current.clone();
        let ctx = Ctx::new(graph, &snapshot, params.mu(), params.thetas(), config.mode);
        let stats = use_mi.then(|| {
            *work += (n * l * l) as u64;
            MiStats::new(&snapshot)
        });
        for idx in sample(rng, total, batch).into_iter() {
            let (i, k) = (idx / latent.len(), latent[idx % latent.len()]);
            let mut g = gradient_at(&ctx, &snapshot, i, k, work);
            if let Some(stats) = &stats {
                g -= config.lambda * stats.gradient(&snapshot, i, k);
                *work += l as u64;
            }
            let phi = snapshot.phi(i, k) + rate * g;
            // Latent column, so the update cannot fail.
            let _ = current.set_phi(i, k, clamp(phi, config.eps, 1.0 - config.eps));
        }
    }
    current
}
