use super::expect::Ctx;
use super::{check_inputs, Mode, VariationalPosterior};
use crate::error::Result;
use crate::graph::DirectedGraph;
use crate::model::{MagParams, DEFAULT_DENSE_CAP};

/// Variational lower bound `E_Q[log P(A, F)] + H(Q)`.
///
/// Exact and Taylor modes visit every ordered pair and are refused above the
/// default dense cap.
pub fn lower_bound(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    mode: Mode,
) -> Result<f64> {
    lower_bound_capped(graph, posterior, params, mode, DEFAULT_DENSE_CAP)
}

pub fn lower_bound_capped(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    mode: Mode,
    dense_cap: usize,
) -> Result<f64> {
    check_inputs(graph, posterior, params, mode, dense_cap)?;
    Ok(bound_counted(graph, posterior, params, mode, &mut 0))
}

pub(crate) fn bound_counted(
    graph: &DirectedGraph,
    posterior: &VariationalPosterior,
    params: &MagParams,
    mode: Mode,
    work: &mut u64,
) -> f64 {
    let ctx = Ctx::new(graph, posterior, params.mu(), params.thetas(), mode);
    ctx.graph_term(work) + ctx.prior_and_entropy()
}
