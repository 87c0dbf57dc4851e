use alloc::vec::Vec;

use super::{fit, FitConfig, FitResult};
use crate::attributes::BinaryAttributeMatrix;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Greedy forward selection of `k` observed attribute columns.
///
/// Each step fits every remaining candidate together with the columns already
/// chosen, all pinned, and keeps the one with the highest final bound. Ties go to
/// the lowest column index. `config.n_attrs` is ignored.
pub fn forward_select(
    graph: &DirectedGraph,
    candidates: &BinaryAttributeMatrix,
    k: usize,
    config: &FitConfig,
) -> Result<(Vec<usize>, FitResult)> {
    if k == 0 {
        return Err(Error::Contract("forward selection needs k >= 1"));
    }
    if k > candidates.n_attrs() {
        return Err(Error::Dimension {
            what: "selected attribute count",
            expected: candidates.n_attrs(),
            found: k,
        });
    }
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut last = None;
    for _ in 0..k {
        let mut best: Option<(usize, FitResult)> = None;
        for c in (0..candidates.n_attrs()).filter(|c| !selected.contains(c)) {
            let mut cols = selected.clone();
            cols.push(c);
            let fixed = candidates.select_columns(&cols)?;
            let cfg = FitConfig {
                n_attrs: cols.len(),
                ..config.clone()
            };
            let result = fit(graph, &cfg, Some(&fixed))?;
            if best.as_ref().is_none_or(|(_, b)| result.final_lq() > b.final_lq()) {
                best = Some((c, result));
            }
        }
        let (c, result) = best.ok_or(Error::Contract("no candidate columns left"))?;
        selected.push(c);
        last = Some(result);
    }
    let result = last.ok_or(Error::Contract("forward selection needs k >= 1"))?;
    Ok((selected, result))
}
