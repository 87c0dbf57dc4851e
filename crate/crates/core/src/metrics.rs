//! Distances between statistic series on log-log axes, and scores of a
//! probabilistic adjacency matrix against an observed graph.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::math::{abs, ln, ln_1p, sqrt};
use crate::model::ProbAdjacency;
use crate::netstats::{CcdfSeries, Statistic};

// Shared window [a, b] of two supports and the merged grid inside it.
fn window(d1: &CcdfSeries, d2: &CcdfSeries) -> Result<(f64, f64, Vec<f64>)> {
    let a = d1.min_x().max(d2.min_x());
    let b = d1.max_x().min(d2.max_x());
    if a > b {
        return Err(Error::IncomparableSupports);
    }
    let mut grid: Vec<f64> = d1
        .x()
        .iter()
        .chain(d2.x())
        .copied()
        .filter(|&x| x >= a && x <= b)
        .collect();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    Ok((a, b, grid))
}

fn log_gap(d1: &CcdfSeries, d2: &CcdfSeries, x: f64) -> f64 {
    // Both series are defined on the window, which starts at or after both minima.
    let v1 = d1.value_at(x).unwrap_or(f64::NAN);
    let v2 = d2.value_at(x).unwrap_or(f64::NAN);
    ln(v1) - ln(v2)
}

/// `max |log D1(x) - log D2(x)|` over grid points of either series in the shared support.
pub fn ks_log(d1: &CcdfSeries, d2: &CcdfSeries) -> Result<f64> {
    let (_, _, grid) = window(d1, d2)?;
    Ok(grid.iter().map(|&x| abs(log_gap(d1, d2, x))).fold(0.0, f64::max))
}

/// Root mean square of `log D1 - log D2` over the shared support, measured in `log x`.
pub fn l2_log(d1: &CcdfSeries, d2: &CcdfSeries) -> Result<f64> {
    let (a, b, grid) = window(d1, d2)?;
    if !(a < b) {
        return Err(Error::DegenerateSupport);
    }
    let mut integral = 0.0;
    for w in grid.windows(2) {
        let gap = log_gap(d1, d2, w[0]);
        integral += gap * gap * (ln(w[1]) - ln(w[0]));
    }
    Ok(sqrt(integral / (ln(b) - ln(a))))
}

fn check_size(graph: &DirectedGraph, p: &ProbAdjacency) -> Result<()> {
    if graph.n_nodes() != p.n_nodes() {
        return Err(Error::Dimension {
            what: "probability matrix nodes",
            expected: graph.n_nodes(),
            found: p.n_nodes(),
        });
    }
    Ok(())
}

/// `sum_{i != j} A_ij log P_ij + (1 - A_ij) log(1 - P_ij)`.
pub fn prob_log_likelihood(graph: &DirectedGraph, p: &ProbAdjacency) -> Result<f64> {
    check_size(graph, p)?;
    let n = graph.n_nodes();
    let mut total = 0.0;
    for i in 0..n {
        let mut next = graph.out_neighbors(i).iter().copied().peekable();
        for j in (0..n).filter(|&j| j != i) {
            let pij = p.get(i, j);
            if next.peek() == Some(&j) {
                next.next();
                total += ln(pij);
            } else {
                total += ln_1p(-pij);
            }
        }
    }
    Ok(total)
}

/// Edge probability mass relative to a uniform graph of the same density, `sum_edges P_ij / (E² / N²)`.
pub fn tpi(graph: &DirectedGraph, p: &ProbAdjacency) -> Result<f64> {
    check_size(graph, p)?;
    let e = graph.n_edges();
    if e == 0 {
        return Err(Error::UndefinedMetric("TPI needs at least one edge"));
    }
    let mass: f64 = graph.edges().map(|(i, j)| p.get(i, j)).sum();
    let n = graph.n_nodes() as f64;
    let e = e as f64;
    Ok(mass / (e * e / (n * n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticDistance {
    pub statistic: Statistic,
    pub ks: f64,
    pub l2: f64,
}

/// KS and L2 per statistic, plus their averages.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub rows: Vec<StatisticDistance>,
    /// Statistics that could not be compared, with the reason.
    pub skipped: Vec<(Statistic, String)>,
}

impl DistanceReport {
    /// Compares `model` with `real` on every statistic. A statistic that cannot be
    /// computed for either graph, or whose supports do not overlap, is skipped.
    pub fn compare(real: &DirectedGraph, model: &DirectedGraph, k_singular: usize) -> Self {
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        for stat in Statistic::ALL {
            let pair = stat
                .series(real, k_singular)
                .and_then(|a| stat.series(model, k_singular).map(|b| (a, b)));
            let scored = pair.and_then(|(a, b)| {
                let ks = ks_log(&a, &b)?;
                // A single shared point has no L2 extent; it is a perfect match there.
                let l2 = match l2_log(&a, &b) {
                    Err(Error::DegenerateSupport) => ks,
                    other => other?,
                };
                Ok((ks, l2))
            });
            match scored {
                Ok((ks, l2)) => rows.push(StatisticDistance { statistic: stat, ks, l2 }),
                Err(e) => skipped.push((stat, alloc::format!("{e}"))),
            }
        }
        Self { rows, skipped }
    }

    pub fn avg_ks(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.ks))
    }

    pub fn avg_l2(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.l2))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}
