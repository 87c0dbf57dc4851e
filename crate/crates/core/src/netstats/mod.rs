//! Network statistics compared between real and model graphs: degree
//! distributions, singular values, the leading singular vector, clustering by
//! degree and triad participation.

mod svd;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Direction};

pub use svd::{leading_singular_vector, singular_values};

/// Right-continuous step series on positive `x` with positive values.
///
/// For a distribution this is the unnormalized CCDF `D(x) = #{obs >= x}`; the
/// same shape carries rank-indexed singular values and clustering by degree.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfSeries {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl CcdfSeries {
    /// Series from explicit points; `x` must be strictly increasing and positive,
    /// values positive.
    pub fn from_points(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension {
                what: "series values",
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptySeries);
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) || !(x[0] > 0.0) || !x[x.len() - 1].is_finite() {
            return Err(Error::InvalidParameter("series x must be positive, finite and strictly increasing".into()));
        }
        if y.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("series values must be positive and finite".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn min_x(&self) -> f64 {
        self.x[0]
    }

    pub fn max_x(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Step-function value at `t`, or `None` left of the support.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let idx = self.x.partition_point(|&v| v <= t);
        (idx > 0).then(|| self.y[idx - 1])
    }
}

/// Unnormalized CCDF of the positive entries of `values`.
pub fn ccdf(values: &[f64]) -> Result<CcdfSeries> {
    let mut obs: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    if obs.is_empty() {
        return Err(Error::EmptySeries);
    }
    obs.sort_unstable_by(f64::total_cmp);
    let total = obs.len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, &v) in obs.iter().enumerate() {
        if x.last() != Some(&v) {
            x.push(v);
            y.push((total - idx) as f64);
        }
    }
    CcdfSeries::from_points(x, y)
}

pub fn degree_ccdf(graph: &DirectedGraph, direction: Direction) -> Result<CcdfSeries> {
    let degrees: Vec<f64> = graph.degree_counts(direction).into_iter().map(|d| d as f64).collect();
    ccdf(&degrees)
}

/// Triangles at each node of the undirected simplification.
pub fn node_triangles(graph: &DirectedGraph) -> Vec<usize> {
    let nb = graph.undirected_neighbors();
    let mut tri = alloc::vec![0usize; graph.n_nodes()];
    for i in 0..nb.len() {
        for &j in nb[i].iter().filter(|&&j| j > i) {
            // Common neighbours above j close each triangle exactly once.
            let (a, b) = (&nb[i], &nb[j]);
            let (mut p, mut q) = (a.partition_point(|&v| v <= j), b.partition_point(|&v| v <= j));
            while p < a.len() && q < b.len() {
                match a[p].cmp(&b[q]) {
                    core::cmp::Ordering::Less => p += 1,
                    core::cmp::Ordering::Greater => q += 1,
                    core::cmp::Ordering::Equal => {
                        tri[i] += 1;
                        tri[j] += 1;
                        tri[a[p]] += 1;
                        p += 1;
                        q += 1;
                    }
                }
            }
        }
    }
    tri
}

/// `(degree, mean local clustering)` over nodes of undirected degree >= 2.
pub fn clustering_by_degree(graph: &DirectedGraph) -> Vec<(usize, f64)> {
    let nb = graph.undirected_neighbors();
    let tri = node_triangles(graph);
    let mut groups: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (i, list) in nb.iter().enumerate() {
        let d = list.len();
        if d < 2 {
            continue;
        }
        let ccf = tri[i] as f64 / (d * (d - 1) / 2) as f64;
        let entry = groups.entry(d).or_insert((0.0, 0));
        entry.0 += ccf;
        entry.1 += 1;
    }
    groups.into_iter().map(|(d, (sum, count))| (d, sum / count as f64)).collect()
}

/// `(t, number of nodes in exactly t triangles)` for `t >= 1`.
pub fn triad_participation(graph: &DirectedGraph) -> Vec<(usize, usize)> {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for t in node_triangles(graph).into_iter().filter(|&t| t > 0) {
        *hist.entry(t).or_insert(0) += 1;
    }
    hist.into_iter().collect()
}

/// The six statistics used to compare graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Statistic {
    InDegree,
    OutDegree,
    SingularValues,
    SingularVector,
    Clustering,
    Triads,
}

impl Statistic {
    pub const ALL: [Statistic; 6] = [
        Statistic::InDegree,
        Statistic::OutDegree,
        Statistic::SingularValues,
        Statistic::SingularVector,
        Statistic::Clustering,
        Statistic::Triads,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::InDegree => "indeg",
            Statistic::OutDegree => "outdeg",
            Statistic::SingularValues => "sval",
            Statistic::SingularVector => "svec",
            Statistic::Clustering => "ccf",
            Statistic::Triads => "triad",
        }
    }

    /// Whether the series values are counts (`x,count`) or measurements (`x,value`).
    pub fn is_count(self) -> bool {
        matches!(self, Statistic::InDegree | Statistic::OutDegree | Statistic::Triads | Statistic::SingularVector)
    }

    /// Series for this statistic. Degrees, vector components and triangle counts
    /// are CCDFs; singular values are indexed by rank and clustering by degree.
    /// Zero entries are dropped since everything is compared on log axes.
    pub fn series(self, graph: &DirectedGraph, k_singular: usize) -> Result<CcdfSeries> {
        match self {
            Statistic::InDegree => degree_ccdf(graph, Direction::In),
            Statistic::OutDegree => degree_ccdf(graph, Direction::Out),
            Statistic::SingularValues => {
                let k = k_singular.min(graph.n_nodes());
                let sv = singular_values(graph, k)?;
                let (x, y): (Vec<f64>, Vec<f64>) = sv
                    .into_iter()
                    .enumerate()
                    .filter(|(_, s)| *s > SERIES_ZERO)
                    .map(|(r, s)| ((r + 1) as f64, s))
                    .unzip();
                CcdfSeries::from_points(x, y)
            }
            Statistic::SingularVector => {
                let v = leading_singular_vector(graph)?;
                let v: Vec<f64> = v.into_iter().map(|c| if c > SERIES_ZERO { c } else { 0.0 }).collect();
                ccdf(&v)
            }
            Statistic::Clustering => {
                let (x, y) = clustering_by_degree(graph)
                    .into_iter()
                    .filter(|(_, c)| *c > 0.0)
                    .map(|(d, c)| (d as f64, c))
                    .unzip();
                CcdfSeries::from_points(x, y)
            }
            Statistic::Triads => {
                let counts: Vec<f64> = node_triangles(graph).into_iter().map(|t| t as f64).collect();
                ccdf(&counts)
            }
        }
    }
}

// Values below this are numerical zeros of the spectral routines.
const SERIES_ZERO: f64 = 1e-9;
