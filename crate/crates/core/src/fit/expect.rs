// Expectation kernels shared by the E-step, M-step and lower bound.
//
// For a directed pair (i, j) and attribute k the three per-attribute factors are
// E[Θ_k], E[Θ_k²] and E[ln Θ_k] under the product of the endpoint marginals. Pair
// expectations are products (or sums) of these factors, so every routine costs
// O(L) per pair. `work` counts factor evaluations.

use alloc::vec;
use alloc::vec::Vec;

use super::{Mode, VariationalPosterior};
use crate::graph::DirectedGraph;
use crate::math::{ln, ln_1p};
use crate::model::AffinityMatrix;

pub(crate) type Mat = [[f64; 2]; 2];

#[derive(Debug, Clone)]
pub(crate) struct Tables {
    pub t: Vec<Mat>,
    pub t2: Vec<Mat>,
    pub lt: Vec<Mat>,
}

impl Tables {
    pub fn new(thetas: &[AffinityMatrix]) -> Self {
        let t: Vec<Mat> = thetas.iter().map(AffinityMatrix::entries).collect();
        let t2 = t.iter().map(|m| m.map(|r| r.map(|x| x * x))).collect();
        let lt = t.iter().map(|m| m.map(|r| r.map(ln))).collect();
        Self { t, t2, lt }
    }

    pub fn transposed(&self) -> Self {
        let tr = |v: &[Mat]| v.iter().map(|m| [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]).collect();
        Self {
            t: tr(&self.t),
            t2: tr(&self.t2),
            lt: tr(&self.lt),
        }
    }
}

#[inline]
pub(crate) fn mean2(y: &Mat, a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * (b[0] * y[0][0] + b[1] * y[0][1]) + a[1] * (b[0] * y[1][0] + b[1] * y[1][1])
}

#[inline]
pub(crate) fn row_mean(y: &Mat, v: usize, b: [f64; 2]) -> f64 {
    b[0] * y[v][0] + b[1] * y[v][1]
}

/// `out[k] = prod_{k' != k} vals[k']` without division.
pub(crate) fn exclusive_products(vals: &[f64], out: &mut [f64]) {
    let mut acc = 1.0;
    for (o, v) in out.iter_mut().zip(vals) {
        *o = acc;
        acc *= v;
    }
    acc = 1.0;
    for (o, v) in out.iter_mut().zip(vals).rev() {
        *o *= acc;
        acc *= v;
    }
}

/// Joint law of `prod_k Θ_k[a_k][b_k]` as (weight, value) atoms, skipping `skip`.
pub(crate) fn product_atoms(t: &[Mat], qa: &[[f64; 2]], qb: &[[f64; 2]], skip: Option<usize>) -> Vec<(f64, f64)> {
    let mut atoms = vec![(1.0, 1.0)];
    for k in 0..t.len() {
        if Some(k) == skip {
            continue;
        }
        let mut next = Vec::with_capacity(atoms.len() * 4);
        for &(w, r) in &atoms {
            for a in 0..2 {
                for b in 0..2 {
                    next.push((w * qa[k][a] * qb[k][b], r * t[k][a][b]));
                }
            }
        }
        atoms = next;
    }
    atoms
}

/// `E[ln(1 - c R)]` over the atoms of `R`.
#[inline]
pub(crate) fn expected_log1m(atoms: &[(f64, f64)], c: f64) -> f64 {
    atoms.iter().map(|&(w, r)| w * ln_1p(-c * r)).sum()
}

/// `-x - x²/2` in expectation, given `E[x]` and `E[x²]`.
#[inline]
pub(crate) fn taylor(e1: f64, e2: f64) -> f64 {
    -e1 - 0.5 * e2
}

pub(crate) struct Ctx<'a> {
    pub graph: &'a DirectedGraph,
    pub n: usize,
    pub l: usize,
    pub q: Vec<[f64; 2]>,
    pub m: Vec<[f64; 2]>,
    pub mu: &'a [f64],
    pub fwd: Tables,
    pub bwd: Tables,
    pub mode: Mode,
}

impl<'a> Ctx<'a> {
    pub fn new(
        graph: &'a DirectedGraph,
        post: &VariationalPosterior,
        mu: &'a [f64],
        thetas: &[AffinityMatrix],
        mode: Mode,
    ) -> Self {
        let q = post.phi_values().iter().map(|&p| [1.0 - p, p]).collect();
        let fwd = Tables::new(thetas);
        let bwd = fwd.transposed();
        Self {
            graph,
            n: post.n_nodes(),
            l: post.n_attrs(),
            q,
            m: mu.iter().map(|&p| [1.0 - p, p]).collect(),
            mu,
            fwd,
            bwd,
            mode,
        }
    }

    #[inline]
    pub fn qrow(&self, i: usize) -> &[[f64; 2]] {
        &self.q[i * self.l..(i + 1) * self.l]
    }

    // Factor expectations over all attributes except `skip`: (prod E[Θ], prod E[Θ²], sum E[ln Θ]).
    #[inline]
    fn factors(&self, tb: &Tables, qa: &[[f64; 2]], qb: &[[f64; 2]], skip: usize) -> (f64, f64, f64) {
        let (mut e1, mut e2, mut el) = (1.0, 1.0, 0.0);
        for k in 0..self.l {
            if k == skip {
                continue;
            }
            e1 *= mean2(&tb.t[k], qa[k], qb[k]);
            e2 *= mean2(&tb.t2[k], qa[k], qb[k]);
            el += mean2(&tb.lt[k], qa[k], qb[k]);
        }
        (e1, e2, el)
    }

    /// `log P~_il(v)` for `v = 0, 1`, up to a constant shared by both values.
    pub fn ptilde(&self, i: usize, l: usize, work: &mut u64) -> [f64; 2] {
        let mut out = [ln(1.0 - self.mu[l]), ln(self.mu[l])];
        self.side(i, l, &self.fwd, self.graph.out_neighbors(i), &mut out, work);
        self.side(i, l, &self.bwd, self.graph.in_neighbors(i), &mut out, work);
        out
    }

    // Contribution of all pairs with `i` on one side; `tb` is transposed for the
    // destination side so `i` always indexes rows.
    fn side(&self, i: usize, l: usize, tb: &Tables, nb: &[usize], out: &mut [f64; 2], work: &mut u64) {
        let qi = self.qrow(i);
        let lf = self.l as u64;
        let edge_minus_taylor = |qj: &[[f64; 2]], out: &mut [f64; 2]| {
            let (e1, e2, el) = self.factors(tb, qi, qj, l);
            for (v, o) in out.iter_mut().enumerate() {
                let edge = row_mean(&tb.lt[l], v, qj[l]) + el;
                let tay = taylor(row_mean(&tb.t[l], v, qj[l]) * e1, row_mean(&tb.t2[l], v, qj[l]) * e2);
                *o += edge - tay;
            }
        };
        match self.mode {
            Mode::Fast => {
                let (e1, e2, _) = self.factors(tb, qi, &self.m, l);
                let others = (self.n.saturating_sub(1)) as f64;
                for (v, o) in out.iter_mut().enumerate() {
                    let ml = self.m[l];
                    *o += others * taylor(row_mean(&tb.t[l], v, ml) * e1, row_mean(&tb.t2[l], v, ml) * e2);
                }
                *work += lf;
                for &j in nb {
                    edge_minus_taylor(self.qrow(j), out);
                    *work += lf;
                }
            }
            Mode::Taylor | Mode::Exact => {
                let mut next = nb.iter().copied().peekable();
                for j in 0..self.n {
                    if j == i {
                        continue;
                    }
                    *work += lf;
                    let qj = self.qrow(j);
                    let is_edge = next.peek() == Some(&j);
                    if is_edge {
                        next.next();
                    }
                    let (e1, e2, el) = self.factors(tb, qi, qj, l);
                    if is_edge {
                        for (v, o) in out.iter_mut().enumerate() {
                            *o += row_mean(&tb.lt[l], v, qj[l]) + el;
                        }
                    } else if self.mode == Mode::Taylor {
                        for (v, o) in out.iter_mut().enumerate() {
                            *o += taylor(row_mean(&tb.t[l], v, qj[l]) * e1, row_mean(&tb.t2[l], v, qj[l]) * e2);
                        }
                    } else {
                        let atoms = product_atoms(&tb.t, qi, qj, Some(l));
                        for (v, o) in out.iter_mut().enumerate() {
                            *o += (0..2).map(|y| qj[l][y] * expected_log1m(&atoms, tb.t[l][v][y])).sum::<f64>();
                        }
                    }
                }
            }
        }
    }

    /// Prior and entropy terms of the bound.
    pub fn prior_and_entropy(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for (k, q) in self.qrow(i).iter().enumerate() {
                total += q[1] * ln(self.mu[k]) + q[0] * ln(1.0 - self.mu[k]);
                total -= crate::math::xlogx(q[0]) + crate::math::xlogx(q[1]);
            }
        }
        total
    }

    /// Expected graph log-likelihood term of the bound.
    pub fn graph_term(&self, work: &mut u64) -> f64 {
        let lf = self.l as u64;
        let tb = &self.fwd;
        let mut total = 0.0;
        match self.mode {
            Mode::Fast => {
                let (g1, g2, _) = self.factors(tb, &self.m, &self.m, usize::MAX);
                let pairs = self.n as f64 * (self.n.saturating_sub(1)) as f64;
                total += pairs * taylor(g1, g2);
                *work += lf;
                for (i, j) in self.graph.edges() {
                    let (e1, e2, el) = self.factors(tb, self.qrow(i), self.qrow(j), usize::MAX);
                    total += el - taylor(e1, e2);
                    *work += lf;
                }
            }
            Mode::Taylor | Mode::Exact => {
                for i in 0..self.n {
                    let mut next = self.graph.out_neighbors(i).iter().copied().peekable();
                    for j in 0..self.n {
                        if j == i {
                            continue;
                        }
                        *work += lf;
                        let is_edge = next.peek() == Some(&j);
                        if is_edge {
                            next.next();
                        }
                        let (e1, e2, el) = self.factors(tb, self.qrow(i), self.qrow(j), usize::MAX);
                        total += if is_edge {
                            el
                        } else if self.mode == Mode::Taylor {
                            taylor(e1, e2)
                        } else {
                            expected_log1m(&product_atoms(&tb.t, self.qrow(i), self.qrow(j), None), 1.0)
                        };
                    }
                }
            }
        }
        total
    }

    /// Gradient of the graph term with respect to every affinity entry.
    pub fn theta_gradients(&self, work: &mut u64) -> Vec<Mat> {
        let l = self.l;
        let lf = l as u64;
        let tb = &self.fwd;
        let mut grads = vec![[[0.0; 2]; 2]; l];
        let mut a = vec![0.0; l];
        let mut b = vec![0.0; l];
        let mut ax = vec![0.0; l];
        let mut bx = vec![0.0; l];
        let load = |qa: &[[f64; 2]], qb: &[[f64; 2]], a: &mut [f64], b: &mut [f64], ax: &mut [f64], bx: &mut [f64]| {
            for k in 0..l {
                a[k] = mean2(&tb.t[k], qa[k], qb[k]);
                b[k] = mean2(&tb.t2[k], qa[k], qb[k]);
            }
            exclusive_products(a, ax);
            exclusive_products(b, bx);
        };
        // d/dΘ_k[z] of the Taylor pair term, scaled by `sign`.
        let add_taylor = |g: &mut [Mat], qa: &[[f64; 2]], qb: &[[f64; 2]], ax: &[f64], bx: &[f64], sign: f64| {
            for k in 0..l {
                for z1 in 0..2 {
                    for z2 in 0..2 {
                        g[k][z1][z2] -= sign * qa[k][z1] * qb[k][z2] * (ax[k] + tb.t[k][z1][z2] * bx[k]);
                    }
                }
            }
        };
        let add_edge = |g: &mut [Mat], qa: &[[f64; 2]], qb: &[[f64; 2]]| {
            for k in 0..l {
                for z1 in 0..2 {
                    for z2 in 0..2 {
                        g[k][z1][z2] += qa[k][z1] * qb[k][z2] / tb.t[k][z1][z2];
                    }
                }
            }
        };
        match self.mode {
            Mode::Fast => {
                let pairs = self.n as f64 * (self.n.saturating_sub(1)) as f64;
                load(&self.m, &self.m, &mut a, &mut b, &mut ax, &mut bx);
                add_taylor(&mut grads, &self.m, &self.m, &ax, &bx, pairs);
                *work += lf;
                for (i, j) in self.graph.edges() {
                    let (qi, qj) = (self.qrow(i), self.qrow(j));
                    load(qi, qj, &mut a, &mut b, &mut ax, &mut bx);
                    add_edge(&mut grads, qi, qj);
                    add_taylor(&mut grads, qi, qj, &ax, &bx, -1.0);
                    *work += lf;
                }
            }
            Mode::Taylor | Mode::Exact => {
                for i in 0..self.n {
                    let qi = self.qrow(i);
                    let mut next = self.graph.out_neighbors(i).iter().copied().peekable();
                    for j in 0..self.n {
                        if j == i {
                            continue;
                        }
                        *work += lf;
                        let qj = self.qrow(j);
                        if next.peek() == Some(&j) {
                            next.next();
                            add_edge(&mut grads, qi, qj);
                        } else if self.mode == Mode::Taylor {
                            load(qi, qj, &mut a, &mut b, &mut ax, &mut bx);
                            add_taylor(&mut grads, qi, qj, &ax, &bx, 1.0);
                        } else {
                            for k in 0..l {
                                let atoms = product_atoms(&tb.t, qi, qj, Some(k));
                                for z1 in 0..2 {
                                    for z2 in 0..2 {
                                        let c = tb.t[k][z1][z2];
                                        let d: f64 = atoms.iter().map(|&(w, r)| w * r / (1.0 - c * r)).sum();
                                        grads[k][z1][z2] -= qi[k][z1] * qj[k][z2] * d;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        grads
    }
}
