use alloc::vec;
use alloc::vec::Vec;

use super::VariationalPosterior;
use crate::error::{Error, Result};
use crate::math::{ln, xlogx};

/// Mutual information between posterior columns `l` and `l2`.
pub fn mi_pair(posterior: &VariationalPosterior, l: usize, l2: usize) -> Result<f64> {
    check_attr(posterior, l)?;
    check_attr(posterior, l2)?;
    if l == l2 {
        return Err(Error::Contract("mutual information needs two distinct attributes"));
    }
    let stats = MiStats::new(posterior);
    Ok(stats.mi(l, l2))
}

/// Derivative of `sum_{l2 != l} MI(l, l2)` with respect to `phi_il`.
pub fn mi_gradient(posterior: &VariationalPosterior, i: usize, l: usize) -> Result<f64> {
    check_attr(posterior, l)?;
    if i >= posterior.n_nodes() {
        return Err(Error::NodeOutOfRange { node: i, n: posterior.n_nodes() });
    }
    if posterior.is_fixed(l) {
        return Err(Error::Contract("gradient requested for a fixed attribute"));
    }
    Ok(MiStats::new(posterior).gradient(posterior, i, l))
}

fn check_attr(posterior: &VariationalPosterior, l: usize) -> Result<()> {
    if l >= posterior.n_attrs() {
        return Err(Error::Dimension {
            what: "attribute index",
            expected: posterior.n_attrs(),
            found: l,
        });
    }
    Ok(())
}

/// Column marginals `p_l(x)` and pairwise joints `p_ll'(x, y)` of a posterior.
pub(crate) struct MiStats {
    l: usize,
    n: usize,
    marg: Vec<[f64; 2]>,
    joint: Vec<[[f64; 2]; 2]>,
}

impl MiStats {
    pub fn new(post: &VariationalPosterior) -> Self {
        let (n, l) = (post.n_nodes(), post.n_attrs());
        let mut marg = vec![[0.0; 2]; l];
        let mut joint = vec![[[0.0; 2]; 2]; l * l];
        for i in 0..n {
            for a in 0..l {
                let qa = post.q(i, a);
                marg[a][0] += qa[0];
                marg[a][1] += qa[1];
                for b in a + 1..l {
                    let qb = post.q(i, b);
                    for x in 0..2 {
                        for y in 0..2 {
                            joint[a * l + b][x][y] += qa[x] * qb[y];
                        }
                    }
                }
            }
        }
        let scale = if n > 0 { 1.0 / n as f64 } else { 0.0 };
        for m in &mut marg {
            m[0] *= scale;
            m[1] *= scale;
        }
        for a in 0..l {
            for b in a + 1..l {
                let mut p = joint[a * l + b];
                for row in &mut p {
                    row[0] *= scale;
                    row[1] *= scale;
                }
                joint[a * l + b] = p;
                joint[b * l + a] = [[p[0][0], p[1][0]], [p[0][1], p[1][1]]];
            }
        }
        Self { l, n, marg, joint }
    }

    pub fn mi(&self, a: usize, b: usize) -> f64 {
        let p = &self.joint[a * self.l + b];
        let mut total = 0.0;
        for (x, row) in p.iter().enumerate() {
            for (y, &pxy) in row.iter().enumerate() {
                if pxy > 0.0 {
                    total += xlogx(pxy) - pxy * ln(self.marg[a][x] * self.marg[b][y]);
                }
            }
        }
        total
    }

    pub fn gradient(&self, post: &VariationalPosterior, i: usize, l: usize) -> f64 {
        let inv_n = 1.0 / self.n as f64;
        let mut total = 0.0;
        for b in 0..self.l {
            if b == l {
                continue;
            }
            let p = &self.joint[l * self.l + b];
            let qb = post.q(i, b);
            for (x, sign) in [(0, -1.0), (1, 1.0)] {
                for y in 0..2 {
                    let pxy = p[x][y];
                    if pxy > 0.0 {
                        total += sign * qb[y] * inv_n * ln(pxy / (self.marg[l][x] * self.marg[b][y]));
                    }
                }
            }
        }
        total
    }
}
