// Truncated SVD of the adjacency matrix by Golub-Kahan-Lanczos bidiagonalization
// with full reorthogonalization. The small bidiagonal factor is diagonalized by
// one-sided Jacobi.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::math::{abs, sqrt};

const REL_TOL: f64 = 1e-10;
const BREAKDOWN: f64 = 1e-12;
const START_SEED: u64 = 0x0005_eed0_f5bd;

/// Top `k` singular values of the adjacency matrix, in descending order.
pub fn singular_values(graph: &DirectedGraph, k: usize) -> Result<Vec<f64>> {
    let n = graph.n_nodes();
    if k > n {
        return Err(Error::Dimension {
            what: "singular value count",
            expected: n,
            found: k,
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    Ok(truncated(graph, k)?.values)
}

/// Absolute components of the unit left singular vector of the largest singular value.
pub fn leading_singular_vector(graph: &DirectedGraph) -> Result<Vec<f64>> {
    let n = graph.n_nodes();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let svd = truncated(graph, n.min(2))?;
    let top = svd.values[0];
    let second = svd.values.get(1).copied().unwrap_or(0.0);
    if top - second <= 1e-8 {
        return Err(Error::DegenerateTopValue { gap: top - second });
    }
    Ok(svd.left.into_iter().map(abs).collect())
}

struct Truncated {
    values: Vec<f64>,
    left: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

// Twice-applied Gram-Schmidt against `basis`.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

// Unit vector orthogonal to `basis`, or `None` when the basis already spans the space.
fn fresh_direction(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    if basis.len() >= n {
        return None;
    }
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

fn truncated(graph: &DirectedGraph, k: usize) -> Result<Truncated> {
    let n = graph.n_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let max_basis = n.min(10 * k + 100);
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = vec![fresh_direction(&mut rng, n, &[]).ok_or(Error::EmptySeries)?];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut target = n.min(2 * k + 10);
    let mut scratch = vec![0.0; n];
    loop {
        while alphas.len() < target {
            let j = alphas.len();
            graph.mul_vec(&vs[j], &mut scratch);
            let mut u = scratch.clone();
            if j > 0 {
                let b = betas[j - 1];
                u.iter_mut().zip(&us[j - 1]).for_each(|(x, y)| *x -= b * y);
            }
            orthogonalize(&mut u, &us);
            let mut alpha = norm(&u);
            if alpha <= BREAKDOWN {
                alpha = 0.0;
                u = fresh_direction(&mut rng, n, &us).unwrap_or(u);
            } else {
                u.iter_mut().for_each(|x| *x /= alpha);
            }
            alphas.push(alpha);
            us.push(u);

            graph.mul_transpose_vec(&us[j], &mut scratch);
            let mut v = scratch.clone();
            v.iter_mut().zip(&vs[j]).for_each(|(x, y)| *x -= alpha * y);
            orthogonalize(&mut v, &vs);
            let mut beta = norm(&v);
            if beta <= BREAKDOWN {
                beta = 0.0;
                match fresh_direction(&mut rng, n, &vs) {
                    Some(fresh) => v = fresh,
                    None => v = vec![0.0; n],
                }
            } else {
                v.iter_mut().for_each(|x| *x /= beta);
            }
            betas.push(beta);
            vs.push(v);
        }

        let m = alphas.len();
        let (sigma, x) = bidiagonal_svd(&alphas, &betas[..m - 1]);
        let beta_m = betas[m - 1];
        let scale = sigma[0].max(1.0);
        let residual = (0..k).map(|i| abs(beta_m * x[(m - 1) * m + i])).fold(0.0, f64::max);
        if residual <= REL_TOL * scale || m == n {
            let mut left = vec![0.0; n];
            for (j, u) in us.iter().enumerate() {
                let c = x[j * m];
                left.iter_mut().zip(u).for_each(|(l, v)| *l += c * v);
            }
            let nl = norm(&left);
            if nl > 0.0 {
                left.iter_mut().for_each(|v| *v /= nl);
            }
            return Ok(Truncated {
                values: sigma[..k].to_vec(),
                left,
            });
        }
        if m >= max_basis {
            return Err(Error::NoConvergence { steps: m, residual });
        }
        target = max_basis.min(2 * m);
    }
}

// Singular values (descending) and left singular vectors (row-major m x m,
// column i for value i) of the upper bidiagonal matrix with diagonal `d` and
// superdiagonal `e`.
fn bidiagonal_svd(d: &[f64], e: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = d.len();
    // Columns of g are the columns of B^T; rotations accumulate into w.
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        g[i * m + i] = d[i];
        if i + 1 < m {
            g[(i + 1) * m + i] = e[i];
        }
    }
    let mut w = vec![0.0; m * m];
    for i in 0..m {
        w[i * m + i] = 1.0;
    }
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
                for r in 0..m {
                    let (x, y) = (g[r * m + p], g[r * m + q]);
                    a += x * x;
                    b += y * y;
                    c += x * y;
                }
                if abs(c) <= 1e-15 * sqrt(a * b) || c == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * c);
                let t = zeta.signum() / (abs(zeta) + sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / sqrt(1.0 + t * t);
                let sn = cs * t;
                for mat in [&mut g, &mut w] {
                    for r in 0..m {
                        let (x, y) = (mat[r * m + p], mat[r * m + q]);
                        mat[r * m + p] = cs * x - sn * y;
                        mat[r * m + q] = sn * x + cs * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..m).map(|c| sqrt((0..m).map(|r| g[r * m + c] * g[r * m + c]).sum())).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut x = vec![0.0; m * m];
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..m {
            x[r * m + dst] = w[r * m + src];
        }
    }
    (order.iter().map(|&i| norms[i]).collect(), x)
}
