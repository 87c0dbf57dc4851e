use alloc::vec;
use alloc::vec::Vec;

use crate::attributes::BinaryAttributeMatrix;
use crate::error::{Error, Result};
use crate::math::clamp;

/// Default clamp for variational parameters and optimized model parameters.
pub const DEFAULT_EPS: f64 = 1e-6;

/// Mean-field posterior `Q(F) = prod_il Q_il(F_il)` with `phi_il = Q(F_il = 1)`.
///
/// Columns are either latent (optimized by the E-step) or fixed to observed bits,
/// stored as `eps` / `1 - eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalPosterior {
    n_nodes: usize,
    n_attrs: usize,
    phi: Vec<f64>,
    fixed: Vec<bool>,
    eps: f64,
}

impl VariationalPosterior {
    /// All-latent posterior from row-major `phi`, clamped into `[eps, 1 - eps]`.
    pub fn from_phi(n_nodes: usize, n_attrs: usize, phi: Vec<f64>, eps: f64) -> Result<Self> {
        if phi.len() != n_nodes * n_attrs {
            return Err(Error::Dimension {
                what: "posterior entries",
                expected: n_nodes * n_attrs,
                found: phi.len(),
            });
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidParameter(alloc::format!("clamp eps {eps} outside (0, 0.5)")));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("posterior entries must be finite".into()));
        }
        let phi = phi.into_iter().map(|p| clamp(p, eps, 1.0 - eps)).collect();
        Ok(Self {
            n_nodes,
            n_attrs,
            phi,
            fixed: vec![false; n_attrs],
            eps,
        })
    }

    pub fn uniform(n_nodes: usize, n_attrs: usize, value: f64, eps: f64) -> Result<Self> {
        Self::from_phi(n_nodes, n_attrs, vec![value; n_nodes * n_attrs], eps)
    }

    /// Posterior pinned to `bits` in every column.
    pub fn from_bits(bits: &BinaryAttributeMatrix, eps: f64) -> Result<Self> {
        let mut post = Self::uniform(bits.n_nodes(), bits.n_attrs(), 0.5, eps)?;
        for l in 0..bits.n_attrs() {
            post.pin_column(l, bits, l)?;
        }
        Ok(post)
    }

    /// Fixes column `l` to column `src` of `bits`.
    pub fn pin_column(&mut self, l: usize, bits: &BinaryAttributeMatrix, src: usize) -> Result<()> {
        if bits.n_nodes() != self.n_nodes {
            return Err(Error::Dimension {
                what: "fixed attribute rows",
                expected: self.n_nodes,
                found: bits.n_nodes(),
            });
        }
        if l >= self.n_attrs || src >= bits.n_attrs() {
            return Err(Error::Contract("pinned column index out of range"));
        }
        for i in 0..self.n_nodes {
            self.phi[i * self.n_attrs + l] = if bits.get(i, src) == 1 { 1.0 - self.eps } else { self.eps };
        }
        self.fixed[l] = true;
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_attrs(&self) -> usize {
        self.n_attrs
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn phi(&self, i: usize, l: usize) -> f64 {
        self.phi[i * self.n_attrs + l]
    }

    /// `[Q_il(0), Q_il(1)]`.
    #[inline]
    pub fn q(&self, i: usize, l: usize) -> [f64; 2] {
        let p = self.phi(i, l);
        [1.0 - p, p]
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    pub fn is_fixed(&self, l: usize) -> bool {
        self.fixed[l]
    }

    pub fn n_latent_attrs(&self) -> usize {
        self.fixed.iter().filter(|f| !**f).count()
    }

    /// Sets a latent entry, clamping into `[eps, 1 - eps]`.
    pub fn set_phi(&mut self, i: usize, l: usize, value: f64) -> Result<()> {
        if self.fixed[l] {
            return Err(Error::Contract("cannot update a fixed attribute"));
        }
        self.phi[i * self.n_attrs + l] = clamp(value, self.eps, 1.0 - self.eps);
        Ok(())
    }

    /// Most probable attribute values (`phi >= 0.5` maps to 1).
    pub fn map_bits(&self) -> BinaryAttributeMatrix {
        let mut out = BinaryAttributeMatrix::zeros(self.n_nodes, self.n_attrs);
        for i in 0..self.n_nodes {
            for l in 0..self.n_attrs {
                out.set(i, l, self.phi(i, l) >= 0.5);
            }
        }
        out
    }
}
