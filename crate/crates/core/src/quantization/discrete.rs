// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Discrete operators `t_a f(x) = int_{T^n} exp(2 pi i x . xi) a(x, xi) (F f)(xi) dxi`
//! on finitely supported lattice fields.
//!
//! Symbols are stored by their Fourier coefficients in `xi`,
//! `a(x, xi) = sum_k a^(x, k) exp(2 pi i k . xi)`, so the torus integral is a
//! finite quadrature that is exact once the grid outruns every lattice offset.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyWindow, LatticeBox, LatticeField, TorusGrid, C64};
use crate::linalg::CMatrix;
use crate::nuclearity::DiscreteDecomposition;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSymbol {
    sites: LatticeBox,
    dual: FrequencyWindow,
    d_out: usize,
    d_in: usize,
    /// Indexed `x * K + k`.
    coeffs: Vec<CMatrix>,
}

impl DiscreteSymbol {
    pub fn new(sites: LatticeBox, dual: FrequencyWindow, d_out: usize, d_in: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        if sites.dim() != dual.dim() {
            return Err(Error::Dimension("lattice sites and dual window differ in dimension".into()));
        }
        if coeffs.len() != sites.len() * dual.len() {
            return Err(Error::Shape(format!(
                "discrete symbol needs {} coefficient blocks, got {}",
                sites.len() * dual.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|m| m.nrows() != d_out || m.ncols() != d_in) {
            return Err(Error::Shape(format!("coefficient blocks must be {d_out}x{d_in}")));
        }
        Ok(Self { sites, dual, d_out, d_in, coeffs })
    }

    /// Symbol whose `xi`-dependence is the constant matrix `m` at every site.
    pub fn constant(sites: LatticeBox, m: CMatrix) -> Result<Self> {
        let dual = FrequencyWindow::new(sites.dim(), 0)?;
        let (r, c) = m.shape();
        let coeffs = vec![m; sites.len()];
        Self::new(sites, dual, r, c, coeffs)
    }

    pub fn sites(&self) -> &LatticeBox {
        &self.sites
    }

    pub fn dual(&self) -> &FrequencyWindow {
        &self.dual
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn coefficient(&self, site: usize, k: usize) -> &CMatrix {
        &self.coeffs[site * self.dual.len() + k]
    }

    /// `a(x, xi)` at an arbitrary point of the torus.
    pub fn value_at(&self, site: usize, xi: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_out, self.d_in);
        for (k, kv) in self.dual.iter().enumerate() {
            let phase: f64 = kv.iter().zip(xi).map(|(&a, &b)| a as f64 * b).sum();
            out += self.coefficient(site, k) * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase);
        }
        out
    }

    /// `a(x, q / M)` on a quadrature grid with exact phase reduction.
    pub(crate) fn value_on_grid(&self, site: usize, grid: &TorusGrid, q: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.d_out, self.d_in);
        for (k, kv) in self.dual.iter().enumerate() {
            out += self.coefficient(site, k) * grid.character(q, &kv, 1.0);
        }
        out
    }
}

/// Smallest quadrature size per axis for which `apply_discrete` is exact:
/// one more than the largest possible `|x + k - y|_inf`.
pub fn required_quadrature(a: &DiscreteSymbol, f: &LatticeField) -> usize {
    a.sites.radius() + a.dual.radius() + f.support().radius() + 1
}

/// Apply the discrete operator using the smallest exact quadrature.
pub fn apply_discrete(a: &DiscreteSymbol, f: &LatticeField) -> Result<LatticeField> {
    apply_discrete_with_quadrature(a, f, required_quadrature(a, f))
}

/// Apply the discrete operator with an explicit `M`-point-per-axis quadrature
/// of the torus integral.
pub fn apply_discrete_with_quadrature(a: &DiscreteSymbol, f: &LatticeField, m: usize) -> Result<LatticeField> {
    if f.fiber() != a.d_in {
        return Err(Error::Shape(format!(
            "lattice field has fiber dimension {}, symbol expects {}",
            f.fiber(),
            a.d_in
        )));
    }
    if f.support().dim() != a.sites.dim() {
        return Err(Error::Dimension("lattice field and symbol live in different dimensions".into()));
    }
    let need = required_quadrature(a, f);
    if m < need {
        return Err(Error::Dimension(format!("quadrature with M = {m} is too coarse (need M >= {need})")));
    }
    let grid = TorusGrid::new(a.sites.dim(), m)?;
    let ys: Vec<Vec<i64>> = f.support().iter().collect();
    let transform: Vec<Vec<C64>> = (0..grid.len())
        .into_par_iter()
        .map(|q| {
            let mut v = vec![C64::new(0.0, 0.0); f.fiber()];
            for (i, y) in ys.iter().enumerate() {
                let e = grid.character(q, y, -1.0);
                for (o, s) in v.iter_mut().zip(f.value(i)) {
                    *o += e * s;
                }
            }
            v
        })
        .collect();
    let weight = grid.weight();
    let xs: Vec<Vec<i64>> = a.sites.iter().collect();
    let rows: Vec<Vec<C64>> = xs
        .par_iter()
        .enumerate()
        .map(|(site, x)| {
            let mut acc = vec![C64::new(0.0, 0.0); a.d_out];
            for (q, fq) in transform.iter().enumerate() {
                let e = grid.character(q, x, 1.0) * weight;
                let sym = a.value_on_grid(site, &grid, q);
                for (r, slot) in acc.iter_mut().enumerate() {
                    let mut s = C64::new(0.0, 0.0);
                    for (c, v) in fq.iter().enumerate() {
                        s += sym[(r, c)] * v;
                    }
                    *slot += e * s;
                }
            }
            acc
        })
        .collect();
    LatticeField::new(a.sites.clone(), a.d_out, rows.into_iter().flatten().collect())
}

/// `sum_y sum_k (h_k (x) g_k)(x, y) f(y) = sum_k h_k(x) sum_y g_k(y) . f(y)`.
pub fn discrete_kernel_operator(dec: &DiscreteDecomposition, f: &LatticeField) -> Result<LatticeField> {
    if f.fiber() != dec.d_in() {
        return Err(Error::Shape("lattice field does not match the decomposition's source fiber".into()));
    }
    let mut out = LatticeField::zeros(dec.h_support().clone(), dec.d_out());
    for (h, g) in dec.terms() {
        let mut pairing = C64::new(0.0, 0.0);
        for (i, y) in g.support().iter().enumerate() {
            if let Some(fv) = f.value_at(&y) {
                pairing += g.value(i).iter().zip(fv).map(|(a, b)| a * b).sum::<C64>();
            }
        }
        for (o, v) in out.data_mut().iter_mut().zip(h.data()) {
            *o += pairing * v;
        }
    }
    Ok(out)
}
