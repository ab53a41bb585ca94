// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Operator-valued symbols and the multiplier calculus.
//!
//! A [`SymbolTable`] stores `sigma(x_j, xi)` in `C^{d_out x d_in}` for every
//! grid point and window frequency, or `sigma(xi)` alone for Fourier
//! multipliers. Composition, adjoints, resolvents and heat symbols are only
//! defined for multipliers; x-dependent operators are handled through their
//! assembled matrices.

mod families;
mod hoermander;

pub use families::{make_family, make_family_by_name, FamilyFrame, FamilySpec};
pub use hoermander::{
    hoermander_bounds_report, hoermander_realize, BisymbolKind, BoundEntry, BoundsReport, ScalarBisymbol,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FrequencyWindow, TorusGrid, C64};
use crate::linalg::{self, CMatrix};

/// Declared behaviour of a symbol outside the truncation window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSpec {
    /// Tail blocks are invertible, identity-like and contribute index 0.
    InvertibleIdentityLike,
    /// Tail blocks vanish.
    Zero,
    /// The operator is the finite direct sum over the window; there is no tail.
    FiniteModel,
    Undeclared,
}

impl TailSpec {
    fn compose(self, other: TailSpec) -> TailSpec {
        use TailSpec::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Undeclared, _) | (_, Undeclared) => Undeclared,
            (FiniteModel, _) | (_, FiniteModel) => FiniteModel,
            (InvertibleIdentityLike, InvertibleIdentityLike) => InvertibleIdentityLike,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            TailSpec::InvertibleIdentityLike => 0,
            TailSpec::Zero => 1,
            TailSpec::FiniteModel => 2,
            TailSpec::Undeclared => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => TailSpec::InvertibleIdentityLike,
            1 => TailSpec::Zero,
            2 => TailSpec::FiniteModel,
            3 => TailSpec::Undeclared,
            _ => return Err(Error::Format(format!("unknown tail code {code}"))),
        })
    }

    pub(crate) fn to_code(self) -> u8 {
        self.code()
    }
}

/// Dense table of operator values `sigma(x_j, xi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolTable {
    window: FrequencyWindow,
    grid: Option<TorusGrid>,
    d_out: usize,
    d_in: usize,
    /// Indexed `j * W + w`; a single row of `W` blocks for multipliers.
    values: Vec<CMatrix>,
    tail: TailSpec,
}

impl SymbolTable {
    fn validate(
        window: &FrequencyWindow,
        grid: Option<&TorusGrid>,
        d_out: usize,
        d_in: usize,
        values: &[CMatrix],
        tail: TailSpec,
    ) -> Result<()> {
        let points = grid.map_or(1, |g| g.len());
        if let Some(g) = grid {
            if g.dim() != window.dim() {
                return Err(Error::Dimension("grid and window dimensions differ".into()));
            }
        }
        if values.len() != points * window.len() {
            return Err(Error::Shape(format!(
                "symbol table needs {} blocks, got {}",
                points * window.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|m| m.nrows() != d_out || m.ncols() != d_in) {
            return Err(Error::Shape(format!(
                "symbol block has shape {}x{}, expected {d_out}x{d_in}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        if tail == TailSpec::InvertibleIdentityLike && d_in != d_out {
            return Err(Error::Shape("an invertible identity-like tail needs square fibers".into()));
        }
        Ok(())
    }

    pub fn multiplier(
        window: FrequencyWindow,
        d_out: usize,
        d_in: usize,
        values: Vec<CMatrix>,
        tail: TailSpec,
    ) -> Result<Self> {
        Self::validate(&window, None, d_out, d_in, &values, tail)?;
        Ok(Self { window, grid: None, d_out, d_in, values, tail })
    }

    pub fn full(
        grid: TorusGrid,
        window: FrequencyWindow,
        d_out: usize,
        d_in: usize,
        values: Vec<CMatrix>,
        tail: TailSpec,
    ) -> Result<Self> {
        Self::validate(&window, Some(&grid), d_out, d_in, &values, tail)?;
        Ok(Self { window, grid: Some(grid), d_out, d_in, values, tail })
    }

    pub fn multiplier_from_fn(
        window: FrequencyWindow,
        d_out: usize,
        d_in: usize,
        tail: TailSpec,
        mut f: impl FnMut(&[i64]) -> CMatrix,
    ) -> Result<Self> {
        let values = window.iter().map(|xi| f(&xi)).collect();
        Self::multiplier(window, d_out, d_in, values, tail)
    }

    pub fn full_from_fn(
        grid: TorusGrid,
        window: FrequencyWindow,
        d_out: usize,
        d_in: usize,
        tail: TailSpec,
        mut f: impl FnMut(&[f64], &[i64]) -> CMatrix,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * window.len());
        for j in 0..grid.len() {
            let x = grid.point(j);
            for xi in window.iter() {
                values.push(f(&x, &xi));
            }
        }
        Self::full(grid, window, d_out, d_in, values, tail)
    }

    pub fn window(&self) -> &FrequencyWindow {
        &self.window
    }

    pub fn grid(&self) -> Option<&TorusGrid> {
        self.grid.as_ref()
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn tail(&self) -> TailSpec {
        self.tail
    }

    pub fn with_tail(mut self, tail: TailSpec) -> Result<Self> {
        Self::validate(&self.window, self.grid.as_ref(), self.d_out, self.d_in, &self.values, tail)?;
        self.tail = tail;
        Ok(self)
    }

    pub fn is_multiplier(&self) -> bool {
        self.grid.is_none()
    }

    pub fn is_square(&self) -> bool {
        self.d_in == self.d_out
    }

    /// Number of x-samples: grid size, or 1 for multipliers.
    pub fn points(&self) -> usize {
        self.grid.as_ref().map_or(1, |g| g.len())
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    /// `sigma(x_j, xi_w)`; for multipliers `j` is ignored.
    pub fn value(&self, j: usize, w: usize) -> &CMatrix {
        if self.grid.is_some() {
            &self.values[j * self.window.len() + w]
        } else {
            &self.values[w]
        }
    }

    pub fn multiplier_value(&self, w: usize) -> Result<&CMatrix> {
        self.require_multiplier("multiplier_value")?;
        Ok(&self.values[w])
    }

    pub(crate) fn require_multiplier(&self, op: &str) -> Result<()> {
        if self.grid.is_some() {
            return Err(Error::Unsupported(format!(
                "{op} is only defined for Fourier multipliers (x-independent symbols)"
            )));
        }
        Ok(())
    }

    pub(crate) fn require_square(&self, op: &str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "{op} needs square fibers, got {}x{}",
                self.d_out, self.d_in
            )));
        }
        Ok(())
    }

    /// Largest entrywise distance to another table on the same window,
    /// broadcasting multipliers along x when the other table is x-dependent.
    pub fn max_abs_difference(&self, other: &SymbolTable) -> Result<f64> {
        if self.window != other.window || self.d_in != other.d_in || self.d_out != other.d_out {
            return Err(Error::Shape("symbol tables live on different windows or fibers".into()));
        }
        let points = match (&self.grid, &other.grid) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Shape("symbol tables live on different grids".into()));
            }
            (Some(a), _) | (_, Some(a)) => a.len(),
            (None, None) => 1,
        };
        let mut worst: f64 = 0.0;
        for j in 0..points {
            for w in 0..self.window.len() {
                let diff = self.value(j, w) - other.value(j, w);
                worst = diff.iter().map(|c| c.norm()).fold(worst, f64::max);
            }
        }
        Ok(worst)
    }

    /// Sorted-by-frequency per-block map used by the multiplier calculus.
    fn map_blocks(&self, d_out: usize, d_in: usize, tail: TailSpec, f: impl Fn(&CMatrix) -> CMatrix + Sync) -> Result<Self> {
        let values: Vec<CMatrix> = self.values.par_iter().map(&f).collect();
        Ok(Self {
            window: self.window.clone(),
            grid: self.grid.clone(),
            d_out,
            d_in,
            values,
            tail,
        })
    }
}

/// Symbol of `T_sigma T_tau`: `a(eta) = sigma(eta) tau(eta)`.
pub fn compose_multipliers(sigma: &SymbolTable, tau: &SymbolTable) -> Result<SymbolTable> {
    sigma.require_multiplier("compose_multipliers")?;
    tau.require_multiplier("compose_multipliers")?;
    if sigma.window != tau.window {
        return Err(Error::Shape("composition needs both symbols on the same window".into()));
    }
    if sigma.d_in != tau.d_out {
        return Err(Error::Shape(format!(
            "inner dimensions differ: sigma takes {} inputs, tau produces {}",
            sigma.d_in, tau.d_out
        )));
    }
    let values = sigma
        .values
        .par_iter()
        .zip(tau.values.par_iter())
        .map(|(a, b)| a * b)
        .collect();
    SymbolTable::multiplier(
        sigma.window.clone(),
        sigma.d_out,
        tau.d_in,
        values,
        sigma.tail.compose(tau.tail),
    )
}

/// Symbol of the formal adjoint: `sigma*(eta) = sigma(eta)^H`.
pub fn adjoint_multiplier(sigma: &SymbolTable) -> Result<SymbolTable> {
    sigma.require_multiplier("adjoint_multiplier")?;
    sigma.map_blocks(sigma.d_in, sigma.d_out, sigma.tail, |m| m.adjoint())
}

/// Relative singularity threshold for resolvent blocks.
pub const DEFAULT_TOL_INV: f64 = 1e-10;

/// Symbol of the resolvent `(lambda - A)^{-1}`: `(lambda - sigma(eta))^{-1}`.
///
/// A block is rejected when its smallest singular value falls below
/// `tol_inv * |lambda - sigma(eta)|_op`.
pub fn resolvent_symbol(sigma: &SymbolTable, lambda: C64, tol_inv: f64) -> Result<SymbolTable> {
    sigma.require_multiplier("resolvent_symbol")?;
    sigma.require_square("resolvent_symbol")?;
    let d = sigma.d_in;
    let shifted: Vec<CMatrix> = sigma
        .values
        .iter()
        .map(|m| CMatrix::identity(d, d) * lambda - m)
        .collect();
    let mut values = Vec::with_capacity(shifted.len());
    for (w, block) in shifted.iter().enumerate() {
        let s = linalg::singular_values(block);
        let largest = s.first().copied().unwrap_or(0.0);
        let smallest = s.last().copied().unwrap_or(0.0);
        let threshold = tol_inv * largest;
        if d > 0 && (smallest <= threshold || smallest == 0.0) {
            return Err(Error::Resolvent {
                frequency: sigma.window.point(w),
                smallest_singular_value: smallest,
                threshold,
            });
        }
        let inv = block
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Resolvent {
                frequency: sigma.window.point(w),
                smallest_singular_value: smallest,
                threshold,
            })?;
        values.push(inv);
    }
    let tail = match sigma.tail {
        TailSpec::InvertibleIdentityLike if lambda != C64::new(1.0, 0.0) => TailSpec::InvertibleIdentityLike,
        TailSpec::Zero if lambda != C64::new(0.0, 0.0) => TailSpec::InvertibleIdentityLike,
        TailSpec::FiniteModel => TailSpec::FiniteModel,
        _ => TailSpec::Undeclared,
    };
    SymbolTable::multiplier(sigma.window.clone(), d, d, values, tail)
}

/// Heat symbols `a(t) = exp(-t sigma* sigma)` and `b(t) = exp(-t sigma sigma*)`
/// of the Laplacians `A*A` and `AA*`.
pub fn heat_symbols(sigma: &SymbolTable, t: f64) -> Result<(SymbolTable, SymbolTable)> {
    sigma.require_multiplier("heat_symbols")?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat time must be positive and finite, got {t}")));
    }
    let tail = match sigma.tail {
        TailSpec::Undeclared => TailSpec::Undeclared,
        TailSpec::FiniteModel => TailSpec::FiniteModel,
        _ => TailSpec::InvertibleIdentityLike,
    };
    let a = sigma.map_blocks(sigma.d_in, sigma.d_in, tail, |m| {
        linalg::exp_neg_hermitian(&(m.adjoint() * m), t)
    })?;
    let b = sigma.map_blocks(sigma.d_out, sigma.d_out, tail, |m| {
        linalg::exp_neg_hermitian(&(m * m.adjoint()), t)
    })?;
    Ok((a, b))
}
