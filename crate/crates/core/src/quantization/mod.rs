// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantization of symbols into operators on fields, dense matrix assembly
//! (the brute-force reference for every other path), symbol extraction from
//! black-box operators and tensor-kernel operators.

mod discrete;

pub use discrete::{
    apply_discrete, apply_discrete_with_quadrature, discrete_kernel_operator, required_quadrature, DiscreteSymbol,
};
pub use crate::lattice::LatticeField;

use nalgebra::DVector;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::lattice::{fft_nd, forward_vft, inverse_vft, FourierCoefficients, FrequencyWindow, TorusGrid, VectorField, C64};
use crate::linalg::{self, CMatrix};
use crate::nuclearity::NuclearDecomposition;
use crate::symbol::{SymbolTable, TailSpec};

/// Dense matrix of an operator on the basis `e_xi (x) e_alpha`, frequency-major
/// and fiber-minor: basis index `w * d + alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssembledOperator {
    window: FrequencyWindow,
    d_out: usize,
    d_in: usize,
    matrix: CMatrix,
}

impl AssembledOperator {
    pub fn new(window: FrequencyWindow, d_out: usize, d_in: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != window.len() * d_out || matrix.ncols() != window.len() * d_in {
            return Err(Error::Shape(format!(
                "assembled operator must be {}x{}, got {}x{}",
                window.len() * d_out,
                window.len() * d_in,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { window, d_out, d_in, matrix })
    }

    pub fn window(&self) -> &FrequencyWindow {
        &self.window
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Matrix-vector product on Fourier coefficients.
    pub fn apply(&self, c: &FourierCoefficients) -> Result<FourierCoefficients> {
        if c.window() != &self.window || c.fiber() != self.d_in {
            return Err(Error::Shape("coefficients do not match the operator's column basis".into()));
        }
        let v = DVector::from_column_slice(c.data());
        let out = &self.matrix * v;
        FourierCoefficients::new(self.window.clone(), self.d_out, out.as_slice().to_vec())
    }
}

/// Assemble the dense matrix of `T_sigma` on the window.
///
/// Entry `((xi, alpha), (eta, beta))` is `[sigma^_x(xi - eta, eta)]_{alpha beta}`
/// where `sigma^_x` is the Fourier transform in `x`. Multipliers give
/// block-diagonal matrices with exact structural zeros.
pub fn assemble_matrix(sigma: &SymbolTable) -> Result<AssembledOperator> {
    let window = sigma.window().clone();
    let (d_out, d_in) = (sigma.d_out(), sigma.d_in());
    let wl = window.len();
    let Some(grid) = sigma.grid() else {
        let blocks: Vec<CMatrix> = (0..wl).map(|w| sigma.value(0, w).clone()).collect();
        return AssembledOperator::new(window, d_out, d_in, linalg::block_diagonal(&blocks));
    };
    let need = 2 * window.side() - 1;
    if grid.size() < need {
        return Err(Error::Dimension(format!(
            "grid with M = {} cannot resolve x-frequency differences up to {} (need M >= {need})",
            grid.size(),
            2 * window.radius()
        )));
    }
    let entries = d_out * d_in;
    let weight = grid.weight();
    let freqs: Vec<Vec<i64>> = window.iter().collect();
    let columns: Vec<CMatrix> = (0..wl)
        .into_par_iter()
        .map(|e| {
            let mut buf = Vec::with_capacity(grid.len() * entries);
            for j in 0..grid.len() {
                let m = sigma.value(j, e);
                for a in 0..d_out {
                    for b in 0..d_in {
                        buf.push(m[(a, b)]);
                    }
                }
            }
            fft_nd(&mut buf, grid, entries, FftDirection::Forward);
            let mut col = CMatrix::zeros(wl * d_out, d_in);
            for (x, xi) in freqs.iter().enumerate() {
                let k: Vec<i64> = xi.iter().zip(&freqs[e]).map(|(a, b)| a - b).collect();
                let bin = grid.bin_of(&k);
                for a in 0..d_out {
                    for b in 0..d_in {
                        col[(x * d_out + a, b)] = buf[bin * entries + a * d_in + b] * weight;
                    }
                }
            }
            col
        })
        .collect();
    let mut matrix = CMatrix::zeros(wl * d_out, wl * d_in);
    for (e, col) in columns.iter().enumerate() {
        matrix.view_mut((0, e * d_in), (wl * d_out, d_in)).copy_from(col);
    }
    AssembledOperator::new(window, d_out, d_in, matrix)
}

/// `(T_sigma f)(x_j) = sum_xi exp(2 pi i x_j . xi) sigma(x_j, xi) f^(xi)`.
///
/// `f` must be band-limited to the symbol's window. Multipliers return a field
/// on `f`'s grid; x-dependent symbols are evaluated on their own grid, which
/// must have `M >= 4N + 1` so that the result projects exactly onto the window.
pub fn apply_periodic(sigma: &SymbolTable, f: &VectorField) -> Result<VectorField> {
    if f.fiber() != sigma.d_in() {
        return Err(Error::Shape(format!(
            "field has fiber dimension {}, symbol expects {}",
            f.fiber(),
            sigma.d_in()
        )));
    }
    let window = sigma.window();
    let fhat = forward_vft(f, window)?;
    let d_out = sigma.d_out();
    let Some(grid) = sigma.grid() else {
        let mut out = Vec::with_capacity(window.len() * d_out);
        for w in 0..window.len() {
            let v = sigma.value(0, w) * DVector::from_column_slice(fhat.value(w));
            out.extend(v.iter().copied());
        }
        let ghat = FourierCoefficients::new(window.clone(), d_out, out)?;
        return inverse_vft(&ghat, f.grid());
    };
    let need = 2 * window.side() - 1;
    if grid.size() < need {
        return Err(Error::Dimension(format!(
            "x-dependent quantization needs M >= {need} on the symbol grid, got {}",
            grid.size()
        )));
    }
    let freqs: Vec<Vec<i64>> = window.iter().collect();
    let coeffs: Vec<DVector<C64>> = (0..window.len()).map(|w| DVector::from_column_slice(fhat.value(w))).collect();
    let samples: Vec<Vec<C64>> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let mut acc = DVector::<C64>::zeros(d_out);
            for (w, xi) in freqs.iter().enumerate() {
                acc += (sigma.value(j, w) * &coeffs[w]) * grid.character(j, xi, 1.0);
            }
            acc.iter().copied().collect()
        })
        .collect();
    VectorField::new(grid.clone(), d_out, samples.into_iter().flatten().collect())
}

/// Recover the symbol of a linear black box via
/// `sigma(x_j, eta) e_beta = exp(-2 pi i x_j . eta) A(e_eta (x) e_beta)(x_j)`.
///
/// The black box must map fields on `grid` with `d_in` components to fields on
/// the same grid. Linearity is spot-checked on a pair of band-limited inputs.
pub fn symbol_from_operator<F>(apply: F, window: &FrequencyWindow, grid: &TorusGrid, d_in: usize) -> Result<SymbolTable>
where
    F: Fn(&VectorField) -> Result<VectorField>,
{
    grid.require_resolves(window)?;
    let wl = window.len();
    let mut columns: Vec<Vec<VectorField>> = Vec::with_capacity(wl);
    let mut d_out = None;
    for eta in window.iter() {
        let mut per_beta = Vec::with_capacity(d_in);
        for beta in 0..d_in {
            let mut data = vec![C64::new(0.0, 0.0); grid.len() * d_in];
            for j in 0..grid.len() {
                data[j * d_in + beta] = grid.character(j, &eta, 1.0);
            }
            let out = apply(&VectorField::new(grid.clone(), d_in, data)?)?;
            if out.grid() != grid {
                return Err(Error::Contract("black box changed the grid".into()));
            }
            match d_out {
                None => d_out = Some(out.fiber()),
                Some(d) if d != out.fiber() => {
                    return Err(Error::Contract("black box output dimension is not constant".into()));
                }
                _ => {}
            }
            per_beta.push(out);
        }
        columns.push(per_beta);
    }
    let d_out = d_out.unwrap_or(0);
    check_linearity(&apply, window, grid, d_in)?;
    let mut values = Vec::with_capacity(grid.len() * wl);
    let freqs: Vec<Vec<i64>> = window.iter().collect();
    for j in 0..grid.len() {
        for (w, eta) in freqs.iter().enumerate() {
            let phase = grid.character(j, eta, -1.0);
            values.push(CMatrix::from_fn(d_out, d_in, |a, b| columns[w][b].sample(j)[a] * phase));
        }
    }
    SymbolTable::full(grid.clone(), window.clone(), d_out, d_in, values, TailSpec::Undeclared)
}

fn check_linearity<F>(apply: &F, window: &FrequencyWindow, grid: &TorusGrid, d: usize) -> Result<()>
where
    F: Fn(&VectorField) -> Result<VectorField>,
{
    let probe = |shift: f64| -> Result<VectorField> {
        let data = (0..window.len() * d)
            .map(|i| {
                let t = i as f64 + shift;
                C64::new((1.3 * t).sin(), (0.7 * t + 0.4).cos())
            })
            .collect();
        inverse_vft(&FourierCoefficients::new(window.clone(), d, data)?, grid)
    };
    let (f, g) = (probe(0.0)?, probe(17.5)?);
    let c = C64::new(0.7, -0.3);
    let sum = VectorField::new(
        grid.clone(),
        d,
        f.data().iter().zip(g.data()).map(|(a, b)| a + c * b).collect(),
    )?;
    let (af, ag, asum) = (apply(&f)?, apply(&g)?, apply(&sum)?);
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for ((x, y), z) in af.data().iter().zip(ag.data()).zip(asum.data()) {
        err = err.max((x + c * y - z).norm());
        scale = scale.max(z.norm()).max(x.norm());
    }
    if err > 1e-9 * scale.max(1.0) {
        return Err(Error::Contract(format!("black box is not linear (defect {err:e})")));
    }
    Ok(())
}

/// `(sum_k h_k (x) g_k) f (x) = sum_k <f, g_k> h_k(x)` with the bilinear
/// pairing `<u, v> = int sum_fiber u v dx` (no conjugation).
pub fn kernel_operator(dec: &NuclearDecomposition, f: &VectorField) -> Result<VectorField> {
    if f.grid() != dec.grid() || f.fiber() != dec.d_in() {
        return Err(Error::Shape("field does not match the decomposition's grid or source fiber".into()));
    }
    let weight = f.grid().weight();
    let mut out = VectorField::zeros(dec.grid().clone(), dec.d_out());
    for (h, g) in dec.terms() {
        let pairing: C64 = g.data().iter().zip(f.data()).map(|(a, b)| a * b).sum::<C64>() * weight;
        for (o, v) in out.data_mut().iter_mut().zip(h.data()) {
            *o += pairing * v;
        }
    }
    Ok(out)
}
