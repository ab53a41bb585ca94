// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Trace formulas, each checked against the assembled matrix.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::C64;
use crate::linalg::{self, CMatrix};
use crate::quantization::assemble_matrix;
use crate::symbol::SymbolTable;

/// Smallest eigenvalue (and Hermitian defect) tolerated by [`positive_trace_formula`].
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTrace {
    pub frequency: Vec<i64>,
    pub trace: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub nuclear_trace: C64,
    pub spectral_trace: C64,
    /// Diagonal sum of the assembled matrix.
    pub matrix_trace: C64,
    pub per_frequency: Vec<FrequencyTrace>,
    /// `|nuclear_trace - spectral_trace|`.
    pub discrepancy: f64,
    /// The formula re-evaluated in a random orthonormal fiber basis, when computed.
    pub basis_witness: Option<C64>,
}

impl TraceReport {
    fn new(nuclear: C64, matrix: &CMatrix, per_frequency: Vec<FrequencyTrace>) -> Result<Self> {
        let spectral: C64 = linalg::eigenvalues(matrix)?.into_iter().sum();
        Ok(Self {
            nuclear_trace: nuclear,
            spectral_trace: spectral,
            matrix_trace: linalg::trace(matrix),
            per_frequency,
            discrepancy: (nuclear - spectral).norm(),
            basis_witness: None,
        })
    }

    /// `|nuclear_trace - matrix_trace|`.
    pub fn matrix_discrepancy(&self) -> f64 {
        (self.nuclear_trace - self.matrix_trace).norm()
    }

    /// Flat `key = value` text, one entry per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = |z: C64| format!("{:.17e} {:+.17e}i", z.re, z.im);
        let _ = writeln!(s, "nuclear_trace = {}", c(self.nuclear_trace));
        let _ = writeln!(s, "spectral_trace = {}", c(self.spectral_trace));
        let _ = writeln!(s, "matrix_trace = {}", c(self.matrix_trace));
        let _ = writeln!(s, "discrepancy = {:.17e}", self.discrepancy);
        if let Some(w) = self.basis_witness {
            let _ = writeln!(s, "basis_witness = {}", c(w));
        }
        for f in &self.per_frequency {
            let _ = writeln!(s, "trace{:?} = {}", f.frequency, c(f.trace));
        }
        s
    }
}

fn per_frequency_traces(sigma: &SymbolTable) -> (C64, Vec<FrequencyTrace>) {
    let window = sigma.window();
    let weight = 1.0 / sigma.points() as f64;
    let mut total = C64::new(0.0, 0.0);
    let per = window
        .iter()
        .enumerate()
        .map(|(w, xi)| {
            let t: C64 = (0..sigma.points()).map(|j| linalg::trace(sigma.value(j, w))).sum::<C64>() * weight;
            total += t;
            FrequencyTrace { frequency: xi, trace: t }
        })
        .collect();
    (total, per)
}

/// `sum_xi int tr sigma(x, xi) dx` against the eigenvalue sum of the assembled matrix.
pub fn nuclear_trace_pdo(sigma: &SymbolTable) -> Result<TraceReport> {
    sigma.require_square("nuclear trace")?;
    let (total, per) = per_frequency_traces(sigma);
    let op = assemble_matrix(sigma)?;
    TraceReport::new(total, op.matrix(), per)
}

/// `sum_xi tr sigma(xi)` for multipliers; the spectral side is the union of block spectra.
pub fn nuclear_trace_multiplier(sigma: &SymbolTable) -> Result<TraceReport> {
    sigma.require_multiplier("nuclear_trace_multiplier")?;
    sigma.require_square("nuclear trace")?;
    let (total, per) = per_frequency_traces(sigma);
    let mut spectral = C64::new(0.0, 0.0);
    for w in 0..sigma.window().len() {
        spectral += linalg::eigenvalues(sigma.value(0, w))?.into_iter().sum::<C64>();
    }
    let matrix_trace = per.iter().map(|f| f.trace).sum();
    Ok(TraceReport {
        nuclear_trace: total,
        spectral_trace: spectral,
        matrix_trace,
        per_frequency: per,
        discrepancy: (total - spectral).norm(),
        basis_witness: None,
    })
}

/// Trace formula for symbols with positive semidefinite values, together
/// with its value in a seeded random orthonormal fiber basis.
pub fn positive_trace_formula(sigma: &SymbolTable, seed: u64) -> Result<TraceReport> {
    sigma.require_square("positive trace formula")?;
    let grid = sigma.grid().cloned();
    for j in 0..sigma.points() {
        for (w, xi) in sigma.window().iter().enumerate() {
            let m = sigma.value(j, w);
            let scale = linalg::frobenius_norm(m).max(1.0);
            let defect = linalg::frobenius_norm(&(m - m.adjoint()));
            let (ev, _) = linalg::hermitian_eigen(m);
            let min = ev.first().copied().unwrap_or(0.0);
            if defect > PSD_TOLERANCE * scale || min < -PSD_TOLERANCE {
                let x = grid.as_ref().map(|g| g.point(j)).unwrap_or_default();
                return Err(Error::Precondition(format!(
                    "symbol value at x = {x:?}, xi = {xi:?} is not Hermitian positive semidefinite \
                     (min eigenvalue {min:e}, Hermitian defect {defect:e})"
                )));
            }
        }
    }
    let mut report = nuclear_trace_pdo(sigma)?;
    let u = linalg::random_unitary(&mut ChaCha8Rng::seed_from_u64(seed), sigma.d_in());
    let weight = 1.0 / sigma.points() as f64;
    let mut witness = C64::new(0.0, 0.0);
    for w in 0..sigma.window().len() {
        for j in 0..sigma.points() {
            let rotated = u.adjoint() * sigma.value(j, w) * &u;
            witness += (0..rotated.nrows()).map(|a| rotated[(a, a)]).sum::<C64>() * weight;
        }
    }
    report.basis_witness = Some(witness);
    Ok(report)
}

/// Diagonal sum against eigenvalue sum of a square matrix.
pub fn grothendieck_check(m: &CMatrix) -> Result<TraceReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!("grothendieck_check needs a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    TraceReport::new(linalg::trace(m), m, Vec::new())
}
