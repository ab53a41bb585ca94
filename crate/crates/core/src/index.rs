// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Fredholm indices at finite truncation: numerical rank, heat-trace
//! (McKean-Singer) indices, per-frequency index sums for multipliers,
//! heat-semigroup ellipticity rates and the elliptic bisymbol experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{euclidean_norm, C64};
use crate::linalg::{self, CMatrix};
use crate::nuclearity::FrequencyTrace;
use crate::quantization::assemble_matrix;
use crate::symbol::{hoermander_bounds_report, hoermander_realize, BoundsReport, ScalarBisymbol, SymbolTable, TailSpec};

/// Relative rank tolerance used when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// McKean-Singer values within this distance of the integer index agree.
pub const HEAT_INDEX_TOL: f64 = 1e-8;

/// `t`-grid for heat-trace indices when none is given.
pub const DEFAULT_MS_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

/// Log-spaced grid of `points` values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Default ellipticity grid: 16 log-spaced points in `[1e-3, 1e2]`.
pub fn default_ellipticity_grid() -> Vec<f64> {
    log_grid(1e-3, 1e2, 16)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixIndex {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub ker_dim: usize,
    pub coker_dim: usize,
    pub index: i64,
    pub tol: f64,
    /// Set when a singular value sits within `10 eps sigma_max` of the rank threshold.
    pub warning: Option<String>,
}

/// `dim ker T - dim ker T*` with rank `#{sigma_i >= tol sigma_max}`.
pub fn matrix_index(t: &CMatrix, tol: f64) -> Result<MatrixIndex> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Domain(format!("rank tolerance must be positive, got {tol}")));
    }
    let sv = linalg::singular_values(t);
    let smax = sv.first().copied().unwrap_or(0.0);
    let threshold = tol * smax;
    let rank = if smax == 0.0 { 0 } else { sv.iter().filter(|&&s| s >= threshold).count() };
    let band = 10.0 * f64::EPSILON * smax;
    let warning = sv
        .iter()
        .filter(|&&s| s > 0.0 && smax > 0.0)
        .map(|&s| (s - threshold).abs())
        .filter(|&gap| gap <= band)
        .fold(None, |acc: Option<f64>, gap| Some(acc.map_or(gap, |a| a.min(gap))))
        .map(|gap| format!("singular value within {gap:e} of the rank threshold {threshold:e}; rank is ambiguous"));
    let (rows, cols) = t.shape();
    Ok(MatrixIndex {
        rows,
        cols,
        rank,
        ker_dim: cols - rank,
        coker_dim: rows - rank,
        index: cols as i64 - rows as i64,
        tol,
        warning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McKeanSinger {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `max - min` of `values`.
    pub spread: f64,
    /// Numerical-rank index of the same matrix.
    pub index: i64,
    /// `max_t |value(t) - index|`.
    pub deviation: f64,
}

impl McKeanSinger {
    pub fn agrees(&self) -> bool {
        self.deviation <= HEAT_INDEX_TOL
    }
}

fn check_t_grid(t_grid: &[f64], min_points: usize, min_decades: f64) -> Result<()> {
    if let Some(bad) = t_grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(Error::Domain(format!("heat times must be positive and finite, got {bad}")));
    }
    if t_grid.len() < min_points {
        return Err(Error::Domain(format!("t-grid needs at least {min_points} points, got {}", t_grid.len())));
    }
    let lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_grid.iter().copied().fold(0.0, f64::max);
    if (hi / lo).log10() < min_decades - 1e-12 {
        return Err(Error::Domain(format!("t-grid must span at least {min_decades} decades, spans [{lo}, {hi}]")));
    }
    Ok(())
}

/// `Tr exp(-t T*T) - Tr exp(-t T T*)` at every `t`.
pub fn mckean_singer(t: &CMatrix, t_grid: &[f64]) -> Result<McKeanSinger> {
    check_t_grid(t_grid, 3, 2.0)?;
    let (ev_a, _) = linalg::hermitian_eigen(&(t.adjoint() * t));
    let (ev_b, _) = linalg::hermitian_eigen(&(t * t.adjoint()));
    let values: Vec<f64> = t_grid
        .iter()
        .map(|&s| {
            let a: f64 = ev_a.iter().map(|l| (-s * l).exp()).sum();
            let b: f64 = ev_b.iter().map(|l| (-s * l).exp()).sum();
            a - b
        })
        .collect();
    let index = matrix_index(t, DEFAULT_RANK_TOL)?.index;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let deviation = values.iter().map(|v| (v - index as f64).abs()).fold(0.0, f64::max);
    Ok(McKeanSinger { t_grid: t_grid.to_vec(), values, spread: hi - lo, index, deviation })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyIndex {
    pub frequency: Vec<i64>,
    pub ker_dim: usize,
    pub coker_dim: usize,
    pub index: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    /// Modelling note for the truncation in use.
    pub header: String,
    pub tail: TailSpec,
    pub tol: f64,
    /// Summed over the window.
    pub ker_dim: usize,
    pub coker_dim: usize,
    /// `sum_eta Ind(sigma(eta))`.
    pub index: i64,
    pub per_frequency: Vec<FrequencyIndex>,
    pub assembled: MatrixIndex,
    pub ms_t_grid: Vec<f64>,
    pub ms_values: Vec<f64>,
    pub ms_spread: f64,
    pub ms_deviation: f64,
    /// Per-frequency sum, assembled index and heat-trace index all agree.
    pub consistent: bool,
    pub warnings: Vec<String>,
}

fn header_for(tail: TailSpec, square: bool) -> String {
    let base = match tail {
        TailSpec::FiniteModel => "finite model: the operator is the direct sum of its blocks over the window",
        _ => "invertible identity-like tail: frequencies outside the window contribute index 0",
    };
    if square {
        base.to_string()
    } else {
        format!("{base}; rectangular fibers stand in for the non-square Fredholm regime")
    }
}

fn per_frequency(sigma: &SymbolTable, tol: f64, warnings: &mut Vec<String>) -> Result<Vec<FrequencyIndex>> {
    sigma
        .window()
        .iter()
        .enumerate()
        .map(|(w, xi)| {
            let r = matrix_index(sigma.value(0, w), tol)?;
            if let Some(msg) = r.warning {
                warnings.push(format!("frequency {xi:?}: {msg}"));
            }
            Ok(FrequencyIndex { frequency: xi, ker_dim: r.ker_dim, coker_dim: r.coker_dim, index: r.index })
        })
        .collect()
}

fn tail_admits_index(sigma: &SymbolTable) -> Result<()> {
    match sigma.tail() {
        TailSpec::InvertibleIdentityLike | TailSpec::FiniteModel => Ok(()),
        TailSpec::Undeclared => Err(Error::IndexRefused(
            "tail behaviour is undeclared, so the index is not defined under truncation".into(),
        )),
        TailSpec::Zero => Err(Error::IndexRefused(
            "a vanishing tail has an infinite-dimensional kernel, so the operator is not Fredholm".into(),
        )),
    }
}

/// `sum_eta Ind(sigma(eta))`, cross-checked against the assembled matrix by
/// numerical rank and by McKean-Singer.
pub fn multiplier_index(sigma: &SymbolTable, tol: f64, t_grid: &[f64]) -> Result<IndexReport> {
    sigma.require_multiplier("multiplier_index")?;
    tail_admits_index(sigma)?;
    let mut warnings = Vec::new();
    let rows = per_frequency(sigma, tol, &mut warnings)?;
    let op = assemble_matrix(sigma)?;
    let assembled = matrix_index(op.matrix(), tol)?;
    if let Some(msg) = &assembled.warning {
        warnings.push(format!("assembled matrix: {msg}"));
    }
    let ms = mckean_singer(op.matrix(), t_grid)?;
    let index: i64 = rows.iter().map(|r| r.index).sum();
    let consistent = index == assembled.index && ms.values.iter().all(|v| (v - index as f64).abs() <= HEAT_INDEX_TOL);
    Ok(IndexReport {
        header: header_for(sigma.tail(), sigma.is_square()),
        tail: sigma.tail(),
        tol,
        ker_dim: rows.iter().map(|r| r.ker_dim).sum(),
        coker_dim: rows.iter().map(|r| r.coker_dim).sum(),
        index,
        per_frequency: rows,
        assembled,
        ms_t_grid: ms.t_grid,
        ms_values: ms.values,
        ms_spread: ms.spread,
        ms_deviation: ms.deviation,
        consistent,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub tol: f64,
    pub rows: Vec<FrequencyIndex>,
    pub warnings: Vec<String>,
}

/// Kernel and cokernel dimensions of every block.
pub fn fredholm_necessity_report(sigma: &SymbolTable, tol: f64) -> Result<NecessityReport> {
    sigma.require_multiplier("fredholm_necessity_report")?;
    let mut warnings = Vec::new();
    let rows = per_frequency(sigma, tol, &mut warnings)?;
    Ok(NecessityReport { tol, rows, warnings })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatSide {
    /// `sum_xi tr exp(-t H(xi))`.
    pub frequency_sum: f64,
    /// Trace of the exponential of the assembled operator.
    pub assembled_trace: f64,
    pub per_frequency: Vec<FrequencyTrace>,
    pub relative_discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceReport {
    pub t: f64,
    /// `H = sigma* sigma`.
    pub a: HeatSide,
    /// `H = sigma sigma*`.
    pub b: HeatSide,
}

fn heat_side(blocks: Vec<CMatrix>, big: &CMatrix, freqs: Vec<Vec<i64>>, t: f64) -> HeatSide {
    let per: Vec<FrequencyTrace> = blocks
        .iter()
        .zip(freqs)
        .map(|(h, xi)| FrequencyTrace { frequency: xi, trace: C64::new(linalg::trace_exp_neg_hermitian(h, t), 0.0) })
        .collect();
    let frequency_sum: f64 = per.iter().map(|f| f.trace.re).sum();
    let assembled_trace = linalg::trace(&linalg::exp_neg_hermitian(big, t)).re;
    let scale = frequency_sum.abs().max(assembled_trace.abs()).max(f64::MIN_POSITIVE);
    HeatSide {
        frequency_sum,
        assembled_trace,
        per_frequency: per,
        relative_discrepancy: (frequency_sum - assembled_trace).abs() / scale,
    }
}

/// Heat traces of `A*A` and `A A*` frequency by frequency and on the assembled operator.
pub fn heat_trace_sum(sigma: &SymbolTable, t: f64) -> Result<HeatTraceReport> {
    sigma.require_multiplier("heat_trace_sum")?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat time must be positive, got {t}")));
    }
    let op = assemble_matrix(sigma)?;
    let m = op.matrix();
    let freqs: Vec<Vec<i64>> = sigma.window().iter().collect();
    let wl = freqs.len();
    let a_blocks = (0..wl).map(|w| sigma.value(0, w).adjoint() * sigma.value(0, w)).collect();
    let b_blocks = (0..wl).map(|w| sigma.value(0, w) * sigma.value(0, w).adjoint()).collect();
    Ok(HeatTraceReport {
        t,
        a: heat_side(a_blocks, &(m.adjoint() * m), freqs.clone(), t),
        b: heat_side(b_blocks, &(m * m.adjoint()), freqs, t),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityRow {
    pub frequency: Vec<i64>,
    pub alpha: usize,
    /// `min_t -log |exp(-t sigma* sigma) e_alpha| / t` over the grid.
    pub rate: f64,
    /// The same for `sigma sigma*`.
    pub rate_adjoint: f64,
    /// `(1 + |alpha| + |xi|)^m`.
    pub scale: f64,
    /// `(1 + |xi|^2 + |alpha|^2)^{m/2}`.
    pub bracket_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub m: f64,
    pub t_grid: Vec<f64>,
    pub rows: Vec<EllipticityRow>,
    /// `min rate / scale`.
    pub constant: f64,
    /// `min rate / bracket_scale`.
    pub bracket_constant: f64,
    pub constant_adjoint: f64,
    pub elliptic: bool,
    pub elliptic_bracket: bool,
}

/// Verdicts require the grid constant to exceed this margin.
pub const ELLIPTICITY_MARGIN: f64 = 1e-8;

/// `min_t -log |exp(-t H) e_alpha| / t` evaluated stably in log space.
fn decay_rate(values: &[f64], vectors: &CMatrix, alpha: usize, t_grid: &[f64]) -> f64 {
    let weights: Vec<f64> = (0..values.len()).map(|i| vectors[(alpha, i)].norm_sqr()).collect();
    t_grid
        .iter()
        .map(|&t| {
            let terms: Vec<f64> = values
                .iter()
                .zip(&weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(l, w)| -2.0 * t * l + w.ln())
                .collect();
            let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
            -0.5 * lse / t
        })
        .fold(f64::INFINITY, f64::min)
}

/// Heat-semigroup decay rates along the standard fiber basis.
///
/// `labels` assigns a lattice point to each fiber index and sets `|alpha|`;
/// without labels `|alpha|` is the index itself.
pub fn mb_ellipticity_report(sigma: &SymbolTable, m: f64, t_grid: &[f64], labels: Option<&[Vec<i64>]>) -> Result<EllipticityReport> {
    sigma.require_multiplier("mb_ellipticity_report")?;
    sigma.require_square("mb_ellipticity_report")?;
    check_t_grid(t_grid, 1, 0.0)?;
    let d = sigma.d_in();
    if let Some(l) = labels {
        if l.len() != d {
            return Err(Error::Shape(format!("{} fiber labels for fiber dimension {d}", l.len())));
        }
    }
    let alpha_norm = |a: usize| labels.map_or(a as f64, |l| euclidean_norm(&l[a]));
    let mut rows = Vec::new();
    for (w, xi) in sigma.window().iter().enumerate() {
        let s = sigma.value(0, w);
        let (va, ua) = linalg::hermitian_eigen(&(s.adjoint() * s));
        let (vb, ub) = linalg::hermitian_eigen(&(s * s.adjoint()));
        let xn = euclidean_norm(&xi);
        for alpha in 0..d {
            let an = alpha_norm(alpha);
            rows.push(EllipticityRow {
                frequency: xi.clone(),
                alpha,
                rate: decay_rate(&va, &ua, alpha, t_grid),
                rate_adjoint: decay_rate(&vb, &ub, alpha, t_grid),
                scale: (1.0 + an + xn).powf(m),
                bracket_scale: (1.0 + xn * xn + an * an).powf(m / 2.0),
            });
        }
    }
    let min_of = |f: &dyn Fn(&EllipticityRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    let constant = min_of(&|r| r.rate / r.scale);
    let bracket_constant = min_of(&|r| r.rate / r.bracket_scale);
    let constant_adjoint = min_of(&|r| r.rate_adjoint / r.scale);
    Ok(EllipticityReport {
        m,
        t_grid: t_grid.to_vec(),
        constant,
        bracket_constant,
        constant_adjoint,
        elliptic: constant > ELLIPTICITY_MARGIN,
        elliptic_bracket: bracket_constant > ELLIPTICITY_MARGIN,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoermanderExperiment {
    pub bounds: BoundsReport,
    pub index: IndexReport,
    /// Per-frequency sum, assembled index and heat-trace index agree.
    pub agree: bool,
}

/// Realize `b` as a multiplier on `L^2(T^m)`-valued fields and compute its
/// index three ways. Refuses non-elliptic `b`.
pub fn periodic_index_experiment(b: &ScalarBisymbol, tol: f64, t_grid: &[f64]) -> Result<HoermanderExperiment> {
    let bounds = hoermander_bounds_report(b, 1, 1, 0.0);
    if !bounds.is_elliptic() {
        let attached = serde_json::to_string(&bounds)?;
        return Err(Error::IndexRefused(format!("bisymbol is not elliptic on the window; bounds report: {attached}")));
    }
    let a = hoermander_realize(b)?;
    let index = multiplier_index(&a, tol, t_grid)?;
    let agree = index.consistent;
    Ok(HoermanderExperiment { bounds, index, agree })
}
