// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Nuclearity at finite truncation: tensor-kernel decompositions and their
//! symbols (periodic and discrete), summability and decay diagnostics, trace
//! formulas checked against assembled matrices, and Schatten norms.
//!
//! Infinite sums are reported as shell-by-shell partial sums with a trend
//! verdict rather than a yes/no answer.

mod decomposition;
mod trace;

pub use decomposition::{
    decay_bound, decomposition_to_symbol, discrete_decomposition_to_symbol, pointwise_schatten_slack,
    random_decomposition, random_discrete_decomposition, DecayBound, DiscreteDecomposition, NuclearDecomposition,
};
pub use trace::{
    grothendieck_check, nuclear_trace_multiplier, nuclear_trace_pdo, positive_trace_formula, FrequencyTrace,
    TraceReport, PSD_TOLERANCE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{fiber_norm, TorusGrid};
use crate::linalg::{self, CMatrix};
use crate::quantization::DiscreteSymbol;
use crate::symbol::SymbolTable;

/// One sup-norm shell `|xi|_inf = radius` of a truncated infinite sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub radius: usize,
    pub count: usize,
    pub partial: f64,
    pub cumulative: f64,
    /// `S_r / S_{r-1}`; `None` on the first shell or when `S_{r-1} = 0 < S_r`.
    pub ratio: Option<f64>,
}

/// Shell partial sums of a truncated series and the resulting trend verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellReport {
    pub shells: Vec<ShellRow>,
    /// True iff the shell ratio is below 1 on each of the last three shells.
    pub summable_trend: bool,
    pub verdict: String,
}

fn shell_report(partials: Vec<(usize, f64)>) -> ShellReport {
    let mut shells = Vec::with_capacity(partials.len());
    let mut cumulative = 0.0;
    for (r, (count, partial)) in partials.into_iter().enumerate() {
        cumulative += partial;
        let ratio = if r == 0 {
            None
        } else {
            let prev: f64 = shells.last().map(|s: &ShellRow| s.partial).unwrap_or(0.0);
            if prev > 0.0 {
                Some(partial / prev)
            } else if partial == 0.0 {
                Some(0.0)
            } else {
                None
            }
        };
        shells.push(ShellRow { radius: r, count, partial, cumulative, ratio });
    }
    let (summable_trend, verdict) = if shells.len() < 4 {
        (false, "inconclusive: fewer than three shell ratios".to_string())
    } else {
        let ok = shells[shells.len() - 3..].iter().all(|s| s.ratio.is_some_and(|q| q < 1.0));
        if ok {
            (true, "summable-trend".to_string())
        } else {
            (false, "non-decaying".to_string())
        }
    };
    ShellReport { shells, summable_trend, verdict }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("s must lie in (0, 1], got {s}")));
    }
    Ok(())
}

fn quadrature_lp(values: impl Iterator<Item = f64>, weight: f64, p: f64) -> f64 {
    (values.map(|v| v.powf(p)).sum::<f64>() * weight).powf(1.0 / p)
}

/// Shell partial sums of `sum_xi sum_alpha |x -> |sigma(x, xi) e_alpha|_H|_{L^{p2}}^s`.
pub fn summability_check(sigma: &SymbolTable, s: f64, p2: f64) -> Result<ShellReport> {
    check_s(s)?;
    if !p2.is_finite() || p2 < 1.0 {
        return Err(Error::Domain(format!("p2 must lie in [1, inf), got {p2}")));
    }
    let window = sigma.window();
    let weight = 1.0 / sigma.points() as f64;
    let mut partials = vec![(0usize, 0.0f64); window.radius() + 1];
    for w in 0..window.len() {
        let shell = window.shell(w);
        let mut term = 0.0;
        for alpha in 0..sigma.d_in() {
            let norms = (0..sigma.points()).map(|j| {
                let col: Vec<_> = sigma.value(j, w).column(alpha).iter().copied().collect();
                fiber_norm(&col)
            });
            term += quadrature_lp(norms, weight, p2).powf(s);
        }
        partials[shell].0 += 1;
        partials[shell].1 += term;
    }
    Ok(shell_report(partials))
}

/// Result of [`decay_norm`] / [`discrete_decay_norm`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub p_prime: f64,
    pub norm: f64,
    /// Shell sums of `|sigma|_op^{p'}` (before the final `1/p'` root).
    pub shells: ShellReport,
}

fn check_p_prime(p_prime: f64) -> Result<()> {
    if !p_prime.is_finite() || p_prime < 2.0 {
        return Err(Error::Domain(format!(
            "decay exponent p' must lie in [2, inf) (p in (1, 2]), got {p_prime}"
        )));
    }
    Ok(())
}

/// `( sum_xi int |sigma(x, xi)|_op^{p'} dx )^{1/p'}` over the window.
pub fn decay_norm(sigma: &SymbolTable, p_prime: f64) -> Result<DecayReport> {
    check_p_prime(p_prime)?;
    let window = sigma.window();
    let weight = 1.0 / sigma.points() as f64;
    let mut partials = vec![(0usize, 0.0f64); window.radius() + 1];
    for w in 0..window.len() {
        let shell = window.shell(w);
        let sum: f64 = (0..sigma.points())
            .map(|j| linalg::op_norm(sigma.value(j, w)).powf(p_prime))
            .sum();
        partials[shell].0 += 1;
        partials[shell].1 += sum * weight;
    }
    let total: f64 = partials.iter().map(|p| p.1).sum();
    Ok(DecayReport { p_prime, norm: total.powf(1.0 / p_prime), shells: shell_report(partials) })
}

/// `( int sum_x |a(x, xi)|_op^{p'} dxi )^{1/p'}` with an `M`-point-per-axis
/// quadrature in `xi`; shells are taken in the lattice variable `x`.
pub fn discrete_decay_norm(a: &DiscreteSymbol, p_prime: f64, quadrature: usize) -> Result<DecayReport> {
    check_p_prime(p_prime)?;
    let grid = TorusGrid::new(a.sites().dim(), quadrature)?;
    let weight = grid.weight();
    let mut partials = vec![(0usize, 0.0f64); a.sites().radius() + 1];
    for site in 0..a.sites().len() {
        let shell = a.sites().shell(site);
        let sum: f64 = (0..grid.len())
            .map(|q| linalg::op_norm(&a.value_on_grid(site, &grid, q)).powf(p_prime))
            .sum();
        partials[shell].0 += 1;
        partials[shell].1 += sum * weight;
    }
    let total: f64 = partials.iter().map(|p| p.1).sum();
    Ok(DecayReport { p_prime, norm: total.powf(1.0 / p_prime), shells: shell_report(partials) })
}

/// Schatten (quasi-)norm `( sum sigma_i^s )^{1/s}`.
pub fn schatten_norm(m: &CMatrix, s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("Schatten exponent must be positive and finite, got {s}")));
    }
    let sum: f64 = linalg::singular_values(m).iter().map(|v| v.powf(s)).sum();
    Ok(sum.powf(1.0 / s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{japanese_bracket, FrequencyWindow, C64};
    use crate::symbol::{make_family, FamilyFrame, FamilySpec, TailSpec};
    use nalgebra::DVector;

    #[test]
    fn bracket_decay_shells() {
        // sigma(xi) = <xi>^-2, n = d = s = 1: S_r = 2 / (1 + r^2) for r >= 1
        let s = make_family(&FamilySpec::Bessel { order: -2.0 }, &FamilyFrame::square(1, 6, 1)).unwrap();
        let r = summability_check(&s, 1.0, 2.0).unwrap();
        assert!((r.shells[0].partial - 1.0).abs() < 1e-15);
        for row in &r.shells[1..] {
            let expect = 2.0 / (1.0 + (row.radius * row.radius) as f64);
            assert!((row.partial - expect).abs() < 1e-14);
        }
        assert!(r.summable_trend);
    }

    #[test]
    fn zero_and_identity_summability() {
        let w = FrequencyWindow::new(2, 4).unwrap();
        let z = SymbolTable::multiplier_from_fn(w, 2, 2, TailSpec::Zero, |_| CMatrix::zeros(2, 2)).unwrap();
        let r = summability_check(&z, 0.5, 1.0).unwrap();
        assert!(r.shells.iter().all(|s| s.partial == 0.0));
        let id = make_family(&FamilySpec::Identity, &FamilyFrame::square(2, 4, 2)).unwrap();
        let r = summability_check(&id, 1.0, 2.0).unwrap();
        for row in &r.shells[1..] {
            assert!((row.partial - 2.0 * 8.0 * row.radius as f64).abs() < 1e-12);
        }
        assert!(!r.summable_trend);
        assert!(summability_check(&id, 1.5, 2.0).is_err());
    }

    #[test]
    fn decay_norm_basics() {
        let w = FrequencyWindow::new(1, 4).unwrap();
        let z = SymbolTable::multiplier_from_fn(w, 2, 2, TailSpec::Zero, |_| CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(decay_norm(&z, 3.0).unwrap().norm, 0.0);
        let id = make_family(&FamilySpec::Identity, &FamilyFrame::square(1, 4, 2)).unwrap();
        let r = decay_norm(&id, 4.0).unwrap();
        assert!((r.norm - 9f64.powf(0.25)).abs() < 1e-14);
        assert!(!r.shells.summable_trend);
        assert!(matches!(decay_norm(&id, 1.0), Err(Error::Domain(_))));
        let b = make_family(&FamilySpec::Bessel { order: -1.0 }, &FamilyFrame::square(1, 4, 1)).unwrap();
        let r = decay_norm(&b, 2.5).unwrap();
        let expect: f64 = w_iter(4).map(|x| japanese_bracket(&[x]).powf(-2.5)).sum::<f64>().powf(0.4);
        assert!((r.norm - expect).abs() < 1e-14);
    }

    fn w_iter(r: i64) -> impl Iterator<Item = i64> {
        -r..=r
    }

    #[test]
    fn schatten_cases() {
        let u = DVector::from_vec(vec![C64::new(1.0, 1.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.0)]);
        let v = DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, -4.0)]);
        let m = &u * v.transpose();
        for s in [0.3, 0.5, 1.0, 2.0] {
            assert!((schatten_norm(&m, s).unwrap() - u.norm() * v.norm()).abs() < 1e-12);
        }
        for s in [0.5, 1.0, 3.0] {
            assert!((schatten_norm(&CMatrix::identity(4, 4), s).unwrap() - 4f64.powf(1.0 / s)).abs() < 1e-12);
        }
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]));
        assert!((schatten_norm(&d, 1.0).unwrap() - 7.0).abs() < 1e-14);
        assert!(schatten_norm(&d, 0.0).is_err());
    }
}
