// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Scalar symbols `b(y, xi, eta)` on `T^m x Z^n x Z^m`, their realization as
//! operator-valued multipliers in `xi` acting on `L^2(T^m)`, and empirical
//! Hoermander-class bound checks.

use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::{SymbolTable, TailSpec};
use crate::error::{Error, Result};
use crate::lattice::{euclidean_norm, fft_nd, FrequencyWindow, TorusGrid, C64};
use crate::linalg::CMatrix;

/// `<xi, eta> = (1 + |xi|^2 + |eta|^2)^(1/2)`.
pub fn bracket_pair(xi: &[i64], eta: &[i64]) -> f64 {
    let s: i64 = xi.iter().chain(eta).map(|c| c * c).sum();
    (1.0 + s as f64).sqrt()
}

/// Built-in scalar bisymbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BisymbolKind {
    /// `<xi, eta>`.
    Bracket,
    /// A constant `re + i im`.
    Constant { re: f64, im: f64 },
    /// `<xi, eta> (2 + cos 2 pi y_1)`.
    BracketCosine,
    /// `<xi, eta> (3 + exp(2 pi i y_1))`.
    BracketExponential,
}

impl BisymbolKind {
    pub fn evaluate(&self, y: &[f64], xi: &[i64], eta: &[i64]) -> C64 {
        let tau = 2.0 * std::f64::consts::PI;
        match self {
            BisymbolKind::Bracket => C64::new(bracket_pair(xi, eta), 0.0),
            BisymbolKind::Constant { re, im } => C64::new(*re, *im),
            BisymbolKind::BracketCosine => C64::new(bracket_pair(xi, eta) * (2.0 + (tau * y[0]).cos()), 0.0),
            BisymbolKind::BracketExponential => {
                (C64::new(3.0, 0.0) + C64::from_polar(1.0, tau * y[0])) * bracket_pair(xi, eta)
            }
        }
    }
}

/// Samples of a scalar symbol `b(y_j, xi, eta)` together with its declared
/// order `kappa` and type `(rho, delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarBisymbol {
    xi_window: FrequencyWindow,
    eta_window: FrequencyWindow,
    y_grid: TorusGrid,
    /// Indexed `(j * W_xi + xi) * W_eta + eta`.
    values: Vec<C64>,
    pub order: f64,
    pub rho: f64,
    pub delta: f64,
}

impl ScalarBisymbol {
    pub fn new(
        xi_window: FrequencyWindow,
        eta_window: FrequencyWindow,
        y_grid: TorusGrid,
        values: Vec<C64>,
        order: f64,
        rho: f64,
        delta: f64,
    ) -> Result<Self> {
        if y_grid.dim() != eta_window.dim() {
            return Err(Error::Dimension("the y-grid and eta-window must share the dimension m".into()));
        }
        let expect = y_grid.len() * xi_window.len() * eta_window.len();
        if values.len() != expect {
            return Err(Error::Shape(format!("bisymbol needs {expect} samples, got {}", values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("bisymbol samples must be finite".into()));
        }
        if xi_window.radius() == 0 && eta_window.radius() == 0 {
            return Err(Error::Dimension("bisymbol windows need a positive radius".into()));
        }
        Ok(Self { xi_window, eta_window, y_grid, values, order, rho, delta })
    }

    pub fn from_fn(
        xi_window: FrequencyWindow,
        eta_window: FrequencyWindow,
        y_grid: TorusGrid,
        order: f64,
        rho: f64,
        delta: f64,
        f: impl Fn(&[f64], &[i64], &[i64]) -> C64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(y_grid.len() * xi_window.len() * eta_window.len());
        for j in 0..y_grid.len() {
            let y = y_grid.point(j);
            for xi in xi_window.iter() {
                for eta in eta_window.iter() {
                    values.push(f(&y, &xi, &eta));
                }
            }
        }
        Self::new(xi_window, eta_window, y_grid, values, order, rho, delta)
    }

    /// A built-in symbol on `T^m`-grid of size `y_size` with windows of radii
    /// `xi_radius` (in `Z^n`) and `eta_radius` (in `Z^m`).
    #[allow(clippy::too_many_arguments)]
    pub fn builtin(
        kind: &BisymbolKind,
        n: usize,
        m: usize,
        xi_radius: usize,
        eta_radius: usize,
        y_size: usize,
        order: f64,
        rho: f64,
        delta: f64,
    ) -> Result<Self> {
        Self::from_fn(
            FrequencyWindow::new(n, xi_radius)?,
            FrequencyWindow::new(m, eta_radius)?,
            TorusGrid::new(m, y_size)?,
            order,
            rho,
            delta,
            |y, xi, eta| kind.evaluate(y, xi, eta),
        )
    }

    pub fn xi_window(&self) -> &FrequencyWindow {
        &self.xi_window
    }

    pub fn eta_window(&self) -> &FrequencyWindow {
        &self.eta_window
    }

    pub fn y_grid(&self) -> &TorusGrid {
        &self.y_grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, j: usize, xi: usize, eta: usize) -> C64 {
        self.values[(j * self.xi_window.len() + xi) * self.eta_window.len() + eta]
    }

    fn pairs(&self) -> usize {
        self.xi_window.len() * self.eta_window.len()
    }

    /// Fourier coefficients in `y` of every `(xi, eta)` slice, DFT-bin ordered.
    fn y_transform(&self) -> Vec<C64> {
        let mut buf = self.values.clone();
        fft_nd(&mut buf, &self.y_grid, self.pairs(), FftDirection::Forward);
        let w = self.y_grid.weight();
        buf.iter_mut().for_each(|v| *v *= w);
        buf
    }

    /// Signed frequency carried by a DFT bin coordinate under the symmetric
    /// band convention, or `None` for the unpaired Nyquist bin of an even grid.
    fn band_frequency(&self, c: usize) -> Option<i64> {
        let m = self.y_grid.size();
        let half = (m - 1) / 2;
        if c <= half {
            Some(c as i64)
        } else if m - c <= half {
            Some(-((m - c) as i64))
        } else {
            None
        }
    }

    /// `b^_y(k, xi, eta)` for `k` inside the band of the y-grid, else zero.
    fn y_coefficient(&self, hat: &[C64], k: &[i64], xi: usize, eta: usize) -> C64 {
        let m = self.y_grid.size() as i64;
        let half = (m - 1) / 2;
        if k.iter().any(|&c| c.abs() > half) {
            return C64::new(0.0, 0.0);
        }
        let bin = self.y_grid.bin_of(k);
        hat[bin * self.pairs() + xi * self.eta_window.len() + eta]
    }

    /// Samples of `d_y^gamma b` by spectral differentiation.
    fn y_derivative(&self, gamma: &[usize]) -> Vec<C64> {
        if gamma.iter().all(|&g| g == 0) {
            return self.values.clone();
        }
        let mut hat = self.y_transform();
        let pairs = self.pairs();
        let tau = 2.0 * std::f64::consts::PI;
        for bin in 0..self.y_grid.len() {
            let coords = self.y_grid.coords(bin);
            let mut factor = C64::new(1.0, 0.0);
            for (c, &g) in coords.iter().zip(gamma) {
                if g == 0 {
                    continue;
                }
                match self.band_frequency(*c) {
                    Some(k) => factor *= C64::new(0.0, tau * k as f64).powu(g as u32),
                    None => factor = C64::new(0.0, 0.0),
                }
            }
            for v in &mut hat[bin * pairs..(bin + 1) * pairs] {
                *v *= factor;
            }
        }
        fft_nd(&mut hat, &self.y_grid, pairs, FftDirection::Inverse);
        hat
    }
}

/// Realize `b` as the multiplier `a(xi)` on the truncated basis `{e_eta}` of
/// `L^2(T^m)`: `<a(xi) e_eta, e_eta'> = b^_y(eta' - eta, xi, eta)`.
///
/// The y-dependence is read as the trigonometric interpolant of the samples,
/// so y-frequencies beyond the grid's band contribute nothing.
pub fn hoermander_realize(b: &ScalarBisymbol) -> Result<SymbolTable> {
    let need = b.eta_window.side();
    if b.y_grid.size() < need {
        return Err(Error::Dimension(format!(
            "y-grid with M = {} is too coarse for eta-radius {} (need M >= {need})",
            b.y_grid.size(),
            b.eta_window.radius()
        )));
    }
    let hat = b.y_transform();
    let d = b.eta_window.len();
    let etas: Vec<Vec<i64>> = b.eta_window.iter().collect();
    let values = (0..b.xi_window.len())
        .map(|xi| {
            CMatrix::from_fn(d, d, |row, col| {
                let k: Vec<i64> = etas[row].iter().zip(&etas[col]).map(|(a, c)| a - c).collect();
                b.y_coefficient(&hat, &k, xi, col)
            })
        })
        .collect();
    SymbolTable::multiplier(b.xi_window.clone(), d, d, values, TailSpec::InvertibleIdentityLike)
}

/// Empirical constant for one multi-index triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub gamma: Vec<usize>,
    pub alpha: Vec<usize>,
    pub omega: Vec<usize>,
    /// `kappa - rho (|alpha| + |omega|) + delta |gamma|`.
    pub exponent: f64,
    /// Sup of `|d_y^gamma D_xi^alpha D_eta^omega b| / <xi,eta>^exponent`.
    pub constant: f64,
    /// The same sup over windows one step smaller in each radius.
    pub inner_constant: f64,
    /// The constant increased when the window grew.
    pub growing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub order: f64,
    pub rho: f64,
    pub delta: f64,
    pub entries: Vec<BoundEntry>,
    /// Threshold `M0` on `|xi| + |eta|` for the ellipticity bound.
    pub ellipticity_cutoff: f64,
    /// `inf |b| / <xi,eta>^kappa` over `|xi| + |eta| >= M0`; `None` if empty.
    pub ellipticity_constant: Option<f64>,
}

impl BoundsReport {
    pub fn is_elliptic(&self) -> bool {
        self.ellipticity_constant.is_some_and(|c| c > 0.0)
    }

    pub fn entry(&self, gamma: &[usize], alpha: &[usize], omega: &[usize]) -> Option<&BoundEntry> {
        self.entries
            .iter()
            .find(|e| e.gamma == gamma && e.alpha == alpha && e.omega == omega)
    }
}

/// All multi-indices in `{0..=cap}^dim`, lexicographic.
fn multi_indices(dim: usize, cap: usize) -> Vec<Vec<usize>> {
    let side = cap + 1;
    (0..side.pow(dim as u32))
        .map(|mut i| {
            let mut v = vec![0; dim];
            for a in (0..dim).rev() {
                v[a] = i % side;
                i /= side;
            }
            v
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Forward-difference stencil `sum_{beta <= alpha} (-1)^{|alpha - beta|} C(alpha, beta) u(. + beta)`.
fn stencil(alpha: &[usize]) -> Vec<(Vec<i64>, f64)> {
    let dim = alpha.len();
    let mut out = vec![(vec![0i64; dim], 1.0)];
    for a in 0..dim {
        let mut next = Vec::new();
        for (shift, w) in &out {
            for beta in 0..=alpha[a] {
                let mut s = shift.clone();
                s[a] += beta as i64;
                let sign = if (alpha[a] - beta) % 2 == 0 { 1.0 } else { -1.0 };
                next.push((s, w * sign * binomial(alpha[a], beta)));
            }
        }
        out = next;
    }
    out
}

/// Empirical symbol-class constants for every `(gamma, alpha, omega)` with
/// components up to the caps, using forward differences that stay inside the
/// windows and spectral y-derivatives, plus the ellipticity constant over
/// `|xi| + |eta| >= cutoff`.
pub fn hoermander_bounds_report(b: &ScalarBisymbol, alpha_max: usize, gamma_max: usize, cutoff: f64) -> BoundsReport {
    let n = b.xi_window.dim();
    let m = b.eta_window.dim();
    let xis: Vec<Vec<i64>> = b.xi_window.iter().collect();
    let etas: Vec<Vec<i64>> = b.eta_window.iter().collect();
    let (rx, re) = (b.xi_window.radius() as i64, b.eta_window.radius() as i64);
    let mut entries = Vec::new();
    for gamma in multi_indices(m, gamma_max) {
        let deriv = b.y_derivative(&gamma);
        let at = |j: usize, xi: usize, eta: usize| deriv[(j * xis.len() + xi) * etas.len() + eta];
        for alpha in multi_indices(n, alpha_max) {
            let sa = stencil(&alpha);
            for omega in multi_indices(m, alpha_max) {
                let so = stencil(&omega);
                let abs_a: usize = alpha.iter().sum();
                let abs_o: usize = omega.iter().sum();
                let abs_g: usize = gamma.iter().sum();
                let exponent = b.order - b.rho * (abs_a + abs_o) as f64 + b.delta * abs_g as f64;
                let (mut full, mut inner) = (0.0f64, 0.0f64);
                for xi in &xis {
                    let top_xi: Vec<i64> = xi.iter().zip(&alpha).map(|(c, a)| c + *a as i64).collect();
                    if !b.xi_window.contains(&top_xi) {
                        continue;
                    }
                    for eta in &etas {
                        let top_eta: Vec<i64> = eta.iter().zip(&omega).map(|(c, a)| c + *a as i64).collect();
                        if !b.eta_window.contains(&top_eta) {
                            continue;
                        }
                        let inside = xi.iter().chain(&top_xi).all(|c| c.abs() < rx.max(1))
                            && eta.iter().chain(&top_eta).all(|c| c.abs() < re.max(1));
                        let weight = bracket_pair(xi, eta).powf(exponent);
                        for j in 0..b.y_grid.len() {
                            let mut val = C64::new(0.0, 0.0);
                            for (s1, w1) in &sa {
                                let p: Vec<i64> = xi.iter().zip(s1).map(|(a, c)| a + c).collect();
                                let pi = b.xi_window.index_of(&p).expect("stencil inside window");
                                for (s2, w2) in &so {
                                    let q: Vec<i64> = eta.iter().zip(s2).map(|(a, c)| a + c).collect();
                                    let qi = b.eta_window.index_of(&q).expect("stencil inside window");
                                    val += at(j, pi, qi) * (w1 * w2);
                                }
                            }
                            let ratio = val.norm() / weight;
                            full = full.max(ratio);
                            if inside {
                                inner = inner.max(ratio);
                            }
                        }
                    }
                }
                entries.push(BoundEntry {
                    gamma: gamma.clone(),
                    alpha: alpha.clone(),
                    omega,
                    exponent,
                    constant: full,
                    inner_constant: inner,
                    growing: full > inner * (1.0 + 1e-9) && full > 1e-300,
                });
            }
        }
    }
    let mut ell: Option<f64> = None;
    for (ix, xi) in xis.iter().enumerate() {
        for (ie, eta) in etas.iter().enumerate() {
            if euclidean_norm(xi) + euclidean_norm(eta) < cutoff {
                continue;
            }
            let weight = bracket_pair(xi, eta).powf(b.order);
            for j in 0..b.y_grid.len() {
                let r = b.value(j, ix, ie).norm() / weight;
                ell = Some(ell.map_or(r, |e| e.min(r)));
            }
        }
    }
    BoundsReport {
        order: b.order,
        rho: b.rho,
        delta: b.delta,
        entries,
        ellipticity_cutoff: cutoff,
        ellipticity_constant: ell,
    }
}
