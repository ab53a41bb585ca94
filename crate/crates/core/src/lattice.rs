// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Discretization frame: truncated dual lattice, sampled torus, vector-valued
//! fields and their Fourier data.
//!
//! Fourier convention throughout the crate:
//!
//! ```text
//! analysis   f^(xi) = M^-n  sum_j exp(-2 pi i x_j . xi) f(x_j)
//! synthesis  f(x_j) = sum_xi exp(+2 pi i x_j . xi) f^(xi)
//! ```
//!
//! with `x_j = j / M` componentwise.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// All `xi` in `Z^n` with `|xi|_inf <= radius`, enumerated lexicographically
/// (axis 0 most significant, each axis running from `-radius` to `radius`).
///
/// The same type describes finite lattice supports on the discrete side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyWindow {
    dim: usize,
    radius: usize,
}

/// Finite box of lattice sites in `Z^n`, used as a support on the discrete side.
pub type LatticeBox = FrequencyWindow;

impl FrequencyWindow {
    pub fn new(dim: usize, radius: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("torus dimension must be positive".into()));
        }
        Ok(Self { dim, radius })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Points per axis, `2N + 1`.
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Cardinality `(2N+1)^n`.
    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `i`-th frequency of the enumeration.
    pub fn point(&self, i: usize) -> Vec<i64> {
        let side = self.side();
        let mut out = vec![0i64; self.dim];
        let mut rem = i;
        for a in (0..self.dim).rev() {
            out[a] = (rem % side) as i64 - self.radius as i64;
            rem /= side;
        }
        out
    }

    /// Position of `xi` in the enumeration, if it lies in the window.
    pub fn index_of(&self, xi: &[i64]) -> Option<usize> {
        if xi.len() != self.dim {
            return None;
        }
        let r = self.radius as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &c in xi {
            if c < -r || c > r {
                return None;
            }
            idx = idx * side + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn contains(&self, xi: &[i64]) -> bool {
        self.index_of(xi).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Sup-norm shell `|xi|_inf` of the `i`-th point.
    pub fn shell(&self, i: usize) -> usize {
        sup_norm(&self.point(i))
    }
}

pub fn sup_norm(xi: &[i64]) -> usize {
    xi.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0)
}

pub fn euclidean_norm(xi: &[i64]) -> f64 {
    xi.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
}

/// Japanese bracket `<xi> = (1 + |xi|^2)^(1/2)`.
pub fn japanese_bracket(xi: &[i64]) -> f64 {
    (1.0 + xi.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt()
}

/// Uniform grid `x_j = j / M` on `T^n`, row-major with axis 0 slowest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    size: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("torus dimension must be positive".into()));
        }
        if size == 0 {
            return Err(Error::Dimension("grid needs at least one sample per axis".into()));
        }
        Ok(Self { dim, size })
    }

    /// Critically sampled grid for a window, `M = 2N + 1`.
    pub fn critical(window: &FrequencyWindow) -> Self {
        Self { dim: window.dim(), size: window.side() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Samples per axis `M`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// Integer coordinates `j` of the `idx`-th grid point.
    pub fn coords(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.dim];
        let mut rem = idx;
        for a in (0..self.dim).rev() {
            out[a] = rem % self.size;
            rem /= self.size;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.coords(idx)
            .into_iter()
            .map(|c| c as f64 / self.size as f64)
            .collect()
    }

    /// `exp(2 pi i sign x_j . xi)` evaluated with exact integer phase reduction.
    pub fn character(&self, idx: usize, xi: &[i64], sign: f64) -> C64 {
        let m = self.size as i64;
        let mut k = 0i64;
        for (c, &x) in self.coords(idx).into_iter().zip(xi) {
            k = (k + (c as i64) * x.rem_euclid(m)).rem_euclid(m);
        }
        C64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * k as f64 / m as f64)
    }

    /// Linear index of the DFT bin holding frequency `xi` (reduced mod `M`).
    pub fn bin_of(&self, xi: &[i64]) -> usize {
        let m = self.size as i64;
        xi.iter().fold(0usize, |acc, &c| acc * self.size + c.rem_euclid(m) as usize)
    }

    /// Check `M >= 2N + 1`.
    pub fn require_resolves(&self, window: &FrequencyWindow) -> Result<()> {
        if window.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "window dimension {} does not match grid dimension {}",
                window.dim(),
                self.dim
            )));
        }
        if self.size < window.side() {
            return Err(Error::Dimension(format!(
                "grid with M = {} cannot resolve window radius {} (need M >= {})",
                self.size,
                window.radius(),
                window.side()
            )));
        }
        Ok(())
    }
}

/// `C^d`-valued samples on a torus grid, point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    fiber: usize,
    data: Vec<C64>,
}

impl VectorField {
    pub fn new(grid: TorusGrid, fiber: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() * fiber {
            return Err(Error::Shape(format!(
                "field expects {} samples of dimension {}, got {} values",
                grid.len(),
                fiber,
                data.len()
            )));
        }
        Ok(Self { grid, fiber, data })
    }

    pub fn zeros(grid: TorusGrid, fiber: usize) -> Self {
        let data = vec![C64::new(0.0, 0.0); grid.len() * fiber];
        Self { grid, fiber, data }
    }

    pub fn from_fn(grid: TorusGrid, fiber: usize, mut f: impl FnMut(&[f64]) -> Vec<C64>) -> Result<Self> {
        let mut data = Vec::with_capacity(grid.len() * fiber);
        for j in 0..grid.len() {
            let v = f(&grid.point(j));
            if v.len() != fiber {
                return Err(Error::Shape(format!("sample has length {}, expected {fiber}", v.len())));
            }
            data.extend(v);
        }
        Ok(Self { grid, fiber, data })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn sample(&self, j: usize) -> &[C64] {
        &self.data[j * self.fiber..(j + 1) * self.fiber]
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            fiber: self.fiber,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

/// Fourier data `f^(xi)` in `C^d` for each window frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    window: FrequencyWindow,
    fiber: usize,
    data: Vec<C64>,
}

impl FourierCoefficients {
    pub fn new(window: FrequencyWindow, fiber: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != window.len() * fiber {
            return Err(Error::Shape(format!(
                "coefficients expect {} values of dimension {}, got {}",
                window.len(),
                fiber,
                data.len()
            )));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("Fourier coefficients must be finite".into()));
        }
        Ok(Self { window, fiber, data })
    }

    pub fn zeros(window: FrequencyWindow, fiber: usize) -> Self {
        let data = vec![C64::new(0.0, 0.0); window.len() * fiber];
        Self { window, fiber, data }
    }

    pub fn window(&self) -> &FrequencyWindow {
        &self.window
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn value(&self, i: usize) -> &[C64] {
        &self.data[i * self.fiber..(i + 1) * self.fiber]
    }

    pub fn value_at(&self, xi: &[i64]) -> Option<&[C64]> {
        self.window.index_of(xi).map(|i| self.value(i))
    }
}

/// In-place n-dimensional unnormalized DFT of an `M^n` array with `fiber`
/// interleaved components per point.
pub(crate) fn fft_nd(data: &mut [C64], grid: &TorusGrid, fiber: usize, direction: FftDirection) {
    let m = grid.size();
    let n = grid.dim();
    if m == 1 {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(m, direction);
    let mut line = vec![C64::new(0.0, 0.0); m];
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let outer = m.pow(axis as u32);
        for o in 0..outer {
            for inner in 0..stride {
                let start = o * stride * m + inner;
                for comp in 0..fiber {
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[(start + k * stride) * fiber + comp];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[(start + k * stride) * fiber + comp] = *v;
                    }
                }
            }
        }
    }
}

/// Vector-valued Fourier transform restricted to `window`.
pub fn forward_vft(f: &VectorField, window: &FrequencyWindow) -> Result<FourierCoefficients> {
    f.grid.require_resolves(window)?;
    let mut buf = f.data.clone();
    fft_nd(&mut buf, &f.grid, f.fiber, FftDirection::Forward);
    let w = f.grid.weight();
    let d = f.fiber;
    let mut out = Vec::with_capacity(window.len() * d);
    for xi in window.iter() {
        let b = f.grid.bin_of(&xi);
        out.extend(buf[b * d..(b + 1) * d].iter().map(|v| v * w));
    }
    Ok(FourierCoefficients { window: window.clone(), fiber: d, data: out })
}

/// Synthesis `f(x_j) = sum_xi exp(2 pi i x_j . xi) c(xi)` on `grid`.
pub fn inverse_vft(c: &FourierCoefficients, grid: &TorusGrid) -> Result<VectorField> {
    grid.require_resolves(&c.window)?;
    let d = c.fiber;
    let mut buf = vec![C64::new(0.0, 0.0); grid.len() * d];
    for (i, xi) in c.window.iter().enumerate() {
        let b = grid.bin_of(&xi);
        buf[b * d..(b + 1) * d].copy_from_slice(c.value(i));
    }
    fft_nd(&mut buf, grid, d, FftDirection::Inverse);
    Ok(VectorField { grid: grid.clone(), fiber: d, data: buf })
}

pub(crate) fn fiber_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn check_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::Domain(format!("norm exponent must be finite and >= 1, got {p}")));
    }
    Ok(())
}

/// Mixed norm `( M^-n sum_j |f(x_j)|^p )^(1/p)` with the Euclidean fiber norm.
pub fn lp_norm(f: &VectorField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let sum: f64 = (0..f.grid.len()).map(|j| fiber_norm(f.sample(j)).powf(p)).sum();
    Ok((sum * f.grid.weight()).powf(1.0 / p))
}

/// Finitely supported `C^d`-valued function on a lattice box in `Z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    support: LatticeBox,
    fiber: usize,
    data: Vec<C64>,
}

impl LatticeField {
    pub fn new(support: LatticeBox, fiber: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != support.len() * fiber {
            return Err(Error::Shape(format!(
                "lattice field expects {} sites of dimension {}, got {} values",
                support.len(),
                fiber,
                data.len()
            )));
        }
        Ok(Self { support, fiber, data })
    }

    pub fn zeros(support: LatticeBox, fiber: usize) -> Self {
        let data = vec![C64::new(0.0, 0.0); support.len() * fiber];
        Self { support, fiber, data }
    }

    pub fn support(&self) -> &LatticeBox {
        &self.support
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn value(&self, i: usize) -> &[C64] {
        &self.data[i * self.fiber..(i + 1) * self.fiber]
    }

    /// Value at a lattice site; zero outside the support.
    pub fn value_at(&self, x: &[i64]) -> Option<&[C64]> {
        self.support.index_of(x).map(|i| self.value(i))
    }

    /// `F_{Z^n} f (xi) = sum_y exp(-2 pi i y . xi) f(y)` at a point of `T^n`.
    pub fn fourier_at(&self, xi: &[f64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.fiber];
        for (i, y) in self.support.iter().enumerate() {
            let phase: f64 = y.iter().zip(xi).map(|(&a, &b)| a as f64 * b).sum();
            let e = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase);
            for (o, v) in out.iter_mut().zip(self.value(i)) {
                *o += e * v;
            }
        }
        out
    }
}

/// Counting-measure norm `( sum_x |f(x)|^p )^(1/p)` over the support.
pub fn discrete_lp_norm(f: &LatticeField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let sum: f64 = (0..f.support.len()).map(|i| fiber_norm(f.value(i)).powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}
