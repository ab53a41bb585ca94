// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference implementations used as oracles by the integration tests.
//! Everything here is written directly from the definitions with plain loops,
//! without the FFT or the eigen-solvers of the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use torpsido::lattice::{FrequencyWindow, TorusGrid, C64};
use torpsido::linalg::{gaussian_matrix, CMatrix};
use torpsido::symbol::{SymbolTable, TailSpec};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `exp(sign 2 pi i x_j . xi)` with the phase reduced in exact integer arithmetic.
pub fn phase(grid: &TorusGrid, j: usize, xi: &[i64], sign: f64) -> C64 {
    let m = grid.size() as i64;
    let k = grid
        .coords(j)
        .iter()
        .zip(xi)
        .map(|(&a, &b)| a as i64 * b)
        .sum::<i64>()
        .rem_euclid(m);
    C64::from_polar(1.0, sign * 2.0 * PI * k as f64 / m as f64)
}

/// Direct-sum analysis `M^-n sum_j exp(-2 pi i x_j . xi) f(x_j)`, fiber-interleaved.
pub fn analysis(grid: &TorusGrid, fiber: usize, data: &[C64], window: &FrequencyWindow) -> Vec<C64> {
    let w = 1.0 / grid.len() as f64;
    let mut out = vec![c(0.0, 0.0); window.len() * fiber];
    for (i, xi) in window.iter().enumerate() {
        for j in 0..grid.len() {
            let e = phase(grid, j, &xi, -1.0);
            for a in 0..fiber {
                out[i * fiber + a] += e * data[j * fiber + a] * w;
            }
        }
    }
    out
}

/// Direct-sum synthesis `sum_xi exp(2 pi i x_j . xi) c(xi)` on every grid point.
pub fn synthesis(grid: &TorusGrid, fiber: usize, coeffs: &[C64], window: &FrequencyWindow) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); grid.len() * fiber];
    for j in 0..grid.len() {
        for (i, xi) in window.iter().enumerate() {
            let e = phase(grid, j, &xi, 1.0);
            for a in 0..fiber {
                out[j * fiber + a] += e * coeffs[i * fiber + a];
            }
        }
    }
    out
}

/// Operator matrix on window coefficients from the definition
/// `(T f)^(xi) = sum_eta [M^-n sum_j exp(-2 pi i x_j . (xi - eta)) sigma(x_j, eta)] f^(eta)`.
pub fn naive_assemble(sigma: &SymbolTable) -> CMatrix {
    let window = sigma.window();
    let (d_out, d_in) = (sigma.d_out(), sigma.d_in());
    let wl = window.len();
    let freqs: Vec<Vec<i64>> = window.iter().collect();
    let mut out = CMatrix::zeros(wl * d_out, wl * d_in);
    match sigma.grid() {
        None => {
            for w in 0..wl {
                out.view_mut((w * d_out, w * d_in), (d_out, d_in)).copy_from(sigma.value(0, w));
            }
        }
        Some(grid) => {
            let weight = 1.0 / grid.len() as f64;
            for (x, xi) in freqs.iter().enumerate() {
                for (e, eta) in freqs.iter().enumerate() {
                    let k: Vec<i64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
                    let mut block = CMatrix::zeros(d_out, d_in);
                    for j in 0..grid.len() {
                        block += sigma.value(j, e) * (phase(grid, j, &k, -1.0) * weight);
                    }
                    out.view_mut((x * d_out, e * d_in), (d_out, d_in)).copy_from(&block);
                }
            }
        }
    }
    out
}

pub fn matvec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max |a - b| / max |b|`.
pub fn rel_vec(a: &[C64], b: &[C64]) -> f64 {
    max_diff(a, b) / max_abs(b).max(f64::MIN_POSITIVE)
}

pub fn rel_scalar(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

pub fn diag_sum(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// `exp(-t H)` by scaling and squaring of a degree-24 Taylor polynomial.
pub fn expm_neg(h: &CMatrix, t: f64) -> CMatrix {
    let a = h * c(-t, 0.0);
    let norm: f64 = (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = a * c(0.5f64.powi(s), 0.0);
    let n = a.nrows();
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &a * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Gaussian blocks on the window, optionally sampled on a `4N + 1` grid.
pub fn random_table(
    rng: &mut ChaCha8Rng,
    n: usize,
    radius: usize,
    d_out: usize,
    d_in: usize,
    x_dependent: bool,
    tail: TailSpec,
) -> SymbolTable {
    let window = FrequencyWindow::new(n, radius).unwrap();
    if x_dependent {
        let grid = TorusGrid::new(n, 4 * radius + 1).unwrap();
        let values = (0..grid.len() * window.len()).map(|_| gaussian_matrix(rng, d_out, d_in)).collect();
        SymbolTable::full(grid, window, d_out, d_in, values, tail).unwrap()
    } else {
        let values = (0..window.len()).map(|_| gaussian_matrix(rng, d_out, d_in)).collect();
        SymbolTable::multiplier(window, d_out, d_in, values, tail).unwrap()
    }
}

/// Gaussian `rows x cols` matrix of rank exactly `rank` (almost surely).
pub fn matrix_of_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize) -> CMatrix {
    gaussian_matrix(rng, rows, rank) * gaussian_matrix(rng, rank, cols)
}

/// Largest distance in a greedy nearest-neighbour matching of two multisets.
/// Greedy matching never beats the optimal bottleneck, so a small value here
/// certifies that the multisets agree.
pub fn greedy_matching_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}
