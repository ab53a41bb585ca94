// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra used by every module: singular values,
//! Hermitian eigendecompositions, general eigenvalues and random unitaries.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lattice::C64;

pub type CMatrix = DMatrix<C64>;

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Eigendecomposition of the Hermitian part `(h + h*) / 2`: ascending
/// eigenvalues and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `exp(-t h)` for Hermitian `h`.
pub fn exp_neg_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let weights = DVector::from_iterator(values.len(), values.iter().map(|l| C64::new((-t * l).exp(), 0.0)));
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * weights[j]);
    scaled * vectors.adjoint()
}

/// `tr exp(-t h)` for Hermitian `h`.
pub fn trace_exp_neg_hermitian(h: &CMatrix, t: f64) -> f64 {
    hermitian_eigen(h).0.iter().map(|l| (-t * l).exp()).sum()
}

/// Eigenvalues (with multiplicity) of a general square complex matrix via
/// the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("eigenvalues need a square matrix, got {}x{}", n, m.ncols())));
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let scale = frobenius_norm(m);
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Contract("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > f64::EPSILON * scale {
            let (a, b) = eig2x2(t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            out.push(a);
            out.push(b);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}

fn eig2x2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half = (a - d) * 0.5;
    let disc = (b * c + half * half).sqrt();
    let mid = (a + d) * 0.5;
    (mid + disc, mid - disc)
}

/// Hausdorff distance between two finite point sets in the complex plane.
pub fn hausdorff_distance(a: &[C64], b: &[C64]) -> f64 {
    fn directed(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed(a, b).max(directed(b, a))
}

/// Greedy multiset matching distance: pairs each point of `a` (sorted by
/// real then imaginary part) with its nearest unused point of `b` and
/// returns the largest pair distance. Infinite when cardinalities differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut sa = a.to_vec();
    sa.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in &sa {
        let (k, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("cardinalities match");
        used[k] = true;
        worst = worst.max(dist);
    }
    worst
}

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|^2 = 1`).
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = gaussian_matrix(rng, d, d);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { one() };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Block-diagonal matrix with the given blocks in order.
pub fn block_diagonal(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}
