// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Finite tensor-kernel decompositions `K = sum_k h_k (x) g_k` on the torus and
//! on the lattice, and the rank-one symbols they induce.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    discrete_lp_norm, fiber_norm, forward_vft, lp_norm, FrequencyWindow, LatticeBox, LatticeField, TorusGrid,
    VectorField, C64,
};
use crate::linalg::{gaussian_matrix, CMatrix};
use crate::quantization::DiscreteSymbol;
use crate::symbol::{SymbolTable, TailSpec};

use super::schatten_norm;

fn dual_exponent(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::Domain(format!("p must lie in (1, inf), got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// `K = sum_k h_k (x) g_k` with `h_k` in `L^{p'}(T^n, C^{d_out})` and
/// `g_k` in `L^p(T^n, C^{d_in})`, all sampled on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct NuclearDecomposition {
    grid: TorusGrid,
    d_out: usize,
    d_in: usize,
    terms: Vec<(VectorField, VectorField)>,
    p: f64,
    s: f64,
    nuclear_sum: f64,
}

impl NuclearDecomposition {
    pub fn new(
        grid: TorusGrid,
        d_out: usize,
        d_in: usize,
        terms: Vec<(VectorField, VectorField)>,
        p: f64,
        s: f64,
    ) -> Result<Self> {
        super::check_s(s)?;
        let p_prime = dual_exponent(p)?;
        let mut nuclear_sum = 0.0;
        for (k, (h, g)) in terms.iter().enumerate() {
            if h.grid() != &grid || g.grid() != &grid {
                return Err(Error::Shape(format!("term {k} is sampled on a different grid")));
            }
            if h.fiber() != d_out || g.fiber() != d_in {
                return Err(Error::Shape(format!(
                    "term {k} has fibers ({}, {}), expected ({d_out}, {d_in})",
                    h.fiber(),
                    g.fiber()
                )));
            }
            nuclear_sum += (lp_norm(h, p_prime)? * lp_norm(g, p)?).powf(s);
        }
        Ok(Self { grid, d_out, d_in, terms, p, s, nuclear_sum })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn terms(&self) -> &[(VectorField, VectorField)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `sum_k |h_k|_{p'}^s |g_k|_p^s`.
    pub fn nuclear_sum(&self) -> f64 {
        self.nuclear_sum
    }
}

fn random_field(rng: &mut ChaCha8Rng, grid: &TorusGrid, d: usize, scale: f64) -> Result<VectorField> {
    let m = gaussian_matrix(rng, grid.len() * d, 1) * C64::new(scale, 0.0);
    VectorField::new(grid.clone(), d, m.as_slice().to_vec())
}

/// Seeded random decomposition with `|h_k|` decaying like `(k + 1)^-2`.
pub fn random_decomposition(
    grid: &TorusGrid,
    d_out: usize,
    d_in: usize,
    terms: usize,
    p: f64,
    s: f64,
    seed: u64,
) -> Result<NuclearDecomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(terms);
    for k in 0..terms {
        let h = random_field(&mut rng, grid, d_out, 1.0 / ((k + 1) * (k + 1)) as f64)?;
        let g = random_field(&mut rng, grid, d_in, 1.0)?;
        out.push((h, g));
    }
    NuclearDecomposition::new(grid.clone(), d_out, d_in, out, p, s)
}

/// `sigma(x_j, xi) = exp(-2 pi i x_j . xi) sum_k h_k(x_j) g^_k(-xi)^T`.
///
/// Quantizing the result on `window` agrees with [`crate::quantization::kernel_operator`]
/// on every field band-limited to `window`.
pub fn decomposition_to_symbol(dec: &NuclearDecomposition, window: &FrequencyWindow) -> Result<SymbolTable> {
    let grid = dec.grid();
    grid.require_resolves(window)?;
    let ghats = dec
        .terms
        .iter()
        .map(|(_, g)| forward_vft(g, window))
        .collect::<Result<Vec<_>>>()?;
    let freqs: Vec<Vec<i64>> = window.iter().collect();
    let neg: Vec<usize> = freqs
        .iter()
        .map(|xi| {
            let m: Vec<i64> = xi.iter().map(|v| -v).collect();
            window.index_of(&m).expect("windows are symmetric")
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len() * window.len());
    for j in 0..grid.len() {
        for (w, xi) in freqs.iter().enumerate() {
            let mut m = CMatrix::zeros(dec.d_out, dec.d_in);
            for ((h, _), ghat) in dec.terms.iter().zip(&ghats) {
                let hv = h.sample(j);
                let gv = ghat.value(neg[w]);
                for (a, ha) in hv.iter().enumerate() {
                    for (b, gb) in gv.iter().enumerate() {
                        m[(a, b)] += ha * gb;
                    }
                }
            }
            values.push(m * grid.character(j, xi, -1.0));
        }
    }
    SymbolTable::full(grid.clone(), window.clone(), dec.d_out, dec.d_in, values, TailSpec::Zero)
}

/// Largest value over the table of `|sigma(x_j, xi)|_{S_1} - sum_k |h_k(x_j)| |g^_k(-xi)|`.
/// Non-positive up to rounding.
pub fn pointwise_schatten_slack(dec: &NuclearDecomposition, window: &FrequencyWindow) -> Result<f64> {
    let sigma = decomposition_to_symbol(dec, window)?;
    let ghats = dec
        .terms
        .iter()
        .map(|(_, g)| forward_vft(g, window))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = f64::NEG_INFINITY;
    for j in 0..dec.grid.len() {
        for (w, xi) in window.iter().enumerate() {
            let m: Vec<i64> = xi.iter().map(|v| -v).collect();
            let nw = window.index_of(&m).expect("windows are symmetric");
            let bound: f64 = dec
                .terms
                .iter()
                .zip(&ghats)
                .map(|((h, _), gh)| fiber_norm(h.sample(j)) * fiber_norm(gh.value(nw)))
                .sum();
            worst = worst.max(schatten_norm(sigma.value(j, w), 1.0)? - bound);
        }
    }
    Ok(worst)
}

/// Upper bounds for the decay norm of a decomposition symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub p_prime: f64,
    /// `sum_k |h_k|_{L^{p'}} |g^_k|_{l^{p'}(window)}`.
    pub minkowski: f64,
    /// `sum_k |h_k|_{L^{p'}} |g_k|_{L^p}`, which dominates `minkowski`.
    pub hausdorff_young: f64,
}

pub fn decay_bound(dec: &NuclearDecomposition, window: &FrequencyWindow, p_prime: f64) -> Result<DecayBound> {
    super::check_p_prime(p_prime)?;
    let p = p_prime / (p_prime - 1.0);
    let mut minkowski = 0.0;
    let mut hausdorff_young = 0.0;
    for (h, g) in &dec.terms {
        let hn = lp_norm(h, p_prime)?;
        let gh = forward_vft(g, window)?;
        let seq: f64 = (0..window.len()).map(|w| fiber_norm(gh.value(w)).powf(p_prime)).sum();
        minkowski += hn * seq.powf(1.0 / p_prime);
        hausdorff_young += hn * lp_norm(g, p)?;
    }
    Ok(DecayBound { p_prime, minkowski, hausdorff_young })
}

/// Lattice-side decomposition with finitely supported `h_k` and `g_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDecomposition {
    h_support: LatticeBox,
    g_support: LatticeBox,
    d_out: usize,
    d_in: usize,
    terms: Vec<(LatticeField, LatticeField)>,
    p: f64,
    s: f64,
    nuclear_sum: f64,
}

impl DiscreteDecomposition {
    pub fn new(
        h_support: LatticeBox,
        g_support: LatticeBox,
        d_out: usize,
        d_in: usize,
        terms: Vec<(LatticeField, LatticeField)>,
        p: f64,
        s: f64,
    ) -> Result<Self> {
        super::check_s(s)?;
        let p_prime = dual_exponent(p)?;
        if h_support.dim() != g_support.dim() {
            return Err(Error::Dimension("h and g supports differ in dimension".into()));
        }
        let mut nuclear_sum = 0.0;
        for (k, (h, g)) in terms.iter().enumerate() {
            if h.support() != &h_support || g.support() != &g_support || h.fiber() != d_out || g.fiber() != d_in {
                return Err(Error::Shape(format!("term {k} does not match the declared supports or fibers")));
            }
            nuclear_sum += (discrete_lp_norm(h, p_prime)? * discrete_lp_norm(g, p)?).powf(s);
        }
        Ok(Self { h_support, g_support, d_out, d_in, terms, p, s, nuclear_sum })
    }

    pub fn h_support(&self) -> &LatticeBox {
        &self.h_support
    }

    pub fn g_support(&self) -> &LatticeBox {
        &self.g_support
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn terms(&self) -> &[(LatticeField, LatticeField)] {
        &self.terms
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn nuclear_sum(&self) -> f64 {
        self.nuclear_sum
    }
}

#[allow(clippy::too_many_arguments)]
pub fn random_discrete_decomposition(
    dim: usize,
    h_radius: usize,
    g_radius: usize,
    d_out: usize,
    d_in: usize,
    terms: usize,
    p: f64,
    s: f64,
    seed: u64,
) -> Result<DiscreteDecomposition> {
    let hb = LatticeBox::new(dim, h_radius)?;
    let gb = LatticeBox::new(dim, g_radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(terms);
    for k in 0..terms {
        let scale = C64::new(1.0 / ((k + 1) * (k + 1)) as f64, 0.0);
        let h = gaussian_matrix(&mut rng, hb.len() * d_out, 1) * scale;
        let g = gaussian_matrix(&mut rng, gb.len() * d_in, 1);
        out.push((
            LatticeField::new(hb.clone(), d_out, h.as_slice().to_vec())?,
            LatticeField::new(gb.clone(), d_in, g.as_slice().to_vec())?,
        ));
    }
    DiscreteDecomposition::new(hb, gb, d_out, d_in, out, p, s)
}

/// `a(x, xi) = exp(-2 pi i x . xi) sum_k h_k(x) (F g_k)(-xi)^T`, stored by its
/// Fourier coefficients `a^(x, y - x) = sum_k h_k(x) g_k(y)^T`.
pub fn discrete_decomposition_to_symbol(dec: &DiscreteDecomposition) -> Result<DiscreteSymbol> {
    let dual = FrequencyWindow::new(dec.h_support.dim(), dec.h_support.radius() + dec.g_support.radius())?;
    let mut coeffs = vec![CMatrix::zeros(dec.d_out, dec.d_in); dec.h_support.len() * dual.len()];
    for (site, x) in dec.h_support.iter().enumerate() {
        for (gi, y) in dec.g_support.iter().enumerate() {
            let k: Vec<i64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let ki = dual.index_of(&k).expect("offset lies in the dual window");
            let block = &mut coeffs[site * dual.len() + ki];
            for (h, g) in &dec.terms {
                for (a, ha) in h.value(site).iter().enumerate() {
                    for (b, gb) in g.value(gi).iter().enumerate() {
                        block[(a, b)] += ha * gb;
                    }
                }
            }
        }
    }
    DiscreteSymbol::new(dec.h_support.clone(), dual, dec.d_out, dec.d_in, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::inverse_vft;
    use crate::lattice::FourierCoefficients;
    use crate::nuclearity::decay_norm;
    use crate::quantization::{apply_discrete, apply_periodic, discrete_kernel_operator, kernel_operator};

    #[test]
    fn single_character_term() {
        // h = e^{2 pi i x xi0} u, g = e^{-2 pi i x xi0} w: sigma(x, xi) = u w^T at xi = xi0 only
        let grid = TorusGrid::new(1, 9).unwrap();
        let window = FrequencyWindow::new(1, 2).unwrap();
        let u = [C64::new(1.0, 2.0), C64::new(0.0, -1.0)];
        let w = [C64::new(3.0, 0.0)];
        let h = VectorField::from_fn(grid.clone(), 2, |x| {
            let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * x[0]);
            u.iter().map(|v| v * e).collect()
        })
        .unwrap();
        let g = VectorField::from_fn(grid.clone(), 1, |x| {
            vec![w[0] * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * x[0])]
        })
        .unwrap();
        let dec = NuclearDecomposition::new(grid.clone(), 2, 1, vec![(h, g)], 2.0, 1.0).unwrap();
        let sigma = decomposition_to_symbol(&dec, &window).unwrap();
        for j in 0..grid.len() {
            for (wi, xi) in window.iter().enumerate() {
                let v = sigma.value(j, wi);
                for a in 0..2 {
                    let expect = if xi[0] == 1 { u[a] * w[0] } else { C64::new(0.0, 0.0) };
                    assert!((v[(a, 0)] - expect).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn empty_decomposition_is_zero() {
        let grid = TorusGrid::new(2, 5).unwrap();
        let window = FrequencyWindow::new(2, 1).unwrap();
        let dec = NuclearDecomposition::new(grid, 2, 3, vec![], 2.0, 0.5).unwrap();
        let sigma = decomposition_to_symbol(&dec, &window).unwrap();
        assert!(sigma.values().iter().all(|m| m.iter().all(|v| *v == C64::new(0.0, 0.0))));
        assert_eq!(dec.nuclear_sum(), 0.0);
        let dd = random_discrete_decomposition(1, 1, 1, 1, 1, 0, 2.0, 1.0, 0).unwrap();
        let a = discrete_decomposition_to_symbol(&dd).unwrap();
        assert!((0..a.sites().len()).all(|x| (0..a.dual().len()).all(|k| a.coefficient(x, k).iter().all(|v| v.norm() == 0.0))));
    }

    #[test]
    fn periodic_roundtrip() {
        let window = FrequencyWindow::new(1, 3).unwrap();
        let grid = TorusGrid::new(1, 13).unwrap();
        let dec = random_decomposition(&grid, 2, 3, 4, 2.0, 1.0, 7).unwrap();
        let sigma = decomposition_to_symbol(&dec, &window).unwrap();
        let c = gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(1), window.len() * 3, 1);
        let f = inverse_vft(&FourierCoefficients::new(window.clone(), 3, c.as_slice().to_vec()).unwrap(), &grid).unwrap();
        let a = apply_periodic(&sigma, &f).unwrap();
        let b = kernel_operator(&dec, &f).unwrap();
        let err = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        assert!(pointwise_schatten_slack(&dec, &window).unwrap() < 1e-12);
    }

    #[test]
    fn discrete_roundtrip_and_delta() {
        let dec = random_discrete_decomposition(2, 1, 2, 2, 2, 3, 2.0, 1.0, 11).unwrap();
        let a = discrete_decomposition_to_symbol(&dec).unwrap();
        let f = LatticeField::new(
            dec.g_support().clone(),
            2,
            (0..dec.g_support().len() * 2).map(|i| C64::new((i as f64).cos(), 0.1 * i as f64)).collect(),
        )
        .unwrap();
        let x = apply_discrete(&a, &f).unwrap();
        let y = discrete_kernel_operator(&dec, &f).unwrap();
        let err = x.data().iter().zip(y.data()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");

        // g = delta at y0: kernel output is h(x) times f(y0)
        let hb = LatticeBox::new(1, 1).unwrap();
        let gb = LatticeBox::new(1, 2).unwrap();
        let h = LatticeField::new(hb.clone(), 1, vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let mut gd = vec![C64::new(0.0, 0.0); gb.len()];
        gd[gb.index_of(&[2]).unwrap()] = C64::new(1.0, 0.0);
        let g = LatticeField::new(gb.clone(), 1, gd).unwrap();
        let dec = DiscreteDecomposition::new(hb.clone(), gb.clone(), 1, 1, vec![(h.clone(), g)], 2.0, 1.0).unwrap();
        let a = discrete_decomposition_to_symbol(&dec).unwrap();
        let f = LatticeField::new(gb.clone(), 1, (0..5).map(|i| C64::new(i as f64 + 1.0, 0.0)).collect()).unwrap();
        let out = apply_discrete(&a, &f).unwrap();
        for i in 0..hb.len() {
            assert!((out.value(i)[0] - h.value(i)[0] * 5.0).norm() < 1e-12);
        }
    }

    #[test]
    fn decay_bounds_hold() {
        let window = FrequencyWindow::new(1, 4).unwrap();
        let grid = TorusGrid::new(1, 17).unwrap();
        let dec = random_decomposition(&grid, 2, 2, 3, 2.0, 1.0, 3).unwrap();
        let sigma = decomposition_to_symbol(&dec, &window).unwrap();
        for p_prime in [2.5, 4.0] {
            let n = decay_norm(&sigma, p_prime).unwrap().norm;
            let b = decay_bound(&dec, &window, p_prime).unwrap();
            assert!(b.minkowski - n >= -1e-12);
            assert!(b.hausdorff_young - b.minkowski >= -1e-12);
        }
        assert!(decay_bound(&dec, &window, 1.5).is_err());
    }

    #[test]
    fn exponent_validation() {
        let grid = TorusGrid::new(1, 5).unwrap();
        assert!(random_decomposition(&grid, 1, 1, 1, 1.0, 1.0, 0).is_err());
        assert!(random_decomposition(&grid, 1, 1, 1, 2.0, 0.0, 0).is_err());
        assert!(random_decomposition(&grid, 1, 1, 1, 3.0, 2.0 / 3.0, 0).is_ok());
    }
}
