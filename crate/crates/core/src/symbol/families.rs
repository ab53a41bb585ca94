// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Built-in symbol families used by tests, the CLI and the Python bindings.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SymbolTable, TailSpec};
use crate::error::{Error, Result};
use crate::lattice::{japanese_bracket, FrequencyWindow, TorusGrid, C64};
use crate::linalg::{gaussian_matrix, CMatrix};
use crate::nuclearity::{decomposition_to_symbol, random_decomposition};

/// Geometry shared by every family: torus dimension, window radius, fibers
/// and (for x-dependent families) the grid size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFrame {
    pub n: usize,
    pub radius: usize,
    pub d_out: usize,
    pub d_in: usize,
    /// Samples per axis for x-dependent families; defaults to `4N + 1`.
    pub grid_size: Option<usize>,
}

impl FamilyFrame {
    pub fn square(n: usize, radius: usize, d: usize) -> Self {
        Self { n, radius, d_out: d, d_in: d, grid_size: None }
    }

    pub fn window(&self) -> Result<FrequencyWindow> {
        FrequencyWindow::new(self.n, self.radius)
    }

    /// Grid for x-dependent families.
    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n, self.grid_size.unwrap_or(4 * self.radius + 1))
    }
}

/// A named family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `sigma(xi) = I`.
    Identity,
    /// `sigma(xi) = <xi>^order I`.
    Bessel { order: f64 },
    /// Diagonal multiplier with prescribed eigenvalues `[re, im]`: one row of
    /// `d` values per window frequency, or a single row used everywhere.
    Diagonal {
        eigenvalues: Vec<Vec<[f64; 2]>>,
        #[serde(default = "default_tail")]
        tail: TailSpec,
    },
    /// Complex Gaussian blocks under the envelope `<xi>^-decay`; x-dependent
    /// with x-frequencies `|k|_inf <= x_modes` when `x_modes` is given.
    Random {
        decay: f64,
        seed: u64,
        #[serde(default)]
        x_modes: Option<usize>,
    },
    /// Full-rank rectangular Gaussian multiplier, modelled as a finite direct sum.
    Rectangular { decay: f64, seed: u64 },
    /// Symbol of a random finite tensor-kernel decomposition.
    TensorKernel { terms: usize, seed: u64 },
}

fn default_tail() -> TailSpec {
    TailSpec::InvertibleIdentityLike
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Identity => "identity",
            FamilySpec::Bessel { .. } => "bessel",
            FamilySpec::Diagonal { .. } => "diagonal",
            FamilySpec::Random { .. } => "random",
            FamilySpec::Rectangular { .. } => "rectangular",
            FamilySpec::TensorKernel { .. } => "tensor_kernel",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            FamilySpec::Random { seed, .. }
            | FamilySpec::Rectangular { seed, .. }
            | FamilySpec::TensorKernel { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Replace the seed of a random family; deterministic families are unchanged.
    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            FamilySpec::Random { seed, .. }
            | FamilySpec::Rectangular { seed, .. }
            | FamilySpec::TensorKernel { seed, .. } => *seed = new_seed,
            _ => {}
        }
        self
    }

    pub fn is_x_dependent(&self) -> bool {
        matches!(
            self,
            FamilySpec::Random { x_modes: Some(_), .. } | FamilySpec::TensorKernel { .. }
        )
    }
}

fn check_decay(decay: f64) -> Result<()> {
    if !decay.is_finite() || decay < 0.0 {
        return Err(Error::Family(format!("decay exponent must be finite and nonnegative, got {decay}")));
    }
    Ok(())
}

fn require_square(frame: &FamilyFrame, name: &str) -> Result<usize> {
    if frame.d_in != frame.d_out {
        return Err(Error::Family(format!("family {name} needs square fibers")));
    }
    Ok(frame.d_in)
}

/// Build a symbol table from a family description. Random families are
/// bit-reproducible given the seed.
pub fn make_family(spec: &FamilySpec, frame: &FamilyFrame) -> Result<SymbolTable> {
    let window = frame.window()?;
    match spec {
        FamilySpec::Identity => {
            let d = require_square(frame, "identity")?;
            SymbolTable::multiplier_from_fn(window, d, d, TailSpec::InvertibleIdentityLike, |_| CMatrix::identity(d, d))
        }
        FamilySpec::Bessel { order } => {
            let d = require_square(frame, "bessel")?;
            if !order.is_finite() {
                return Err(Error::Family("bessel order must be finite".into()));
            }
            SymbolTable::multiplier_from_fn(window, d, d, TailSpec::InvertibleIdentityLike, |xi| {
                CMatrix::identity(d, d) * C64::new(japanese_bracket(xi).powf(*order), 0.0)
            })
        }
        FamilySpec::Diagonal { eigenvalues, tail } => {
            let d = require_square(frame, "diagonal")?;
            if eigenvalues.len() != 1 && eigenvalues.len() != window.len() {
                return Err(Error::Family(format!(
                    "diagonal family needs 1 or {} rows of eigenvalues, got {}",
                    window.len(),
                    eigenvalues.len()
                )));
            }
            if let Some(row) = eigenvalues.iter().find(|r| r.len() != d) {
                return Err(Error::Family(format!("eigenvalue row has length {}, expected {d}", row.len())));
            }
            let values = (0..window.len())
                .map(|w| {
                    let row = if eigenvalues.len() == 1 { &eigenvalues[0] } else { &eigenvalues[w] };
                    let mut m = CMatrix::zeros(d, d);
                    for (a, v) in row.iter().enumerate() {
                        m[(a, a)] = C64::new(v[0], v[1]);
                    }
                    m
                })
                .collect();
            SymbolTable::multiplier(window, d, d, values, *tail)
        }
        FamilySpec::Random { decay, seed, x_modes } => {
            check_decay(*decay)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let (d_out, d_in) = (frame.d_out, frame.d_in);
            match x_modes {
                None => SymbolTable::multiplier_from_fn(window, d_out, d_in, TailSpec::Zero, |xi| {
                    gaussian_matrix(&mut rng, d_out, d_in) * C64::new(japanese_bracket(xi).powf(-decay), 0.0)
                }),
                Some(k) => {
                    let grid = frame.grid()?;
                    if grid.size() < 2 * k + 1 {
                        return Err(Error::Family(format!(
                            "grid with M = {} cannot carry x-modes up to {k}",
                            grid.size()
                        )));
                    }
                    let modes = FrequencyWindow::new(frame.n, *k)?;
                    let norm = 1.0 / (modes.len() as f64).sqrt();
                    let coeffs: Vec<Vec<CMatrix>> = window
                        .iter()
                        .map(|xi| {
                            let env = C64::new(japanese_bracket(&xi).powf(-decay) * norm, 0.0);
                            (0..modes.len()).map(|_| gaussian_matrix(&mut rng, d_out, d_in) * env).collect()
                        })
                        .collect();
                    let mut values = Vec::with_capacity(grid.len() * window.len());
                    for j in 0..grid.len() {
                        for row in &coeffs {
                            let mut m = CMatrix::zeros(d_out, d_in);
                            for (q, mode) in modes.iter().enumerate() {
                                m += &row[q] * grid.character(j, &mode, 1.0);
                            }
                            values.push(m);
                        }
                    }
                    SymbolTable::full(grid, window, d_out, d_in, values, TailSpec::Zero)
                }
            }
        }
        FamilySpec::Rectangular { decay, seed } => {
            check_decay(*decay)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let (d_out, d_in) = (frame.d_out, frame.d_in);
            SymbolTable::multiplier_from_fn(window, d_out, d_in, TailSpec::FiniteModel, |xi| {
                gaussian_matrix(&mut rng, d_out, d_in) * C64::new(japanese_bracket(xi).powf(-decay), 0.0)
            })
        }
        FamilySpec::TensorKernel { terms, seed } => {
            let grid = frame.grid()?;
            let dec = random_decomposition(&grid, frame.d_out, frame.d_in, *terms, 2.0, 1.0, *seed)?;
            decomposition_to_symbol(&dec, &window)
        }
    }
}

/// Name-based entry point: `params` holds the family fields (without `name`).
pub fn make_family_by_name(name: &str, params: &serde_json::Value, frame: &FamilyFrame) -> Result<SymbolTable> {
    let mut obj = match params {
        serde_json::Value::Object(map) => map.clone(),
        serde_json::Value::Null => serde_json::Map::new(),
        other => return Err(Error::Family(format!("family parameters must be an object, got {other}"))),
    };
    const KNOWN: [&str; 6] = ["identity", "bessel", "diagonal", "random", "rectangular", "tensor_kernel"];
    if !KNOWN.contains(&name) {
        return Err(Error::Family(format!("unknown family '{name}'")));
    }
    obj.insert("name".into(), serde_json::Value::String(name.into()));
    let spec: FamilySpec = serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| Error::Family(format!("invalid parameters for family '{name}': {e}")))?;
    make_family(&spec, frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn identity_family() {
        let s = make_family(&FamilySpec::Identity, &FamilyFrame::square(2, 2, 3)).unwrap();
        assert_eq!(s.window().len(), 25);
        for w in 0..25 {
            assert_eq!(s.multiplier_value(w).unwrap(), &CMatrix::identity(3, 3));
        }
    }

    #[test]
    fn bessel_family_value() {
        let s = make_family(&FamilySpec::Bessel { order: 1.0 }, &FamilyFrame::square(1, 3, 2)).unwrap();
        let w = s.window().index_of(&[3]).unwrap();
        let expect = CMatrix::identity(2, 2) * C64::new(10f64.sqrt(), 0.0);
        assert!((s.multiplier_value(w).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn random_family_is_reproducible() {
        let frame = FamilyFrame { n: 2, radius: 2, d_out: 2, d_in: 3, grid_size: None };
        for spec in [
            FamilySpec::Random { decay: 1.5, seed: 42, x_modes: None },
            FamilySpec::Random { decay: 0.5, seed: 42, x_modes: Some(1) },
        ] {
            let a = make_family(&spec, &frame).unwrap();
            let b = make_family(&spec, &frame).unwrap();
            let same = a.values().iter().zip(b.values()).all(|(x, y)| {
                x.iter().zip(y.iter()).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits())
            });
            assert!(same);
            let c = make_family(&spec.clone().with_seed(43), &frame).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn invalid_parameters() {
        let frame = FamilyFrame::square(1, 2, 2);
        assert!(matches!(
            make_family(&FamilySpec::Random { decay: -1.0, seed: 0, x_modes: None }, &frame),
            Err(Error::Family(_))
        ));
        assert!(matches!(
            make_family_by_name("sinusoid", &json!({}), &frame),
            Err(Error::Family(_))
        ));
        assert!(matches!(
            make_family_by_name("bessel", &json!({"order": 1.0, "extra": 2}), &frame),
            Err(Error::Family(_))
        ));
        let s = make_family_by_name("bessel", &json!({"order": 2.0}), &frame).unwrap();
        assert!((s.multiplier_value(4).unwrap()[(0, 0)].re - 5.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_broadcast() {
        let spec = FamilySpec::Diagonal { eigenvalues: vec![vec![[1.0, 0.0], [0.0, 2.0]]], tail: TailSpec::Zero };
        let s = make_family(&spec, &FamilyFrame::square(1, 1, 2)).unwrap();
        assert_eq!(s.tail(), TailSpec::Zero);
        assert_eq!(s.multiplier_value(2).unwrap()[(1, 1)], C64::new(0.0, 2.0));
    }
}
