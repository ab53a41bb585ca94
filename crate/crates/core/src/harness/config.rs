// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::DEFAULT_MS_GRID;
use crate::symbol::{BisymbolKind, FamilyFrame, FamilySpec, TailSpec};

/// Experiment commands understood by [`super::run`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Quantize,
    Assemble,
    Trace,
    Nuclearity,
    Decay,
    DecomposeRoundtrip,
    Spectrum,
    HeatTrace,
    Index,
    Ellipticity,
    HoermanderExperiment,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Quantize,
        Command::Assemble,
        Command::Trace,
        Command::Nuclearity,
        Command::Decay,
        Command::DecomposeRoundtrip,
        Command::Spectrum,
        Command::HeatTrace,
        Command::Index,
        Command::Ellipticity,
        Command::HoermanderExperiment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Quantize => "quantize",
            Command::Assemble => "assemble",
            Command::Trace => "trace",
            Command::Nuclearity => "nuclearity",
            Command::Decay => "decay",
            Command::DecomposeRoundtrip => "decompose-roundtrip",
            Command::Spectrum => "spectrum",
            Command::HeatTrace => "heat-trace",
            Command::Index => "index",
            Command::Ellipticity => "ellipticity",
            Command::HoermanderExperiment => "hoermander-experiment",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown command '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Exponents {
    /// Summability exponent `s` in `(0, 1]`.
    pub s: f64,
    /// Source-side Lebesgue exponent for decompositions.
    pub p: f64,
    /// Inner `L^{p2}` exponent of the summability check.
    pub p2: f64,
    /// Decay exponents `p'`.
    pub p_prime: Vec<f64>,
}

impl Default for Exponents {
    fn default() -> Self {
        Self { s: 1.0, p: 2.0, p2: 2.0, p_prime: vec![2.5, 4.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatConfig {
    /// Times for `heat-trace`.
    pub t_values: Vec<f64>,
    /// McKean-Singer grid for index computations.
    pub t_grid: Vec<f64>,
    /// Grid for ellipticity rates; 16 log-spaced points in `[1e-3, 1e2]` when absent.
    pub ellipticity_grid: Option<Vec<f64>>,
    /// Exponent `m` of the ellipticity scale.
    pub ellipticity_order: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            t_values: vec![0.1, 1.0, 10.0],
            t_grid: DEFAULT_MS_GRID.to_vec(),
            ellipticity_grid: None,
            ellipticity_order: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative rank threshold.
    pub rank: f64,
    /// Cross-path agreement of quantization and roundtrips.
    pub oracle: f64,
    /// Trace formula against the assembled matrix.
    pub trace: f64,
    /// Spectrum union distance.
    pub spectrum: f64,
    /// McKean-Singer values against the integer index.
    pub heat_index: f64,
    /// Heat-trace sums, relative.
    pub heat_trace: f64,
    /// Allowed negative slack in the decay bound.
    pub decay_slack: f64,
    /// Resolvent invertibility threshold, relative to `|lambda - sigma|_op`.
    pub resolvent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-9,
            oracle: 1e-11,
            trace: 1e-11,
            spectrum: 1e-9,
            heat_index: 1e-8,
            heat_trace: 1e-10,
            decay_slack: 1e-12,
            resolvent: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecompositionConfig {
    /// Number of tensor terms `K`.
    pub terms: usize,
    /// Lattice support radius of the `h_k`.
    pub h_radius: usize,
    /// Lattice support radius of the `g_k`.
    pub g_radius: usize,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self { terms: 4, h_radius: 2, g_radius: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisymbolConfig {
    /// Which built-in bisymbol, e.g. `{"kind": "bracket"}`.
    pub symbol: BisymbolKind,
    #[serde(default = "one")]
    pub m: usize,
    pub xi_radius: usize,
    pub eta_radius: usize,
    /// Samples per axis of the `y`-grid; defaults to `2 eta_radius + 2`.
    #[serde(default)]
    pub y_size: Option<usize>,
    #[serde(default = "one_f")]
    pub order: f64,
    #[serde(default = "one_f")]
    pub rho: f64,
    #[serde(default)]
    pub delta: f64,
}

impl BisymbolConfig {
    pub fn y_size(&self) -> usize {
        self.y_size.unwrap_or(2 * self.eta_radius + 2)
    }
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// File name of the JSON report inside the output directory.
    pub report: String,
    /// Write CSV tables next to the report.
    pub tables: bool,
    /// Write binary containers and Matrix Market files.
    pub artifacts: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { report: "report.json".into(), tables: true, artifacts: false }
    }
}

/// A complete, self-describing experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Torus dimension.
    #[serde(default = "one")]
    pub n: usize,
    /// Frequency window radius `N`.
    pub radius: usize,
    /// Samples per axis `M` for x-dependent symbols and test fields.
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default = "one")]
    pub d_out: usize,
    #[serde(default = "one")]
    pub d_in: usize,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    /// Replaces the tail declared by the family.
    #[serde(default)]
    pub tail: Option<TailSpec>,
    /// Seed for random test inputs; `--seed` also replaces the family seed.
    #[serde(default)]
    pub seed: u64,
    /// Spectral parameter `[re, im]` whose resolvent `spectrum` also computes.
    #[serde(default)]
    pub lambda: Option<[f64; 2]>,
    #[serde(default)]
    pub exponents: Exponents,
    #[serde(default)]
    pub heat: HeatConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub decomposition: DecompositionConfig,
    #[serde(default)]
    pub bisymbol: Option<BisymbolConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Apply a command-line seed to the config and to a seeded family.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.family = self.family.map(|f| f.with_seed(seed));
        self
    }

    /// Grid size actually used: the configured `M` or `4N + 1`.
    pub fn resolved_grid_size(&self) -> usize {
        self.grid_size.unwrap_or(4 * self.radius + 1)
    }

    pub fn frame(&self) -> FamilyFrame {
        FamilyFrame {
            n: self.n,
            radius: self.radius,
            d_out: self.d_out,
            d_in: self.d_in,
            grid_size: Some(self.resolved_grid_size()),
        }
    }

    /// Tail the symbol will carry once built.
    pub fn effective_tail(&self) -> Option<TailSpec> {
        if self.tail.is_some() {
            return self.tail;
        }
        self.family.as_ref().map(|f| match f {
            FamilySpec::Identity | FamilySpec::Bessel { .. } => TailSpec::InvertibleIdentityLike,
            FamilySpec::Diagonal { tail, .. } => *tail,
            FamilySpec::Random { .. } | FamilySpec::TensorKernel { .. } => TailSpec::Zero,
            FamilySpec::Rectangular { .. } => TailSpec::FiniteModel,
        })
    }
}
