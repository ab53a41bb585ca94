// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Config-driven experiment runner behind the `torpsido` binary.
//!
//! A run validates the whole config, computes, and writes a JSON report that
//! embeds the resolved config. Reports carry no timestamps, so reruns with the
//! same config and seed are byte-identical.

mod commands;
mod config;

pub use config::{
    BisymbolConfig, Command, DecompositionConfig, ExperimentConfig, Exponents, HeatConfig, OutputConfig, Tolerances,
};

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{make_family, FamilySpec, TailSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;

/// Largest assembled dimension `W * d` accepted by commands that assemble.
pub const MAX_ASSEMBLED_DIM: usize = 4000;

/// A named validation failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// One numerical invariant checked by a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    /// Passes when `value >= -tolerance`.
    pub fn nonnegative(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value >= -tolerance }
    }

    pub fn exact(name: &str, left: i64, right: i64) -> Self {
        Self { name: name.into(), value: (left - right).abs() as f64, tolerance: 0.0, passed: left == right }
    }
}

/// A CSV table for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub config: ExperimentConfig,
    pub result: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub tables: Vec<Table>,
    /// Extra files as `(relative path, bytes)`.
    #[serde(skip)]
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn diag(out: &mut Vec<Diagnostic>, field: &str, message: impl Into<String>) {
    out.push(Diagnostic { field: field.into(), message: message.into() });
}

fn needs_family(c: Command) -> bool {
    !matches!(c, Command::Decay | Command::DecomposeRoundtrip | Command::HoermanderExperiment)
}

fn needs_multiplier(c: Command) -> bool {
    matches!(c, Command::Spectrum | Command::HeatTrace | Command::Index | Command::Ellipticity)
}

fn needs_square(c: Command) -> bool {
    matches!(c, Command::Trace | Command::Spectrum | Command::Ellipticity)
}

fn assembles(c: Command) -> bool {
    matches!(
        c,
        Command::Quantize | Command::Assemble | Command::Trace | Command::Spectrum | Command::HeatTrace | Command::Index
    )
}

fn check_t_grid(out: &mut Vec<Diagnostic>, field: &str, grid: &[f64], min_points: usize, min_decades: f64) {
    if grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        diag(out, field, "every time must be positive and finite");
        return;
    }
    if grid.len() < min_points {
        diag(out, field, format!("needs at least {min_points} points, got {}", grid.len()));
        return;
    }
    if min_decades > 0.0 {
        let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = grid.iter().copied().fold(0.0, f64::max);
        if (hi / lo).log10() < min_decades - 1e-12 {
            diag(out, field, format!("must span at least {min_decades} decades, spans [{lo}, {hi}]"));
        }
    }
}

/// Audit every precondition of `command` without running it. An empty
/// result means the run can start.
pub fn validate(command: Command, cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let d = &mut out;
    if cfg.n == 0 {
        diag(d, "n", "torus dimension must be at least 1");
    }
    if cfg.d_out == 0 || cfg.d_in == 0 {
        diag(d, "d_out/d_in", "fiber dimensions must be at least 1");
    }
    let side = 2 * cfg.radius + 1;
    let m = cfg.resolved_grid_size();
    if m < side {
        diag(d, "grid_size", format!("M = {m} cannot resolve the window: need M >= 2N+1 = {side}"));
    }
    let x_dependent = cfg.family.as_ref().is_some_and(FamilySpec::is_x_dependent);
    let needs_fine = (x_dependent && assembles(command)) || command == Command::DecomposeRoundtrip;
    if needs_fine && m < 4 * cfg.radius + 1 {
        diag(d, "grid_size", format!("M = {m} is too coarse for x-dependent assembly: need M >= 4N+1 = {}", 4 * cfg.radius + 1));
    }
    if assembles(command) && cfg.n > 0 {
        let w = side.pow(cfg.n as u32);
        let dim = w * cfg.d_out.max(cfg.d_in);
        if dim > MAX_ASSEMBLED_DIM {
            diag(d, "radius", format!("assembled dimension W*d = {dim} exceeds {MAX_ASSEMBLED_DIM}"));
        }
    }
    if needs_family(command) {
        match &cfg.family {
            None => diag(d, "family", format!("command {command} needs a symbol family")),
            Some(f) => {
                if needs_multiplier(command) && f.is_x_dependent() {
                    diag(d, "family", format!("command {command} needs an x-independent multiplier, {} is x-dependent", f.name()));
                }
            }
        }
    }
    if needs_square(command) && cfg.d_out != cfg.d_in {
        diag(d, "d_out/d_in", format!("command {command} needs square fibers, got {}x{}", cfg.d_out, cfg.d_in));
    }
    if command == Command::Index {
        match cfg.effective_tail() {
            Some(TailSpec::Undeclared) => diag(d, "tail", "index refused: tail behaviour is undeclared"),
            Some(TailSpec::Zero) => diag(d, "tail", "index refused: a vanishing tail is not Fredholm"),
            _ => {}
        }
    }
    let e = &cfg.exponents;
    if !(e.s > 0.0 && e.s <= 1.0) {
        diag(d, "exponents.s", format!("s must lie in (0, 1], got {}", e.s));
    }
    if !(e.p > 1.0) || !e.p.is_finite() {
        diag(d, "exponents.p", format!("p must lie in (1, inf), got {}", e.p));
    }
    if !(e.p2 >= 1.0) || !e.p2.is_finite() {
        diag(d, "exponents.p2", format!("p2 must lie in [1, inf), got {}", e.p2));
    }
    if matches!(command, Command::Nuclearity | Command::Decay) {
        if e.p_prime.is_empty() {
            diag(d, "exponents.p_prime", "at least one decay exponent is needed");
        }
        for p in &e.p_prime {
            if !(*p >= 2.0) || !p.is_finite() {
                diag(d, "exponents.p_prime", format!("decay exponents must lie in [2, inf), got {p}"));
            }
        }
    }
    match command {
        Command::HeatTrace => check_t_grid(d, "heat.t_values", &cfg.heat.t_values, 1, 0.0),
        Command::Index | Command::HoermanderExperiment => check_t_grid(d, "heat.t_grid", &cfg.heat.t_grid, 3, 2.0),
        Command::Ellipticity => {
            if let Some(g) = &cfg.heat.ellipticity_grid {
                check_t_grid(d, "heat.ellipticity_grid", g, 1, 0.0);
            }
            if !cfg.heat.ellipticity_order.is_finite() {
                diag(d, "heat.ellipticity_order", "must be finite");
            }
        }
        _ => {}
    }
    let t = &cfg.tolerances;
    for (name, v) in [
        ("tolerances.rank", t.rank),
        ("tolerances.oracle", t.oracle),
        ("tolerances.trace", t.trace),
        ("tolerances.spectrum", t.spectrum),
        ("tolerances.heat_index", t.heat_index),
        ("tolerances.heat_trace", t.heat_trace),
        ("tolerances.resolvent", t.resolvent),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            diag(d, name, format!("tolerance must be positive, got {v}"));
        }
    }
    if !(t.decay_slack >= 0.0) {
        diag(d, "tolerances.decay_slack", "must be nonnegative");
    }
    if let Some([re, im]) = cfg.lambda {
        if !re.is_finite() || !im.is_finite() {
            diag(d, "lambda", "must be finite");
        }
    }
    if command == Command::HoermanderExperiment {
        match &cfg.bisymbol {
            None => diag(d, "bisymbol", "hoermander-experiment needs a bisymbol"),
            Some(b) => {
                if b.m == 0 {
                    diag(d, "bisymbol.m", "must be at least 1");
                }
                if b.xi_radius == 0 && b.eta_radius == 0 {
                    diag(d, "bisymbol", "windows need a positive radius");
                }
                if b.y_size() < 2 * b.eta_radius + 1 {
                    diag(
                        d,
                        "bisymbol.y_size",
                        format!("M_y = {} too coarse: need M_y >= 2N_eta+1 = {}", b.y_size(), 2 * b.eta_radius + 1),
                    );
                }
            }
        }
    }
    if out.is_empty() && needs_family(command) {
        if let Some(f) = &cfg.family {
            if let Err(e) = make_family(f, &cfg.frame()) {
                diag(&mut out, "family", e.to_string());
            }
        }
    }
    out
}

/// Validate and compute, without touching the file system.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> std::result::Result<Report, RunError> {
    let diagnostics = validate(command, cfg);
    if !diagnostics.is_empty() {
        return Err(RunError::Validation(diagnostics));
    }
    let (result, checks, tables, artifacts) = commands::dispatch(command, cfg).map_err(RunError::from_error)?;
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { command, config: cfg.clone(), result, checks, passed, tables, artifacts })
}

/// Why a run did not produce a passing report.
#[derive(Debug)]
pub enum RunError {
    Validation(Vec<Diagnostic>),
    /// A numerical precondition or contract failed during computation.
    Contract(Error),
    Io(Error),
}

impl RunError {
    fn from_error(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) | Error::Format(_) => RunError::Io(e),
            Error::Dimension(_) | Error::Shape(_) | Error::Domain(_) | Error::Family(_) | Error::Unsupported(_) => {
                RunError::Validation(vec![Diagnostic { field: "config".into(), message: e.to_string() }])
            }
            _ => RunError::Contract(e),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Contract(_) => EXIT_CONTRACT,
            RunError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Validation(ds) => {
                write!(f, "validation failed:")?;
                for d in ds {
                    write!(f, "\n  {d}")?;
                }
                Ok(())
            }
            RunError::Contract(e) => write!(f, "numerical contract failed: {e}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

/// Result of [`run`]: exit code, report (when computed) and lines for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Option<Report>,
    pub messages: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// Write CSV tables into `dir`; returns the files written.
pub fn emit_tables(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for t in &report.tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv())?;
        out.push(path);
    }
    Ok(out)
}

fn write_outputs(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join(&report.config.output.report);
    fs::write(&path, report.to_json()?)?;
    written.push(path);
    if report.config.output.tables {
        written.extend(emit_tables(report, dir)?);
    }
    if report.config.output.artifacts {
        for (name, bytes) in &report.artifacts {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, bytes)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Validate, compute and write outputs into `out_dir`.
///
/// Exit codes: 0 success, 1 I/O, 2 validation, 3 numerical contract.
pub fn run(command: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Outcome {
    match execute(command, cfg) {
        Err(e) => Outcome { exit_code: e.exit_code(), report: None, messages: vec![e.to_string()], written: Vec::new() },
        Ok(report) => {
            let mut messages: Vec<String> = report
                .failed_checks()
                .map(|c| format!("invariant '{}' failed: value {:e} exceeds tolerance {:e}", c.name, c.value, c.tolerance))
                .collect();
            let (exit_code, written) = match write_outputs(&report, out_dir) {
                Ok(w) => (if report.passed { EXIT_OK } else { EXIT_CONTRACT }, w),
                Err(e) => {
                    messages.push(e.to_string());
                    (EXIT_IO, Vec::new())
                }
            };
            Outcome { exit_code, report: Some(report), messages, written }
        }
    }
}
