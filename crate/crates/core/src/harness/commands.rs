// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Check, Command, ExperimentConfig, Table};
use crate::container::{self, Artifact, MatrixMarketLayout};
use crate::error::{Error, Result};
use crate::index::{
    default_ellipticity_grid, heat_trace_sum, mb_ellipticity_report, multiplier_index, periodic_index_experiment,
};
use crate::lattice::{forward_vft, inverse_vft, FourierCoefficients, FrequencyWindow, LatticeField, TorusGrid, VectorField, C64};
use crate::linalg::{self, gaussian_matrix, CMatrix};
use crate::nuclearity::{
    decay_bound, decay_norm, decomposition_to_symbol, discrete_decomposition_to_symbol, nuclear_trace_multiplier,
    nuclear_trace_pdo, pointwise_schatten_slack, random_decomposition, random_discrete_decomposition, summability_check,
    ShellReport,
};
use crate::quantization::{apply_discrete, apply_periodic, assemble_matrix, discrete_kernel_operator, kernel_operator};
use crate::symbol::{hoermander_realize, make_family, resolvent_symbol, ScalarBisymbol, SymbolTable};

pub(super) type Outputs = (Value, Vec<Check>, Vec<Table>, Vec<(String, Vec<u8>)>);

pub(super) fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<Outputs> {
    match command {
        Command::Quantize => quantize(cfg),
        Command::Assemble => assemble(cfg),
        Command::Trace => trace(cfg),
        Command::Nuclearity => nuclearity(cfg),
        Command::Decay => decay(cfg),
        Command::DecomposeRoundtrip => roundtrip(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::HeatTrace => heat_trace(cfg),
        Command::Index => index(cfg),
        Command::Ellipticity => ellipticity(cfg),
        Command::HoermanderExperiment => hoermander(cfg),
    }
}

/// `|a - b| / max(|a|, |b|, 1)`.
fn relative_gap(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn max_relative(a: &[C64], b: &[C64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.norm()).fold(1.0, f64::max);
    diff / scale
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn build_symbol(cfg: &ExperimentConfig) -> Result<SymbolTable> {
    let spec = cfg.family.as_ref().ok_or_else(|| Error::Family("no family configured".into()))?;
    let s = make_family(spec, &cfg.frame())?;
    match cfg.tail {
        Some(t) => s.with_tail(t),
        None => Ok(s),
    }
}

fn window(cfg: &ExperimentConfig) -> Result<FrequencyWindow> {
    FrequencyWindow::new(cfg.n, cfg.radius)
}

fn grid(cfg: &ExperimentConfig) -> Result<TorusGrid> {
    TorusGrid::new(cfg.n, cfg.resolved_grid_size())
}

fn band_limited(window: &FrequencyWindow, grid: &TorusGrid, d: usize, seed: u64) -> Result<VectorField> {
    let c = gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(seed), window.len() * d, 1);
    inverse_vft(&FourierCoefficients::new(window.clone(), d, c.as_slice().to_vec())?, grid)
}

fn coords_header(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|a| format!("{prefix}{a}")).collect()
}

fn table_with_coords(name: &str, prefix: &str, n: usize, rest: &[&str]) -> Table {
    let mut t = Table::new(name, &[]);
    t.header = coords_header(prefix, n);
    t.header.extend(rest.iter().map(|s| s.to_string()));
    t
}

fn coord_row(xi: &[i64], rest: Vec<String>) -> Vec<String> {
    let mut r: Vec<String> = xi.iter().map(|v| v.to_string()).collect();
    r.extend(rest);
    r
}

fn shell_table(name: &str, r: &ShellReport) -> Table {
    let mut t = Table::new(name, &["radius", "count", "partial", "cumulative", "ratio"]);
    for s in &r.shells {
        t.rows.push(vec![
            s.radius.to_string(),
            s.count.to_string(),
            num(s.partial),
            num(s.cumulative),
            s.ratio.map_or_else(String::new, num),
        ]);
    }
    t
}

fn quantize(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let w = window(cfg)?;
    let f = band_limited(&w, &grid(cfg)?, cfg.d_in, cfg.seed)?;
    let out = apply_periodic(&sigma, &f)?;
    let op = assemble_matrix(&sigma)?;
    let via_matrix = op.apply(&forward_vft(&f, &w)?)?;
    let via_fft = forward_vft(&out, &w)?;
    let rel = max_relative(via_fft.data(), via_matrix.data());
    let result = json!({
        "window_len": w.len(),
        "grid_size": out.grid().size(),
        "x_dependent": !sigma.is_multiplier(),
        "relative_difference": rel,
        "output_l2": crate::lattice::lp_norm(&out, 2.0)?,
    });
    let checks = vec![Check::at_most("quantization_matches_assembled", rel, cfg.tolerances.oracle)];
    let artifacts = vec![
        ("input.tpsd".into(), container::encode(&Artifact::VectorField(f))),
        ("output.tpsd".into(), container::encode(&Artifact::VectorField(out))),
        ("symbol.tpsd".into(), container::encode(&Artifact::Symbol(sigma))),
    ];
    Ok((result, checks, Vec::new(), artifacts))
}

fn assemble(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let op = assemble_matrix(&sigma)?;
    let m = op.matrix();
    let result = json!({
        "rows": m.nrows(),
        "cols": m.ncols(),
        "block_diagonal": sigma.is_multiplier(),
        "frobenius_norm": linalg::frobenius_norm(m),
        "operator_norm": linalg::op_norm(m),
    });
    let artifacts = vec![
        ("operator.tpsd".into(), container::encode(&Artifact::Matrix(m.clone()))),
        ("operator.mtx".into(), container::matrix_market(m, MatrixMarketLayout::Coordinate).into_bytes()),
    ];
    Ok((result, Vec::new(), Vec::new(), artifacts))
}

fn trace(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let r = nuclear_trace_pdo(&sigma)?;
    let mut checks = vec![
        Check::at_most("formula_vs_matrix_trace", relative_gap(r.nuclear_trace, r.matrix_trace), cfg.tolerances.trace),
        Check::at_most("formula_vs_eigenvalue_sum", relative_gap(r.nuclear_trace, r.spectral_trace), cfg.tolerances.trace),
    ];
    let mut result = json!({ "pdo": r });
    if sigma.is_multiplier() {
        let rm = nuclear_trace_multiplier(&sigma)?;
        checks.push(Check::at_most(
            "multiplier_vs_pdo",
            relative_gap(rm.nuclear_trace, r.nuclear_trace),
            cfg.tolerances.trace,
        ));
        result["multiplier"] = serde_json::to_value(&rm)?;
    }
    let mut t = table_with_coords("per_frequency", "xi", cfg.n, &["trace_re", "trace_im"]);
    for f in &r.per_frequency {
        t.rows.push(coord_row(&f.frequency, vec![num(f.trace.re), num(f.trace.im)]));
    }
    let artifacts = vec![("trace.txt".into(), r.to_text().into_bytes())];
    Ok((result, checks, vec![t], artifacts))
}

fn nuclearity(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let e = &cfg.exponents;
    let summ = summability_check(&sigma, e.s, e.p2)?;
    let mut tables = vec![shell_table("summability_shells", &summ)];
    let mut decays = Vec::new();
    for &p in &e.p_prime {
        let r = decay_norm(&sigma, p)?;
        tables.push(shell_table(&format!("decay_shells_p{p}"), &r.shells));
        decays.push(r);
    }
    Ok((json!({ "summability": summ, "decay": decays }), Vec::new(), tables, Vec::new()))
}

fn decay(cfg: &ExperimentConfig) -> Result<Outputs> {
    let w = window(cfg)?;
    let e = &cfg.exponents;
    let dec = random_decomposition(&grid(cfg)?, cfg.d_out, cfg.d_in, cfg.decomposition.terms, e.p, e.s, cfg.seed)?;
    let sigma = decomposition_to_symbol(&dec, &w)?;
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    let mut rows = Vec::new();
    for &p in &e.p_prime {
        let norm = decay_norm(&sigma, p)?;
        let bound = decay_bound(&dec, &w, p)?;
        checks.push(Check::nonnegative(&format!("decay_bound_p{p}"), bound.minkowski - norm.norm, cfg.tolerances.decay_slack));
        tables.push(shell_table(&format!("decay_shells_p{p}"), &norm.shells));
        rows.push(json!({ "p_prime": p, "decay_norm": norm.norm, "bound": bound, "verdict": norm.shells.verdict }));
    }
    let slack = pointwise_schatten_slack(&dec, &w)?;
    let scale = dec.terms().len().max(1) as f64;
    checks.push(Check::at_most("pointwise_schatten_one_bound", slack, 1e-12 * scale));
    let mut result = json!({ "terms": dec.len(), "nuclear_sum": dec.nuclear_sum(), "decomposition": rows, "pointwise_slack": slack });
    if cfg.family.is_some() {
        let fam = build_symbol(cfg)?;
        let fam_rows = e
            .p_prime
            .iter()
            .map(|&p| decay_norm(&fam, p))
            .collect::<Result<Vec<_>>>()?;
        result["family"] = serde_json::to_value(fam_rows)?;
    }
    Ok((result, checks, tables, Vec::new()))
}

fn roundtrip(cfg: &ExperimentConfig) -> Result<Outputs> {
    let w = window(cfg)?;
    let g = grid(cfg)?;
    let e = &cfg.exponents;
    let dec = random_decomposition(&g, cfg.d_out, cfg.d_in, cfg.decomposition.terms, e.p, e.s, cfg.seed)?;
    let sigma = decomposition_to_symbol(&dec, &w)?;
    let f = band_limited(&w, &g, cfg.d_in, cfg.seed.wrapping_add(1))?;
    let periodic = max_relative(apply_periodic(&sigma, &f)?.data(), kernel_operator(&dec, &f)?.data());

    let dd = random_discrete_decomposition(
        cfg.n,
        cfg.decomposition.h_radius,
        cfg.decomposition.g_radius,
        cfg.d_out,
        cfg.d_in,
        cfg.decomposition.terms,
        e.p,
        e.s,
        cfg.seed.wrapping_add(2),
    )?;
    let a = discrete_decomposition_to_symbol(&dd)?;
    let lf = gaussian_matrix(&mut ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3)), dd.g_support().len() * cfg.d_in, 1);
    let lf = LatticeField::new(dd.g_support().clone(), cfg.d_in, lf.as_slice().to_vec())?;
    let discrete = max_relative(apply_discrete(&a, &lf)?.data(), discrete_kernel_operator(&dd, &lf)?.data());

    let result = json!({
        "terms": dec.len(),
        "periodic_relative_difference": periodic,
        "discrete_relative_difference": discrete,
        "periodic_nuclear_sum": dec.nuclear_sum(),
        "discrete_nuclear_sum": dd.nuclear_sum(),
    });
    let checks = vec![
        Check::at_most("periodic_roundtrip", periodic, cfg.tolerances.oracle),
        Check::at_most("discrete_roundtrip", discrete, cfg.tolerances.oracle),
    ];
    let (_, files) = container::decomposition_files(&dec)?;
    let artifacts = files.into_iter().map(|(n, b)| (format!("decomposition/{n}"), b)).collect();
    Ok((result, checks, Vec::new(), artifacts))
}

fn spectrum(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let op = assemble_matrix(&sigma)?;
    let all = linalg::eigenvalues(op.matrix())?;
    let mut union = Vec::new();
    for w in 0..sigma.window().len() {
        union.extend(linalg::eigenvalues(sigma.value(0, w))?);
    }
    let dist = linalg::multiset_distance(&all, &union);
    let mut checks = vec![Check::at_most("spectrum_union", dist, cfg.tolerances.spectrum)];
    let mut result = json!({ "eigenvalue_count": all.len(), "union_distance": dist });
    if let Some([re, im]) = cfg.lambda {
        let lambda = C64::new(re, im);
        let r = resolvent_symbol(&sigma, lambda, cfg.tolerances.resolvent)?;
        let d = sigma.d_in();
        let residual = (0..sigma.window().len())
            .map(|w| {
                let shifted = CMatrix::identity(d, d) * lambda - sigma.value(0, w);
                linalg::op_norm(&(shifted * r.value(0, w) - CMatrix::identity(d, d)))
            })
            .fold(0.0, f64::max);
        checks.push(Check::at_most("resolvent_residual", residual, 1e-10));
        result["resolvent_residual"] = json!(residual);
        result["resolvent_tail"] = serde_json::to_value(r.tail())?;
    }
    let mut t = Table::new("eigenvalues", &["re", "im"]);
    for z in &all {
        t.rows.push(vec![num(z.re), num(z.im)]);
    }
    Ok((result, checks, vec![t], Vec::new()))
}

fn heat_trace(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    let mut t = Table::new("heat_trace", &["t", "side", "frequency_sum", "assembled_trace", "relative_discrepancy"]);
    for &time in &cfg.heat.t_values {
        let r = heat_trace_sum(&sigma, time)?;
        for (side, s) in [("a", &r.a), ("b", &r.b)] {
            checks.push(Check::at_most(&format!("heat_trace_{side}_t{time}"), s.relative_discrepancy, cfg.tolerances.heat_trace));
            t.rows.push(vec![num(time), side.into(), num(s.frequency_sum), num(s.assembled_trace), num(s.relative_discrepancy)]);
        }
        reports.push(r);
    }
    Ok((json!({ "heat": reports }), checks, vec![t], Vec::new()))
}

fn index(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let r = multiplier_index(&sigma, cfg.tolerances.rank, &cfg.heat.t_grid)?;
    let checks = vec![
        Check::exact("frequency_sum_equals_assembled_index", r.index, r.assembled.index),
        Check::at_most("mckean_singer_matches_index", r.ms_deviation, cfg.tolerances.heat_index),
    ];
    let mut t = table_with_coords("per_frequency", "eta", cfg.n, &["ker", "coker", "index"]);
    for f in &r.per_frequency {
        t.rows.push(coord_row(&f.frequency, vec![f.ker_dim.to_string(), f.coker_dim.to_string(), f.index.to_string()]));
    }
    Ok((serde_json::to_value(&r)?, checks, vec![t], Vec::new()))
}

fn ellipticity(cfg: &ExperimentConfig) -> Result<Outputs> {
    let sigma = build_symbol(cfg)?;
    let grid = cfg.heat.ellipticity_grid.clone().unwrap_or_else(default_ellipticity_grid);
    let r = mb_ellipticity_report(&sigma, cfg.heat.ellipticity_order, &grid, None)?;
    let mut t = table_with_coords("ellipticity", "xi", cfg.n, &["alpha", "rate", "rate_adjoint", "scale", "bracket_scale"]);
    for row in &r.rows {
        t.rows.push(coord_row(
            &row.frequency,
            vec![row.alpha.to_string(), num(row.rate), num(row.rate_adjoint), num(row.scale), num(row.bracket_scale)],
        ));
    }
    Ok((serde_json::to_value(&r)?, Vec::new(), vec![t], Vec::new()))
}

fn hoermander(cfg: &ExperimentConfig) -> Result<Outputs> {
    let b = cfg.bisymbol.as_ref().ok_or_else(|| Error::Domain("no bisymbol configured".into()))?;
    let bis = ScalarBisymbol::builtin(&b.symbol, cfg.n, b.m, b.xi_radius, b.eta_radius, b.y_size(), b.order, b.rho, b.delta)?;
    let e = periodic_index_experiment(&bis, cfg.tolerances.rank, &cfg.heat.t_grid)?;
    let realized = hoermander_realize(&bis)?;
    let labels: Vec<Vec<i64>> = bis.eta_window().iter().collect();
    let grid = cfg.heat.ellipticity_grid.clone().unwrap_or_else(default_ellipticity_grid);
    let ell = mb_ellipticity_report(&realized, b.order, &grid, Some(&labels))?;
    let checks = vec![
        Check::exact("frequency_sum_equals_assembled_index", e.index.index, e.index.assembled.index),
        Check::at_most("mckean_singer_matches_index", e.index.ms_deviation, cfg.tolerances.heat_index),
        Check::at_most("mckean_singer_spread", e.index.ms_spread, cfg.tolerances.heat_index),
        Check::exact("null_index", e.index.index, 0),
    ];
    let mut t = table_with_coords("per_frequency", "xi", cfg.n, &["ker", "coker", "index"]);
    for f in &e.index.per_frequency {
        t.rows.push(coord_row(&f.frequency, vec![f.ker_dim.to_string(), f.coker_dim.to_string(), f.index.to_string()]));
    }
    let result = json!({ "experiment": e, "heat_ellipticity": ell });
    let artifacts = vec![("bisymbol.tpsd".into(), container::encode(&Artifact::Bisymbol(bis)))];
    Ok((result, checks, vec![t], artifacts))
}
