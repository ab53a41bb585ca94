// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

//! Binary container, CSV and Matrix Market I/O.
//!
//! Layout of a `.tpsd` file, all integers little-endian:
//!
//! ```text
//! magic  b"TPSD"
//! u16    version (1)
//! u8     kind
//! u32... kind-specific header (see `Kind`)
//! f64... metadata (bisymbols only)
//! f64... payload as interleaved (re, im) pairs in row-major order
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FourierCoefficients, FrequencyWindow, LatticeBox, LatticeField, TorusGrid, VectorField, C64};
use crate::linalg::CMatrix;
use crate::nuclearity::NuclearDecomposition;
use crate::symbol::{ScalarBisymbol, SymbolTable, TailSpec};

pub const MAGIC: &[u8; 4] = b"TPSD";
pub const VERSION: u16 = 1;

/// Kind byte and the `u32` header fields that follow it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    /// `n, M, d`
    VectorField = 0,
    /// `n, N, d`
    FourierCoefficients = 1,
    /// `n, N, d_out, d_in, tail`
    Multiplier = 2,
    /// `n, N, M, d_out, d_in, tail`
    FullSymbol = 3,
    /// `rows, cols`
    Matrix = 4,
    /// `n, m, N_xi, N_eta, M_y`, then `order, rho, delta` as f64
    Bisymbol = 5,
    /// `n, R, d`
    LatticeField = 6,
}

impl Kind {
    fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            0 => Kind::VectorField,
            1 => Kind::FourierCoefficients,
            2 => Kind::Multiplier,
            3 => Kind::FullSymbol,
            4 => Kind::Matrix,
            5 => Kind::Bisymbol,
            6 => Kind::LatticeField,
            _ => return Err(Error::Format(format!("unknown container kind {b}"))),
        })
    }
}

/// Anything that can live in a container file.
#[derive(Clone, Debug, PartialEq)]
pub enum Artifact {
    VectorField(VectorField),
    FourierCoefficients(FourierCoefficients),
    Symbol(SymbolTable),
    Matrix(CMatrix),
    Bisymbol(ScalarBisymbol),
    LatticeField(LatticeField),
}

impl From<VectorField> for Artifact {
    fn from(v: VectorField) -> Self {
        Artifact::VectorField(v)
    }
}

impl From<FourierCoefficients> for Artifact {
    fn from(v: FourierCoefficients) -> Self {
        Artifact::FourierCoefficients(v)
    }
}

impl From<SymbolTable> for Artifact {
    fn from(v: SymbolTable) -> Self {
        Artifact::Symbol(v)
    }
}

impl From<CMatrix> for Artifact {
    fn from(v: CMatrix) -> Self {
        Artifact::Matrix(v)
    }
}

impl From<ScalarBisymbol> for Artifact {
    fn from(v: ScalarBisymbol) -> Self {
        Artifact::Bisymbol(v)
    }
}

impl From<LatticeField> for Artifact {
    fn from(v: LatticeField) -> Self {
        Artifact::LatticeField(v)
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn new(kind: Kind) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(kind as u8);
        Writer(buf)
    }

    fn u32(&mut self, v: usize) -> &mut Self {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
        self
    }

    fn f64(&mut self, v: f64) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    fn complex<'a>(&mut self, vals: impl IntoIterator<Item = &'a C64>) -> &mut Self {
        for v in vals {
            self.f64(v.re).f64(v.im);
        }
        self
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format(format!("container truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn complex(&mut self, count: usize) -> Result<Vec<C64>> {
        let remaining = (self.buf.len() - self.pos) / 16;
        if count > remaining {
            return Err(Error::Format(format!("payload holds {remaining} values, header promises {count}")));
        }
        (0..count).map(|_| Ok(C64::new(self.f64()?, self.f64()?))).collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!("{} trailing bytes after payload", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

/// Serialize an artifact into container bytes.
pub fn encode(a: &Artifact) -> Vec<u8> {
    match a {
        Artifact::VectorField(f) => {
            let mut w = Writer::new(Kind::VectorField);
            w.u32(f.grid().dim()).u32(f.grid().size()).u32(f.fiber()).complex(f.data());
            w.0
        }
        Artifact::FourierCoefficients(c) => {
            let mut w = Writer::new(Kind::FourierCoefficients);
            w.u32(c.window().dim()).u32(c.window().radius()).u32(c.fiber()).complex(c.data());
            w.0
        }
        Artifact::Symbol(s) => {
            let mut w = match s.grid() {
                None => {
                    let mut w = Writer::new(Kind::Multiplier);
                    w.u32(s.window().dim()).u32(s.window().radius());
                    w
                }
                Some(g) => {
                    let mut w = Writer::new(Kind::FullSymbol);
                    w.u32(s.window().dim()).u32(s.window().radius()).u32(g.size());
                    w
                }
            };
            w.u32(s.d_out()).u32(s.d_in()).u32(s.tail().to_code() as usize);
            for m in s.values() {
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        w.f64(m[(r, c)].re).f64(m[(r, c)].im);
                    }
                }
            }
            w.0
        }
        Artifact::Matrix(m) => {
            let mut w = Writer::new(Kind::Matrix);
            w.u32(m.nrows()).u32(m.ncols());
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    w.f64(m[(r, c)].re).f64(m[(r, c)].im);
                }
            }
            w.0
        }
        Artifact::Bisymbol(b) => {
            let mut w = Writer::new(Kind::Bisymbol);
            w.u32(b.xi_window().dim())
                .u32(b.eta_window().dim())
                .u32(b.xi_window().radius())
                .u32(b.eta_window().radius())
                .u32(b.y_grid().size())
                .f64(b.order)
                .f64(b.rho)
                .f64(b.delta)
                .complex(b.values());
            w.0
        }
        Artifact::LatticeField(f) => {
            let mut w = Writer::new(Kind::LatticeField);
            w.u32(f.support().dim()).u32(f.support().radius()).u32(f.fiber()).complex(f.data());
            w.0
        }
    }
}

fn blocks(values: Vec<C64>, rows: usize, cols: usize) -> Vec<CMatrix> {
    let per = rows * cols;
    if per == 0 {
        return Vec::new();
    }
    values.chunks(per).map(|c| CMatrix::from_row_slice(rows, cols, c)).collect()
}

/// Parse container bytes.
pub fn decode(buf: &[u8]) -> Result<Artifact> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("missing TPSD magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let kind = Kind::from_byte(r.take(1)?[0])?;
    let out = match kind {
        Kind::VectorField => {
            let (n, m, d) = (r.u32()?, r.u32()?, r.u32()?);
            let grid = TorusGrid::new(n, m)?;
            let data = r.complex(grid.len() * d)?;
            Artifact::VectorField(VectorField::new(grid, d, data)?)
        }
        Kind::FourierCoefficients => {
            let (n, radius, d) = (r.u32()?, r.u32()?, r.u32()?);
            let window = FrequencyWindow::new(n, radius)?;
            let data = r.complex(window.len() * d)?;
            Artifact::FourierCoefficients(FourierCoefficients::new(window, d, data)?)
        }
        Kind::Multiplier | Kind::FullSymbol => {
            let (n, radius) = (r.u32()?, r.u32()?);
            let m = if kind == Kind::FullSymbol { Some(r.u32()?) } else { None };
            let (d_out, d_in, tail) = (r.u32()?, r.u32()?, r.u32()?);
            let tail = TailSpec::from_code(u8::try_from(tail).map_err(|_| Error::Format("bad tail code".into()))?)?;
            let window = FrequencyWindow::new(n, radius)?;
            match m {
                None => {
                    let vals = r.complex(window.len() * d_out * d_in)?;
                    Artifact::Symbol(SymbolTable::multiplier(window, d_out, d_in, blocks(vals, d_out, d_in), tail)?)
                }
                Some(m) => {
                    let grid = TorusGrid::new(n, m)?;
                    let vals = r.complex(grid.len() * window.len() * d_out * d_in)?;
                    Artifact::Symbol(SymbolTable::full(grid, window, d_out, d_in, blocks(vals, d_out, d_in), tail)?)
                }
            }
        }
        Kind::Matrix => {
            let (rows, cols) = (r.u32()?, r.u32()?);
            let vals = r.complex(rows * cols)?;
            Artifact::Matrix(CMatrix::from_row_slice(rows, cols, &vals))
        }
        Kind::Bisymbol => {
            let (n, m, nx, ne, my) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?);
            let (order, rho, delta) = (r.f64()?, r.f64()?, r.f64()?);
            let xw = FrequencyWindow::new(n, nx)?;
            let ew = FrequencyWindow::new(m, ne)?;
            let grid = TorusGrid::new(m, my)?;
            let vals = r.complex(grid.len() * xw.len() * ew.len())?;
            Artifact::Bisymbol(ScalarBisymbol::new(xw, ew, grid, vals, order, rho, delta)?)
        }
        Kind::LatticeField => {
            let (n, radius, d) = (r.u32()?, r.u32()?, r.u32()?);
            let support = LatticeBox::new(n, radius)?;
            let data = r.complex(support.len() * d)?;
            Artifact::LatticeField(LatticeField::new(support, d, data)?)
        }
    };
    r.finish()?;
    Ok(out)
}

pub fn write_artifact(path: impl AsRef<Path>, a: &Artifact) -> Result<()> {
    fs::write(path, encode(a))?;
    Ok(())
}

pub fn read_artifact(path: impl AsRef<Path>) -> Result<Artifact> {
    decode(&fs::read(path)?)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// One row per sample and component: `j, x_0.., component, re, im`.
pub fn vector_field_csv(f: &VectorField) -> String {
    let n = f.grid().dim();
    let mut s = String::from("j");
    for a in 0..n {
        let _ = write!(s, ",x{a}");
    }
    s.push_str(",component,re,im\n");
    for j in 0..f.grid().len() {
        let x = f.grid().point(j);
        for (c, v) in f.sample(j).iter().enumerate() {
            let _ = write!(s, "{j}");
            for xa in &x {
                let _ = write!(s, ",{}", fmt_f64(*xa));
            }
            let _ = writeln!(s, ",{c},{},{}", fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    s
}

/// One row per frequency and component: `xi_0.., component, re, im`.
pub fn coefficients_csv(c: &FourierCoefficients) -> String {
    let n = c.window().dim();
    let mut s = (0..n).map(|a| format!("xi{a}")).collect::<Vec<_>>().join(",");
    s.push_str(",component,re,im\n");
    for (i, xi) in c.window().iter().enumerate() {
        for (k, v) in c.value(i).iter().enumerate() {
            let coords: Vec<String> = xi.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{},{k},{},{}", coords.join(","), fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMarketLayout {
    Array,
    Coordinate,
}

/// Complex general Matrix Market text; `Coordinate` lists nonzeros only.
pub fn matrix_market(m: &CMatrix, layout: MatrixMarketLayout) -> String {
    let mut s = String::new();
    match layout {
        MatrixMarketLayout::Array => {
            s.push_str("%%MatrixMarket matrix array complex general\n");
            let _ = writeln!(s, "{} {}", m.nrows(), m.ncols());
            for c in 0..m.ncols() {
                for r in 0..m.nrows() {
                    let v = m[(r, c)];
                    let _ = writeln!(s, "{} {}", fmt_f64(v.re), fmt_f64(v.im));
                }
            }
        }
        MatrixMarketLayout::Coordinate => {
            s.push_str("%%MatrixMarket matrix coordinate complex general\n");
            let nz: Vec<(usize, usize, C64)> = (0..m.ncols())
                .flat_map(|c| (0..m.nrows()).map(move |r| (r, c)))
                .map(|(r, c)| (r, c, m[(r, c)]))
                .filter(|(_, _, v)| v.re != 0.0 || v.im != 0.0)
                .collect();
            let _ = writeln!(s, "{} {} {}", m.nrows(), m.ncols(), nz.len());
            for (r, c, v) in nz {
                let _ = writeln!(s, "{} {} {} {}", r + 1, c + 1, fmt_f64(v.re), fmt_f64(v.im));
            }
        }
    }
    s
}

/// Parse complex general Matrix Market text in either layout.
pub fn parse_matrix_market(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines();
    let banner = lines.next().ok_or_else(|| Error::Format("empty Matrix Market input".into()))?;
    let words: Vec<String> = banner.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" || words[3] != "complex" || words[4] != "general" {
        return Err(Error::Format(format!("unsupported Matrix Market banner: {banner}")));
    }
    let mut body = lines.filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let num = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|e| Error::Format(format!("bad number {s:?}: {e}"))) };
    let idx = |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|e| Error::Format(format!("bad index {s:?}: {e}"))) };
    let size: Vec<&str> = body.next().ok_or_else(|| Error::Format("missing size line".into()))?.split_whitespace().collect();
    match words[2].as_str() {
        "array" => {
            let (rows, cols) = (idx(size[0])?, idx(size[1])?);
            let mut m = CMatrix::zeros(rows, cols);
            for c in 0..cols {
                for r in 0..rows {
                    let line = body.next().ok_or_else(|| Error::Format("array data truncated".into()))?;
                    let p: Vec<&str> = line.split_whitespace().collect();
                    m[(r, c)] = C64::new(num(p[0])?, num(p[1])?);
                }
            }
            Ok(m)
        }
        "coordinate" => {
            let (rows, cols, nnz) = (idx(size[0])?, idx(size[1])?, idx(size[2])?);
            let mut m = CMatrix::zeros(rows, cols);
            for _ in 0..nnz {
                let line = body.next().ok_or_else(|| Error::Format("coordinate data truncated".into()))?;
                let p: Vec<&str> = line.split_whitespace().collect();
                if p.len() != 4 {
                    return Err(Error::Format(format!("bad coordinate entry: {line}")));
                }
                let (r, c) = (idx(p[0])?, idx(p[1])?);
                if r == 0 || c == 0 || r > rows || c > cols {
                    return Err(Error::Format(format!("entry ({r}, {c}) out of range")));
                }
                m[(r - 1, c - 1)] = C64::new(num(p[2])?, num(p[3])?);
            }
            Ok(m)
        }
        other => Err(Error::Format(format!("unsupported Matrix Market layout {other}"))),
    }
}

/// Sidecar describing a decomposition stored as `h_<k>.tpsd` / `g_<k>.tpsd`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionManifest {
    pub terms: usize,
    pub p: f64,
    pub p_prime: f64,
    pub s: f64,
    pub nuclear_sum: f64,
    pub dim: usize,
    pub grid_size: usize,
    pub d_out: usize,
    pub d_in: usize,
    pub h_files: Vec<String>,
    pub g_files: Vec<String>,
}

/// Container files and manifest of a decomposition as `(relative path, bytes)`.
pub fn decomposition_files(dec: &NuclearDecomposition) -> Result<(DecompositionManifest, Vec<(String, Vec<u8>)>)> {
    let mut files = Vec::new();
    let mut h_files = Vec::new();
    let mut g_files = Vec::new();
    for (k, (h, g)) in dec.terms().iter().enumerate() {
        let (hn, gn) = (format!("h_{k}.tpsd"), format!("g_{k}.tpsd"));
        files.push((hn.clone(), encode(&Artifact::VectorField(h.clone()))));
        files.push((gn.clone(), encode(&Artifact::VectorField(g.clone()))));
        h_files.push(hn);
        g_files.push(gn);
    }
    let manifest = DecompositionManifest {
        terms: dec.len(),
        p: dec.p(),
        p_prime: dec.p_prime(),
        s: dec.s(),
        nuclear_sum: dec.nuclear_sum(),
        dim: dec.grid().dim(),
        grid_size: dec.grid().size(),
        d_out: dec.d_out(),
        d_in: dec.d_in(),
        h_files,
        g_files,
    };
    files.push(("manifest.json".into(), serde_json::to_vec_pretty(&manifest)?));
    Ok((manifest, files))
}

pub fn write_decomposition(dir: impl AsRef<Path>, dec: &NuclearDecomposition) -> Result<DecompositionManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (manifest, files) = decomposition_files(dec)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(manifest)
}

pub fn read_decomposition(dir: impl AsRef<Path>) -> Result<NuclearDecomposition> {
    let dir = dir.as_ref();
    let manifest: DecompositionManifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    if manifest.h_files.len() != manifest.terms || manifest.g_files.len() != manifest.terms {
        return Err(Error::Format("manifest term count does not match its file lists".into()));
    }
    let field = |name: &str| -> Result<VectorField> {
        match read_artifact(dir.join(name))? {
            Artifact::VectorField(f) => Ok(f),
            _ => Err(Error::Format(format!("{name} does not hold a vector field"))),
        }
    };
    let terms = manifest
        .h_files
        .iter()
        .zip(&manifest.g_files)
        .map(|(h, g)| Ok((field(h)?, field(g)?)))
        .collect::<Result<Vec<_>>>()?;
    let grid = TorusGrid::new(manifest.dim, manifest.grid_size)?;
    NuclearDecomposition::new(grid, manifest.d_out, manifest.d_in, terms, manifest.p, manifest.s)
}
