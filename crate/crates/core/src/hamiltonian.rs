//! Sector-restricted Hamiltonian and ladder operators.
//!
//! Within sector N the diagonal of H is
//! Σᵢ[ω_c nᵢ + (ω_z/2)(2δᵢ − 1)] = N·ω_c − M·ω_z/2 − Δ·Σᵢδᵢ.
//! The constant part is kept as an exact identity shift beside the stored
//! entries, so the eigensolver works on an operator whose norm is set by the
//! couplings and the detuning rather than by N·ω_c.

use std::io::Write;

use rayon::prelude::*;

use crate::basis::{code_excited, code_photons, make_code, SectorBasis};
use crate::error::{Error, Result};
use crate::model::LatticeParams;

/// Rows handed to one rayon task when applying an operator.
const ROW_CHUNK: usize = 2048;

/// A real symmetric operator acting on one sector.
///
/// The action is split as `H x = shift·x + A x`, where `A` is what
/// implementors compute in [`LinearOperator::apply_unshifted`].
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Multiple of the identity not included in `apply_unshifted`.
    fn shift(&self) -> f64 {
        0.0
    }

    /// `y = (H − shift)·x`.
    fn apply_unshifted(&self, x: &[f64], y: &mut [f64]);
}

/// Row-compressed real sparse matrix plus an identity shift.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<f64>,
    shift: f64,
    symmetric: bool,
}

impl SparseOperator {
    /// Assemble from per-row `(column, value)` lists. Each row must already
    /// be sorted by column without duplicates.
    pub fn from_rows(
        cols: usize,
        rows: Vec<Vec<(u32, f64)>>,
        shift: f64,
        symmetric: bool,
    ) -> Result<Self> {
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        for row in &rows {
            for &(c, v) in row {
                if c as usize >= cols {
                    return Err(Error::DimensionMismatch {
                        expected: cols,
                        actual: c as usize + 1,
                    });
                }
                if !v.is_finite() {
                    return Err(Error::Consistency("non-finite matrix entry".into()));
                }
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        if symmetric && rows.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                actual: rows.len(),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            row_offsets,
            col_indices,
            values,
            shift,
            symmetric,
        })
    }

    /// Diagonal matrix `diag(values)`.
    pub fn diagonal(values: &[f64]) -> Self {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &v)| if v == 0.0 { vec![] } else { vec![(i as u32, v)] })
            .collect();
        Self::from_rows(values.len(), rows, 0.0, true).expect("diagonal entries are in range")
    }

    pub fn dim_rows(&self) -> usize {
        self.rows
    }

    pub fn dim_cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Identity multiple held outside the stored entries.
    pub fn identity_shift(&self) -> f64 {
        self.shift
    }

    /// Stored `(column, value)` pairs of one row, shift excluded.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        self.col_indices[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Matrix element including the identity shift.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let stored = self
            .row(r)
            .find(|&(col, _)| col == c)
            .map_or(0.0, |(_, v)| v);
        if r == c {
            stored + self.shift
        } else {
            stored
        }
    }

    /// `H v`, shift included.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        self.matvec(v, &mut out);
        if self.shift != 0.0 {
            let n = self.rows.min(self.cols);
            for (o, x) in out[..n].iter_mut().zip(&v[..n]) {
                *o += self.shift * x;
            }
        }
        Ok(out)
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(ROW_CHUNK)
            .enumerate()
            .for_each(|(chunk, ys)| {
                let first = chunk * ROW_CHUNK;
                for (k, out) in ys.iter_mut().enumerate() {
                    let r = first + k;
                    let mut acc = 0.0;
                    for idx in self.row_offsets[r]..self.row_offsets[r + 1] {
                        acc += self.values[idx] * x[self.col_indices[idx] as usize];
                    }
                    *out = acc;
                }
            });
    }

    /// Dense copy, shift included. Intended for small sectors.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (r, row) in dense.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
            if r < self.cols {
                row[r] += self.shift;
            }
        }
        dense
    }

    /// Structural and numerical transpose check, exact comparison.
    pub fn check_symmetry(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        (0..self.rows).all(|r| self.row(r).all(|(c, v)| self.row(c).any(|(cc, vv)| cc == r && vv == v)))
    }

    /// Write the matrix as `row col value` lines (shift folded into the
    /// diagonal), one nonzero per line.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut entries = Vec::with_capacity(self.nnz() + self.rows);
        for r in 0..self.rows {
            let mut wrote_diagonal = false;
            for (c, v) in self.row(r) {
                let v = if c == r {
                    wrote_diagonal = true;
                    v + self.shift
                } else {
                    v
                };
                entries.push((r, c, v));
            }
            if !wrote_diagonal && r < self.cols {
                entries.push((r, r, self.shift));
            }
        }
        entries.retain(|e| e.2 != 0.0);
        writeln!(out, "% {} {} {}", self.rows, self.cols, entries.len())?;
        for (r, c, v) in entries {
            writeln!(out, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.rows
    }

    fn shift(&self) -> f64 {
        self.shift
    }

    fn apply_unshifted(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

/// Constant part of the diagonal in sector N.
fn sector_shift(params: &LatticeParams, excitations: usize) -> f64 {
    excitations as f64 * params.omega_c - params.sites as f64 * params.omega_z() / 2.0
}

/// Nonzero entries of one row of `H − shift`, sorted by column with
/// duplicates merged.
fn row_entries(
    params: &LatticeParams,
    basis: &SectorBasis,
    r: usize,
    scratch: &mut Vec<u8>,
    out: &mut Vec<(u32, f64)>,
) {
    out.clear();
    let m = basis.sites();
    let codes = basis.codes(r);
    let excited = codes.iter().filter(|&&c| code_excited(c)).count();
    let diag = -params.delta * excited as f64;
    if diag != 0.0 {
        out.push((r as u32, diag));
    }
    scratch.clear();
    scratch.extend_from_slice(codes);
    for qubit in 0..m {
        let left = (qubit + m - 1) % m;
        for (resonator, g) in [(qubit, params.g_r), (left, params.g_l)] {
            if g == 0.0 {
                continue;
            }
            scratch.copy_from_slice(codes);
            let up = code_excited(scratch[qubit]);
            let photons = code_photons(scratch[resonator]);
            let amplitude = if up {
                // a†σ⁻: photon created, qubit lowered
                scratch[resonator] = make_code(photons + 1, code_excited(scratch[resonator]));
                scratch[qubit] = make_code(code_photons(scratch[qubit]), false);
                ((photons + 1) as f64).sqrt()
            } else {
                // σ⁺a: photon destroyed, qubit raised
                if photons == 0 {
                    continue;
                }
                scratch[resonator] = make_code(photons - 1, code_excited(scratch[resonator]));
                scratch[qubit] = make_code(code_photons(scratch[qubit]), true);
                (photons as f64).sqrt()
            };
            let c = basis
                .rank_codes(scratch)
                .expect("excitation-conserving move stays in the sector");
            out.push((c as u32, g * amplitude));
        }
    }
    out.sort_by_key(|&(c, _)| c);
    out.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 += later.1;
            true
        } else {
            false
        }
    });
    out.retain(|&(_, v)| v != 0.0);
}

fn check_sector(params: &LatticeParams, basis: &SectorBasis) -> Result<()> {
    if params.sites != basis.sites() {
        return Err(Error::DimensionMismatch {
            expected: params.sites,
            actual: basis.sites(),
        });
    }
    Ok(())
}

/// Assemble H restricted to `basis` as a row-compressed matrix.
pub fn build_hamiltonian(params: &LatticeParams, basis: &SectorBasis) -> Result<SparseOperator> {
    check_sector(params, basis)?;
    let rows: Vec<Vec<(u32, f64)>> = (0..basis.dim())
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(basis.sites()), Vec::new()),
            |(scratch, buf), r| {
                row_entries(params, basis, r, scratch, buf);
                buf.clone()
            },
        )
        .collect();
    SparseOperator::from_rows(
        basis.dim(),
        rows,
        sector_shift(params, basis.excitations()),
        true,
    )
}

/// H applied row by row without storing the matrix.
///
/// Produces the same entries in the same order as [`build_hamiltonian`], so
/// both appliers give bit-identical products.
#[derive(Debug, Clone, Copy)]
pub struct MatrixFreeHamiltonian<'a> {
    params: LatticeParams,
    basis: &'a SectorBasis,
}

impl<'a> MatrixFreeHamiltonian<'a> {
    pub fn new(params: &LatticeParams, basis: &'a SectorBasis) -> Result<Self> {
        check_sector(params, basis)?;
        Ok(Self {
            params: *params,
            basis,
        })
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        self.apply_unshifted(v, &mut out);
        let shift = self.shift();
        for (o, x) in out.iter_mut().zip(v) {
            *o += shift * x;
        }
        Ok(out)
    }
}

impl LinearOperator for MatrixFreeHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn shift(&self) -> f64 {
        sector_shift(&self.params, self.basis.excitations())
    }

    fn apply_unshifted(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(ROW_CHUNK)
            .enumerate()
            .for_each_init(
                || (Vec::with_capacity(self.basis.sites()), Vec::new()),
                |(scratch, buf), (chunk, ys)| {
                    let first = chunk * ROW_CHUNK;
                    for (k, out) in ys.iter_mut().enumerate() {
                        row_entries(&self.params, self.basis, first + k, scratch, buf);
                        let mut acc = 0.0;
                        for &(c, v) in buf.iter() {
                            acc += v * x[c as usize];
                        }
                        *out = acc;
                    }
                },
            );
    }
}

/// Photon annihilation aᵢ mapping sector N onto sector N − 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMap {
    site: usize,
    sites: usize,
    source_excitations: usize,
    /// Per source ordinal: target ordinal and amplitude √nᵢ, or `None` when
    /// nᵢ = 0.
    entries: Vec<Option<(usize, f64)>>,
}

impl LadderMap {
    pub fn site(&self) -> usize {
        self.site
    }

    pub fn source_sector(&self) -> (usize, usize) {
        (self.sites, self.source_excitations)
    }

    pub fn target_sector(&self) -> (usize, usize) {
        (self.sites, self.source_excitations - 1)
    }

    pub fn entry(&self, source: usize) -> Option<(usize, f64)> {
        self.entries[source]
    }

    /// Apply aᵢ to a vector of the source sector.
    pub fn apply(&self, v: &[f64], target_dim: usize) -> Result<Vec<f64>> {
        if v.len() != self.entries.len() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.len(),
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; target_dim];
        for (x, e) in v.iter().zip(&self.entries) {
            if let Some((t, amp)) = e {
                out[*t] += amp * x;
            }
        }
        Ok(out)
    }
}

/// Build aᵢ between the N and N − 1 sectors of the same ring.
pub fn build_ladder(
    params: &LatticeParams,
    site: usize,
    source: &SectorBasis,
    target: &SectorBasis,
) -> Result<LadderMap> {
    check_sector(params, source)?;
    if target.sites() != source.sites() || target.excitations() + 1 != source.excitations() {
        return Err(Error::SectorMismatch(format!(
            "target (M={}, N={}) is not the N−1 sector of (M={}, N={})",
            target.sites(),
            target.excitations(),
            source.sites(),
            source.excitations()
        )));
    }
    if site >= source.sites() {
        return Err(Error::IndexOutOfRange {
            index: site,
            dim: source.sites(),
        });
    }
    let mut scratch = Vec::with_capacity(source.sites());
    let entries = (0..source.dim())
        .map(|r| {
            let codes = source.codes(r);
            let n = code_photons(codes[site]);
            if n == 0 {
                return None;
            }
            scratch.clear();
            scratch.extend_from_slice(codes);
            scratch[site] = make_code(n - 1, code_excited(codes[site]));
            let t = target.rank_codes(&scratch).expect("lowered state lies in N−1");
            Some((t, (n as f64).sqrt()))
        })
        .collect();
    Ok(LadderMap {
        site,
        sites: source.sites(),
        source_excitations: source.excitations(),
        entries,
    })
}
