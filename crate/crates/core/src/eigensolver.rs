//! Lowest eigenpairs of real symmetric sector operators.
//!
//! Large sectors use a thick-restart block Lanczos iteration that keeps the
//! whole Krylov basis and reorthogonalizes every new vector against all of
//! it (classical Gram-Schmidt, applied twice). Sectors below
//! `dense_threshold` are diagonalized densely.
//!
//! All reductions run over fixed-size row chunks whose partial sums are
//! combined in chunk order, so results do not depend on the number of
//! threads.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::LinearOperator;

/// Ground doublets closer than this (MHz) are flagged as degenerate.
pub const DEGENERACY_EPS: f64 = 1e-6;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenConfig {
    /// Number of eigenpairs requested.
    pub k: usize,
    /// Residual bound ‖Hv − λv‖ for unit v, in MHz.
    pub tol: f64,
    /// Krylov basis size per restart cycle; `None` picks
    /// `min(dim, max(20, 4k + 12))`.
    pub max_iter: Option<usize>,
    /// Restart cycles before giving up.
    pub max_restarts: usize,
    /// Seed of the start block.
    pub seed: u64,
    /// Sectors with fewer states are diagonalized densely.
    pub dense_threshold: usize,
    /// Start-block width; `None` picks `max(1, k − 1)`.
    pub block_size: Option<usize>,
    pub degeneracy_eps: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            k: 2,
            tol: 1e-10,
            max_iter: None,
            max_restarts: 200,
            seed: 12345,
            dense_threshold: 512,
            block_size: None,
            degeneracy_eps: DEGENERACY_EPS,
        }
    }
}

impl EigenConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_dense_threshold(mut self, threshold: usize) -> Self {
        self.dense_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be ≥ 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be > 0".into()));
        }
        if let Some(m) = self.max_iter {
            if m < self.k {
                return Err(Error::InvalidConfig("max_iter must be ≥ k".into()));
            }
        }
        if self.block_size == Some(0) {
            return Err(Error::InvalidConfig("block_size must be ≥ 1".into()));
        }
        Ok(())
    }

    fn basis_size(&self, dim: usize, block: usize) -> usize {
        let wanted = self.max_iter.unwrap_or((4 * self.k + 12).max(20));
        // room for the kept Ritz vectors plus at least one fresh block
        wanted.max(self.k + 2 * block + 1).min(dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Dense,
    Lanczos,
}

/// Lowest eigenpairs of one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    /// Ascending eigenvalues in MHz.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors in sector-basis order.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// ‖Hv − λv‖ per pair.
    pub residuals: Vec<f64>,
    /// Operator applications spent.
    pub iterations: usize,
    pub restarts: usize,
    /// λ₁ − λ₀ below the degeneracy threshold.
    pub degenerate: bool,
    pub method: SolverMethod,
}

impl GroundState {
    pub fn energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn vector(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    /// Gap to the first excited level, if it was computed.
    pub fn excitation_gap(&self) -> Option<f64> {
        self.eigenvalues.get(1).map(|e1| e1 - self.eigenvalues[0])
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Lowest `cfg.k` eigenpairs of `op`.
pub fn lowest_eigenpairs<O: LinearOperator + ?Sized>(op: &O, cfg: &EigenConfig) -> Result<GroundState> {
    cfg.validate()?;
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::InvalidConfig("operator has dimension 0".into()));
    }
    if cfg.k > dim {
        return Err(Error::InvalidConfig(format!(
            "requested {} eigenpairs from a {dim}-dimensional sector",
            cfg.k
        )));
    }
    let mut result = if dim < cfg.dense_threshold {
        dense_eigenpairs(op, cfg.k)
    } else {
        Lanczos::new(op, cfg).run()?
    };
    let shift = op.shift();
    for e in &mut result.eigenvalues {
        *e += shift;
    }
    result.degenerate =
        result.eigenvalues.len() > 1 && result.eigenvalues[1] - result.eigenvalues[0] < cfg.degeneracy_eps;
    Ok(result)
}

fn dense_eigenpairs<O: LinearOperator + ?Sized>(op: &O, k: usize) -> GroundState {
    let n = op.dim();
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    let mut unit = vec![0.0; n];
    let mut column = vec![0.0; n];
    for c in 0..n {
        unit[c] = 1.0;
        op.apply_unshifted(&unit, &mut column);
        unit[c] = 0.0;
        for r in 0..n {
            matrix[(r, c)] = column[r];
        }
    }
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        eigenvalues.push(eig.eigenvalues[idx]);
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        fix_gauge(&mut v);
        eigenvectors.push(v);
    }
    let residuals = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&e, v)| residual_norm(op, e, v))
        .collect();
    GroundState {
        eigenvalues,
        eigenvectors,
        residuals,
        iterations: n,
        restarts: 0,
        degenerate: false,
        method: SolverMethod::Dense,
    }
}

/// Deterministic sign: the largest-magnitude component is positive.
fn fix_gauge(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual_norm<O: LinearOperator + ?Sized>(op: &O, eigenvalue: f64, v: &[f64]) -> f64 {
    let mut w = vec![0.0; v.len()];
    op.apply_unshifted(v, &mut w);
    w.iter_mut().zip(v).for_each(|(w, x)| *w -= eigenvalue * x);
    norm(&w)
}

/// Serial dot product with eight independent partial sums.
fn lane_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ha, ta) = a.split_at(a.len() - a.len() % 8);
    let (hb, tb) = b.split_at(ha.len());
    for (x, y) in ha.chunks_exact(8).zip(hb.chunks_exact(8)) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ta.iter().zip(tb).map(|(p, q)| p * q).sum();
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| lane_dot(x, y))
        .collect::<Vec<f64>>()
        .into_iter()
        .sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Krylov basis stored as `count` contiguous vectors of length `dim`.
struct Basis {
    dim: usize,
    data: Vec<f64>,
    count: usize,
}

impl Basis {
    fn new(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * capacity],
            count: 0,
        }
    }

    fn vector(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    fn push(&mut self, v: &[f64], scale: f64) {
        let j = self.count;
        let dst = &mut self.data[j * self.dim..(j + 1) * self.dim];
        dst.iter_mut().zip(v).for_each(|(d, x)| *d = x * scale);
        self.count += 1;
    }

    /// Coefficients `qᵢ·w` for every stored vector, one pass over the basis.
    fn project(&self, w: &[f64]) -> Vec<f64> {
        let dim = self.dim;
        let count = self.count;
        let partials: Vec<Vec<f64>> = w
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, wc)| {
                let start = c * CHUNK;
                (0..count)
                    .map(|j| {
                        lane_dot(&self.data[j * dim + start..j * dim + start + wc.len()], wc)
                    })
                    .collect()
            })
            .collect();
        let mut h = vec![0.0; count];
        for p in &partials {
            h.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        h
    }

    /// `w −= Σ hⱼ qⱼ`.
    fn subtract(&self, w: &mut [f64], h: &[f64]) {
        let dim = self.dim;
        w.par_chunks_mut(CHUNK).enumerate().for_each(|(c, wc)| {
            let start = c * CHUNK;
            for (j, &hj) in h.iter().enumerate() {
                let q = &self.data[j * dim + start..j * dim + start + wc.len()];
                wc.iter_mut().zip(q).for_each(|(a, b)| *a -= hj * b);
            }
        });
    }

    /// Orthogonalize `w` against the basis twice; returns the coefficients.
    fn orthogonalize(&self, w: &mut [f64]) -> Vec<f64> {
        let mut h = self.project(w);
        self.subtract(w, &h);
        let h2 = self.project(w);
        self.subtract(w, &h2);
        h.iter_mut().zip(&h2).for_each(|(a, b)| *a += b);
        h
    }

    /// Replace the first `coeffs.ncols()` vectors by `Q[..rows]·coeffs`,
    /// then move vectors `keep_from..count` directly behind them.
    fn rotate(&mut self, coeffs: &DMatrix<f64>, keep_from: usize) {
        let dim = self.dim;
        let (rows, cols) = coeffs.shape();
        let data = &mut self.data;
        // rows of the basis matrix are independent: work chunk by chunk
        let mut chunk_buf = vec![0.0; cols * CHUNK];
        for start in (0..dim).step_by(CHUNK) {
            let len = CHUNK.min(dim - start);
            chunk_buf[..cols * len].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..rows {
                let q = &data[j * dim + start..j * dim + start + len];
                for a in 0..cols {
                    let y = coeffs[(j, a)];
                    if y == 0.0 {
                        continue;
                    }
                    let out = &mut chunk_buf[a * len..(a + 1) * len];
                    out.iter_mut().zip(q).for_each(|(o, x)| *o += y * x);
                }
            }
            for a in 0..cols {
                data[a * dim + start..a * dim + start + len]
                    .copy_from_slice(&chunk_buf[a * len..(a + 1) * len]);
            }
        }
        let moved = self.count - keep_from;
        for u in 0..moved {
            let (src, dst) = ((keep_from + u) * dim, (cols + u) * dim);
            data.copy_within(src..src + dim, dst);
        }
        self.count = cols + moved;
    }
}

struct Lanczos<'a, O: LinearOperator + ?Sized> {
    op: &'a O,
    cfg: &'a EigenConfig,
    dim: usize,
    capacity: usize,
    basis: Basis,
    /// Projected matrix, `capacity × capacity`.
    t: DMatrix<f64>,
    /// Vectors whose image under the operator has been taken.
    processed: usize,
    rng: ChaCha8Rng,
    matvecs: usize,
    restarts: usize,
    scale: f64,
    best_residual: f64,
}

struct Ritz {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    residuals: Vec<f64>,
}

impl<'a, O: LinearOperator + ?Sized> Lanczos<'a, O> {
    fn new(op: &'a O, cfg: &'a EigenConfig) -> Self {
        let dim = op.dim();
        let block = cfg.block_size.unwrap_or(cfg.k.saturating_sub(1).max(1)).min(dim);
        let capacity = cfg.basis_size(dim, block);
        let mut solver = Self {
            op,
            cfg,
            dim,
            capacity,
            basis: Basis::new(dim, capacity),
            t: DMatrix::zeros(capacity, capacity),
            processed: 0,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            matvecs: 0,
            restarts: 0,
            scale: 0.0,
            best_residual: f64::INFINITY,
        };
        for _ in 0..block {
            solver.push_random();
        }
        solver
    }

    /// Append a random unit vector orthogonal to the basis. Returns false
    /// when the basis already spans the space.
    fn push_random(&mut self) -> bool {
        if self.basis.count >= self.dim {
            return false;
        }
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..self.dim).map(|_| self.rng.random_range(-1.0..1.0)).collect();
            let before = norm(&v);
            self.basis.orthogonalize(&mut v);
            let after = norm(&v);
            if after > 1e-8 * before {
                let j = self.basis.count;
                for i in 0..self.processed {
                    self.t[(i, j)] = 0.0;
                    self.t[(j, i)] = 0.0;
                }
                self.basis.push(&v, 1.0 / after);
                return true;
            }
        }
        false
    }

    fn step(&mut self) {
        let j = self.processed;
        let mut w = vec![0.0; self.dim];
        self.op.apply_unshifted(self.basis.vector(j), &mut w);
        self.matvecs += 1;
        let image_norm = norm(&w);
        self.scale = self.scale.max(image_norm);
        let h = self.basis.orthogonalize(&mut w);
        for (i, &hi) in h.iter().enumerate() {
            self.t[(i, j)] = hi;
            self.t[(j, i)] = hi;
        }
        self.processed += 1;
        let beta = norm(&w);
        if self.basis.count == self.dim {
            // the basis spans the space; w is rounding noise
        } else if beta > 1e-12 * self.scale.max(f64::MIN_POSITIVE) {
            let new = self.basis.count;
            for i in 0..self.processed {
                self.t[(i, new)] = 0.0;
                self.t[(new, i)] = 0.0;
            }
            self.t[(new, j)] = beta;
            self.t[(j, new)] = beta;
            self.basis.push(&w, 1.0 / beta);
        } else if self.processed == self.basis.count {
            // invariant subspace: continue from a fresh direction
            self.push_random();
        }
    }

    /// Rayleigh-Ritz on the processed block with residual estimates taken
    /// from the coupling to the unprocessed vectors.
    fn ritz(&self) -> Ritz {
        let p = self.processed;
        let tp = self.t.view((0, 0), (p, p)).into_owned();
        let eig = SymmetricEigen::new(tp);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(p, p);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(i));
        }
        let extra = self.basis.count - p;
        let residuals = (0..p)
            .map(|a| {
                let y = vectors.column(a);
                (0..extra)
                    .map(|u| {
                        let row = self.t.view((p + u, 0), (1, p));
                        (row * y)[(0, 0)].powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ritz {
            values,
            vectors,
            residuals,
        }
    }

    fn run(mut self) -> Result<GroundState> {
        let k = self.cfg.k;
        loop {
            while self.processed < self.basis.count && (self.basis.count < self.capacity || self.basis.count == self.dim) {
                self.step();
                let exhausted = self.processed == self.basis.count;
                if self.processed >= k {
                    let ritz = self.ritz();
                    let worst = ritz.residuals[..k].iter().copied().fold(0.0, f64::max);
                    self.best_residual = self.best_residual.min(worst);
                    if worst <= 0.1 * self.cfg.tol || exhausted {
                        if let Some(done) = self.finish(&ritz)? {
                            return Ok(done);
                        }
                    }
                }
            }
            if self.processed == self.basis.count {
                // the whole space is spanned and nothing converged to tol
                let ritz = self.ritz();
                if let Some(done) = self.finish(&ritz)? {
                    return Ok(done);
                }
                return Err(self.no_convergence());
            }
            self.restart()?;
        }
    }

    /// Form Ritz vectors and accept them if the true residuals meet tol.
    fn finish(&mut self, ritz: &Ritz) -> Result<Option<GroundState>> {
        let k = self.cfg.k;
        let p = self.processed;
        let mut pairs = Vec::with_capacity(k);
        for a in 0..k {
            let mut x = vec![0.0; self.dim];
            for j in 0..p {
                let y = ritz.vectors[(j, a)];
                x.iter_mut().zip(self.basis.vector(j)).for_each(|(o, q)| *o += y * q);
            }
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            // Rayleigh quotient of the assembled vector, not the projected value
            let mut w = vec![0.0; self.dim];
            self.op.apply_unshifted(&x, &mut w);
            self.matvecs += 1;
            let rho = dot(&x, &w);
            w.iter_mut().zip(&x).for_each(|(w, x)| *w -= rho * x);
            fix_gauge(&mut x);
            pairs.push((rho, norm(&w), x));
        }
        let worst = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
        self.best_residual = self.best_residual.min(worst);
        if worst > self.cfg.tol {
            return Ok(None);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut eigenvalues = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        let mut eigenvectors = Vec::with_capacity(k);
        for (rho, r, x) in pairs {
            eigenvalues.push(rho);
            residuals.push(r);
            eigenvectors.push(x);
        }
        Ok(Some(GroundState {
            eigenvalues,
            eigenvectors,
            residuals,
            iterations: self.matvecs,
            restarts: self.restarts,
            degenerate: false,
            method: SolverMethod::Lanczos,
        }))
    }

    fn restart(&mut self) -> Result<()> {
        if self.restarts >= self.cfg.max_restarts {
            return Err(self.no_convergence());
        }
        self.restarts += 1;
        let ritz = self.ritz();
        let p = self.processed;
        let pending = self.basis.count - p;
        let keep = (self.cfg.k + (self.capacity - self.cfg.k) / 2)
            .min(p)
            .min(self.capacity - pending - 1)
            .max(self.cfg.k);
        let y = ritz.vectors.columns(0, keep).into_owned();
        // couplings of the pending vectors to the kept Ritz vectors
        let couplings = self.t.view((p, 0), (pending, p)) * &y;
        self.basis.rotate(&y, p);
        self.t.fill(0.0);
        for a in 0..keep {
            self.t[(a, a)] = ritz.values[a];
        }
        for u in 0..pending {
            for a in 0..keep {
                self.t[(keep + u, a)] = couplings[(u, a)];
                self.t[(a, keep + u)] = couplings[(u, a)];
            }
        }
        self.processed = keep;
        if pending == 0 && !self.push_random() {
            return Err(self.no_convergence());
        }
        Ok(())
    }

    fn no_convergence(&self) -> Error {
        Error::NoConvergence {
            iterations: self.matvecs,
            restarts: self.restarts,
            best_residual: self.best_residual,
        }
    }
}
