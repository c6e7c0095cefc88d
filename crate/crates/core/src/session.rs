//! Sector solves shared across a sweep.
//!
//! A [`Session`] owns one eigensolver configuration and memoizes sector
//! spectra by `(params, N)`. Every cached spectrum comes from the same
//! deterministic solve, so a value read from the cache is bit-identical to
//! a fresh computation regardless of which worker produced it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_sector, sector_dimension, SectorBasis, DEFAULT_DIMENSION_CAP};
use crate::eigensolver::{lowest_eigenpairs, EigenConfig, GroundState};
use crate::error::Result;
use crate::hamiltonian::{build_hamiltonian, MatrixFreeHamiltonian};
use crate::model::LatticeParams;

/// Sectors above this dimension are applied matrix-free by default.
pub const DEFAULT_MATRIX_FREE_ABOVE: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SectorKey {
    sites: usize,
    excitations: usize,
    omega_c: u64,
    delta: u64,
    g_l: u64,
    g_r: u64,
}

impl SectorKey {
    fn new(params: &LatticeParams, excitations: usize) -> Self {
        Self {
            sites: params.sites,
            excitations,
            omega_c: params.omega_c.to_bits(),
            delta: params.delta.to_bits(),
            g_l: params.g_l.to_bits(),
            g_r: params.g_r.to_bits(),
        }
    }
}

/// Eigenvalues and diagnostics of one sector, without eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSpectrum {
    pub sites: usize,
    pub excitations: usize,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub degenerate: bool,
}

impl SectorSpectrum {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    fn from_state(basis: &SectorBasis, gs: &GroundState) -> Self {
        Self {
            sites: basis.sites(),
            excitations: basis.excitations(),
            dim: basis.dim(),
            eigenvalues: gs.eigenvalues.clone(),
            residuals: gs.residuals.clone(),
            iterations: gs.iterations,
            degenerate: gs.degenerate,
        }
    }
}

/// Solver settings plus the per-sector energy memo.
#[derive(Debug)]
pub struct Session {
    eigen: EigenConfig,
    dimension_cap: u64,
    matrix_free_above: usize,
    cache: Mutex<HashMap<SectorKey, Arc<SectorSpectrum>>>,
}

impl Default for Session {
    fn default() -> Self {
        Self::new(EigenConfig::default())
    }
}

impl Session {
    pub fn new(eigen: EigenConfig) -> Self {
        Self {
            eigen,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            matrix_free_above: DEFAULT_MATRIX_FREE_ABOVE,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_dimension_cap(mut self, cap: u64) -> Self {
        self.dimension_cap = cap;
        self
    }

    pub fn with_matrix_free_above(mut self, dim: usize) -> Self {
        self.matrix_free_above = dim;
        self
    }

    pub fn eigen_config(&self) -> &EigenConfig {
        &self.eigen
    }

    pub fn dimension_cap(&self) -> u64 {
        self.dimension_cap
    }

    /// Number of memoized sectors.
    pub fn cached_sectors(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Ground state and basis of sector `excitations`, eigenvectors included.
    ///
    /// The spectrum is memoized as a side effect.
    pub fn solve(&self, params: &LatticeParams, excitations: usize) -> Result<(SectorBasis, GroundState)> {
        let params = params.validate()?;
        let dim = sector_dimension(params.sites, excitations)?;
        let cfg = EigenConfig {
            k: self.eigen.k.min(dim as usize),
            ..self.eigen
        };
        let basis = enumerate_sector(params.sites, excitations, self.dimension_cap)?;
        let gs = if basis.dim() > self.matrix_free_above {
            lowest_eigenpairs(&MatrixFreeHamiltonian::new(&params, &basis)?, &cfg)?
        } else {
            lowest_eigenpairs(&build_hamiltonian(&params, &basis)?, &cfg)?
        };
        log::debug!(
            "solved M={} N={} dim={} in {} matvecs: E0={:.6}",
            params.sites,
            excitations,
            basis.dim(),
            gs.iterations,
            gs.energy()
        );
        let spectrum = Arc::new(SectorSpectrum::from_state(&basis, &gs));
        self.cache
            .lock()
            .expect("cache lock")
            .insert(SectorKey::new(&params, excitations), spectrum);
        Ok((basis, gs))
    }

    /// Memoized spectrum of sector `excitations`.
    pub fn spectrum(&self, params: &LatticeParams, excitations: usize) -> Result<Arc<SectorSpectrum>> {
        let key = SectorKey::new(params, excitations);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        self.solve(params, excitations)?;
        Ok(Arc::clone(
            self.cache.lock().expect("cache lock").get(&key).expect("just inserted"),
        ))
    }

    /// Ground energy E(N) of sector `excitations`, in MHz.
    pub fn ground_energy(&self, params: &LatticeParams, excitations: usize) -> Result<f64> {
        Ok(self.spectrum(params, excitations)?.ground_energy())
    }
}

/// Unmemoized E(N) for one-off use.
pub fn ground_energy(params: &LatticeParams, excitations: usize, cfg: &EigenConfig) -> Result<f64> {
    Session::new(*cfg).ground_energy(params, excitations)
}
