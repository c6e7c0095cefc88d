//! Grand-canonical ground states by minimizing E(N) − μN over sectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LatticeParams;
use crate::observables::{gaps, rho1_profile};
use crate::session::Session;

/// Free energies closer than this are reported as ties.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GceConfig {
    /// Largest sector considered; 2M + 2 when unset.
    pub n_max: Option<usize>,
    /// Chemical potentials in MHz, ascending.
    pub mu_grid: Vec<f64>,
    /// Lattice sizes for extrapolated boundaries.
    pub sizes: Vec<usize>,
}

impl Default for GceConfig {
    fn default() -> Self {
        Self {
            n_max: None,
            mu_grid: Vec::new(),
            sizes: vec![3, 4, 5, 6],
        }
    }
}

impl GceConfig {
    pub fn new(mu_grid: Vec<f64>) -> Self {
        Self {
            mu_grid,
            ..Self::default()
        }
    }

    pub fn n_max_for(&self, sites: usize) -> usize {
        self.n_max.unwrap_or(2 * sites + 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == Some(0) {
            return Err(Error::InvalidConfig("N_max must be ≥ 1".into()));
        }
        if self.mu_grid.is_empty() {
            return Err(Error::InvalidConfig("mu grid is empty".into()));
        }
        if self.mu_grid.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidConfig("mu grid has non-finite entries".into()));
        }
        if self.mu_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidConfig("mu grid must be sorted".into()));
        }
        if self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("lattice sizes must be ascending".into()));
        }
        Ok(())
    }
}

/// Minimizer of E(N) − μN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GceGround {
    pub excitations: usize,
    pub free_energy: f64,
    /// The minimum sits at N_max, so larger fillings were not explored.
    pub saturated: bool,
    /// Another sector came within the tie tolerance; the smaller N was kept.
    pub tie: bool,
}

/// Ground energies E(0..=n_max), solved in parallel through the memo.
pub fn sector_energies(session: &Session, params: &LatticeParams, n_max: usize) -> Result<Vec<f64>> {
    (0..=n_max)
        .into_par_iter()
        .map(|n| session.ground_energy(params, n))
        .collect()
}

fn minimize(energies: &[f64], mu: f64) -> GceGround {
    let mut best = 0;
    let mut best_f = energies[0];
    let mut tie = false;
    for (n, &e) in energies.iter().enumerate().skip(1) {
        let f = e - mu * n as f64;
        if f < best_f {
            tie = best_f - f <= TIE_TOL;
            best = n;
            best_f = f;
        } else if f - best_f <= TIE_TOL {
            tie = true;
        }
    }
    GceGround {
        excitations: best,
        free_energy: best_f,
        saturated: best + 1 == energies.len(),
        tie,
    }
}

pub fn gce_ground(session: &Session, params: &LatticeParams, mu: f64, n_max: usize) -> Result<GceGround> {
    if n_max == 0 {
        return Err(Error::InvalidConfig("N_max must be ≥ 1".into()));
    }
    let energies = sector_energies(session, params, n_max)?;
    let ground = minimize(&energies, mu);
    if ground.tie {
        log::debug!("tie in GCE minimization at μ={mu}, keeping N={}", ground.excitations);
    }
    if ground.saturated {
        log::warn!("GCE minimum at N_max={n_max} for μ={mu}");
    }
    Ok(ground)
}

/// One μ point of the staircase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub mu: f64,
    pub excitations: usize,
    /// n = N/M.
    pub density: f64,
    /// ρ₁ at the largest separation in the winning sector; absent for N = 0.
    pub rho1_max: Option<f64>,
    pub saturated: bool,
    pub degenerate: bool,
}

/// μ-interval over which sector N is the grand-canonical ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub excitations: usize,
    pub density: f64,
    pub mu_lower: f64,
    pub mu_upper: f64,
}

impl Plateau {
    pub fn width(&self) -> f64 {
        self.mu_upper - self.mu_lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub sites: usize,
    pub n_max: usize,
    /// E(N) for N = 0..=n_max.
    pub energies: Vec<f64>,
    pub rows: Vec<DensityRow>,
    /// Sectors that win for some μ, in increasing N.
    pub plateaus: Vec<Plateau>,
    /// E(N) has non-negative second differences.
    pub convex: bool,
}

impl DensityCurve {
    pub fn plateau(&self, excitations: usize) -> Option<&Plateau> {
        self.plateaus.iter().find(|p| p.excitations == excitations)
    }
}

/// Exact μ-ranges of every winning sector.
pub fn plateaus(energies: &[f64], sites: usize) -> Vec<Plateau> {
    let last = energies.len() - 1;
    (0..=last)
        .filter_map(|n| {
            let lower = (0..n)
                .map(|m| (energies[n] - energies[m]) / (n - m) as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            let upper = (n + 1..=last)
                .map(|m| (energies[m] - energies[n]) / (m - n) as f64)
                .fold(f64::INFINITY, f64::min);
            (lower < upper).then_some(Plateau {
                excitations: n,
                density: n as f64 / sites as f64,
                mu_lower: lower,
                mu_upper: upper,
            })
        })
        .collect()
}

/// n(μ) and ρ₁(x_max) across `cfg.mu_grid`.
pub fn density_curve(session: &Session, params: &LatticeParams, cfg: &GceConfig) -> Result<DensityCurve> {
    cfg.validate()?;
    let params = params.validate()?;
    let n_max = cfg.n_max_for(params.sites);
    let energies = sector_energies(session, &params, n_max)?;
    let grounds: Vec<GceGround> = cfg.mu_grid.iter().map(|&mu| minimize(&energies, mu)).collect();
    if grounds.windows(2).any(|w| w[1].excitations < w[0].excitations) {
        return Err(Error::Consistency("N(μ) decreases along an ascending μ grid".into()));
    }
    if grounds.iter().any(|g| g.saturated) {
        log::warn!("density curve reaches N_max={n_max}");
    }

    let mut winners: Vec<usize> = grounds.iter().map(|g| g.excitations).collect();
    winners.dedup();
    let profiles: Vec<(usize, Option<f64>, bool)> = winners
        .par_iter()
        .map(|&n| {
            if n == 0 {
                return Ok((n, None, false));
            }
            let (basis, state) = session.solve(&params, n)?;
            let profile = rho1_profile(&state, &basis)?;
            Ok((n, Some(profile.at_max_distance()), profile.degenerate))
        })
        .collect::<Result<_>>()?;
    let lookup = |n: usize| profiles.iter().find(|p| p.0 == n).expect("solved winner");

    let rows = cfg
        .mu_grid
        .iter()
        .zip(&grounds)
        .map(|(&mu, g)| {
            let (_, rho, degenerate) = *lookup(g.excitations);
            DensityRow {
                mu,
                excitations: g.excitations,
                density: g.excitations as f64 / params.sites as f64,
                rho1_max: rho,
                saturated: g.saturated,
                degenerate,
            }
        })
        .collect();
    let convex = energies.windows(3).all(|w| w[2] - w[1] >= w[1] - w[0]);
    Ok(DensityCurve {
        sites: params.sites,
        n_max,
        plateaus: plateaus(&energies, params.sites),
        energies,
        rows,
        convex,
    })
}

/// Plateau edges of integer filling n on an M-site ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalMus {
    pub sites: usize,
    pub filling: usize,
    /// E(nM) − E(nM − 1).
    pub mu_minus: f64,
    /// E(nM + 1) − E(nM).
    pub mu_plus: f64,
}

impl CriticalMus {
    pub fn width(&self) -> f64 {
        self.mu_plus - self.mu_minus
    }
}

pub fn critical_mus(session: &Session, params: &LatticeParams, filling: usize) -> Result<CriticalMus> {
    if filling == 0 {
        return Err(Error::InvalidParams("filling must be ≥ 1".into()));
    }
    let record = gaps(session, params, filling * params.sites)?;
    if record.charge_gap < 0.0 {
        log::warn!(
            "negative gap {:.3e} MHz at M={} n={filling}",
            record.charge_gap,
            params.sites
        );
    }
    Ok(CriticalMus {
        sites: params.sites,
        filling,
        mu_minus: record.en_minus,
        mu_plus: record.en_plus,
    })
}
