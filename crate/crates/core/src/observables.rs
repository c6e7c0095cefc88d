//! Ground-state observables: single-particle density matrix, qubit and
//! quadrature correlations, charge gap and excitation gap.
//!
//! Correlators are evaluated in-sector by configuration arithmetic: every
//! operator used here conserves N, so `⟨G|O|G⟩` is a sum over basis states
//! of `v[c'] · amplitude · v[c]` with `c'` the ranked image of `c`.

use serde::{Deserialize, Serialize};

use crate::basis::{code_excited, code_photons, make_code, SectorBasis};
use crate::eigensolver::GroundState;
use crate::error::{Error, Result};
use crate::model::LatticeParams;
use crate::session::Session;

/// Default bound on the spread of ρ₁(i, i + x) over i.
pub const TRANSLATION_TOL: f64 = 1e-8;

/// Bound on the anomalous ⟨aa⟩, ⟨a†a†⟩ parts of a quadrature correlator.
pub const ANOMALOUS_TOL: f64 = 1e-12;

fn check_state(v: &[f64], basis: &SectorBasis) -> Result<()> {
    if v.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: v.len(),
        });
    }
    Ok(())
}

fn check_site(basis: &SectorBasis, site: usize) -> Result<()> {
    if site >= basis.sites() {
        return Err(Error::IndexOutOfRange {
            index: site,
            dim: basis.sites(),
        });
    }
    Ok(())
}

/// ⟨a_i† a_i⟩.
pub fn photon_number(v: &[f64], basis: &SectorBasis, site: usize) -> Result<f64> {
    check_state(v, basis)?;
    check_site(basis, site)?;
    Ok((0..basis.dim())
        .map(|r| v[r] * v[r] * code_photons(basis.codes(r)[site]) as f64)
        .sum())
}

/// ⟨σ_i⁺ σ_i⁻⟩.
pub fn qubit_occupation(v: &[f64], basis: &SectorBasis, site: usize) -> Result<f64> {
    check_state(v, basis)?;
    check_site(basis, site)?;
    Ok((0..basis.dim())
        .filter(|&r| code_excited(basis.codes(r)[site]))
        .map(|r| v[r] * v[r])
        .sum())
}

/// ⟨N̂⟩ = Σᵢ ⟨a_i†a_i + σ_i⁺σ_i⁻⟩ evaluated site by site.
pub fn total_excitation(v: &[f64], basis: &SectorBasis) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..basis.sites() {
        total += photon_number(v, basis, i)? + qubit_occupation(v, basis, i)?;
    }
    Ok(total)
}

/// Unnormalized ⟨a_i† a_j⟩.
pub fn hopping_expectation(v: &[f64], basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    check_state(v, basis)?;
    check_site(basis, i)?;
    check_site(basis, j)?;
    if i == j {
        return photon_number(v, basis, i);
    }
    let mut scratch = vec![0u8; basis.sites()];
    let mut acc = 0.0;
    for r in 0..basis.dim() {
        let codes = basis.codes(r);
        let nj = code_photons(codes[j]);
        if nj == 0 || v[r] == 0.0 {
            continue;
        }
        let ni = code_photons(codes[i]);
        scratch.copy_from_slice(codes);
        scratch[j] = make_code(nj - 1, code_excited(codes[j]));
        scratch[i] = make_code(ni + 1, code_excited(codes[i]));
        let target = basis.rank_codes(&scratch).expect("a†a conserves N");
        acc += v[target] * ((nj * (ni + 1)) as f64).sqrt() * v[r];
    }
    Ok(acc)
}

/// ⟨σ_i⁺σ_j⁻ + σ_j⁺σ_i⁻⟩ on a raw vector.
pub fn qubit_exchange(v: &[f64], basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    check_state(v, basis)?;
    check_site(basis, i)?;
    check_site(basis, j)?;
    if i == j {
        return Ok(2.0 * qubit_occupation(v, basis, i)?);
    }
    let mut scratch = vec![0u8; basis.sites()];
    let mut acc = 0.0;
    for r in 0..basis.dim() {
        let codes = basis.codes(r);
        for (raise, lower) in [(i, j), (j, i)] {
            if code_excited(codes[raise]) || !code_excited(codes[lower]) {
                continue;
            }
            scratch.copy_from_slice(codes);
            scratch[raise] = make_code(code_photons(codes[raise]), true);
            scratch[lower] = make_code(code_photons(codes[lower]), false);
            let target = basis.rank_codes(&scratch).expect("σ⁺σ⁻ conserves N");
            acc += v[target] * v[r];
        }
    }
    Ok(acc)
}

/// ρ₁(i, j) = ⟨a_i†a_j⟩ / ⟨a_i†a_i⟩ on the lowest eigenvector.
pub fn rho1(state: &GroundState, basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    let v = state.vector();
    let diag = photon_number(v, basis, i)?;
    if diag == 0.0 {
        return Err(Error::ZeroDiagonal { site: i });
    }
    if i == j {
        return Ok(1.0);
    }
    Ok(hopping_expectation(v, basis, i, j)? / diag)
}

/// Full ρ₁(i, j) matrix.
pub fn rho1_matrix(state: &GroundState, basis: &SectorBasis) -> Result<Vec<Vec<f64>>> {
    let m = basis.sites();
    (0..m)
        .map(|i| (0..m).map(|j| rho1(state, basis, i, j)).collect())
        .collect()
}

/// ρ₁ as a function of ring distance, averaged over translations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rho1Profile {
    pub sites: usize,
    pub excitations: usize,
    /// ρ₁(x) for x = 0..=⌊M/2⌋.
    pub values: Vec<f64>,
    /// Site average of ⟨a_i†a_i⟩.
    pub photon_density: f64,
    /// Largest |ρ₁(i, i + x) − ρ₁(x)| over i and x.
    pub translation_residual: f64,
    /// Ground level flagged degenerate; values use the lowest vector only.
    pub degenerate: bool,
}

impl Rho1Profile {
    /// ρ₁ at the largest ring distance ⌊M/2⌋.
    pub fn at_max_distance(&self) -> f64 {
        *self.values.last().expect("profile has at least x = 0")
    }

    pub fn is_translation_invariant(&self, tol: f64) -> bool {
        self.translation_residual <= tol
    }
}

pub fn rho1_profile(state: &GroundState, basis: &SectorBasis) -> Result<Rho1Profile> {
    let m = basis.sites();
    let v = state.vector();
    let diagonals = (0..m)
        .map(|i| photon_number(v, basis, i))
        .collect::<Result<Vec<_>>>()?;
    if let Some(site) = diagonals.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { site });
    }
    let max_distance = m / 2;
    let mut values = Vec::with_capacity(max_distance + 1);
    let mut residual: f64 = 0.0;
    for x in 0..=max_distance {
        let pairs = (0..m)
            .map(|i| {
                let j = (i + x) % m;
                if x == 0 {
                    Ok(1.0)
                } else {
                    Ok(hopping_expectation(v, basis, i, j)? / diagonals[i])
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = pairs.iter().sum::<f64>() / m as f64;
        residual = pairs.iter().fold(residual, |r, p| r.max((p - mean).abs()));
        values.push(mean);
    }
    Ok(Rho1Profile {
        sites: m,
        excitations: basis.excitations(),
        values,
        photon_density: diagonals.iter().sum::<f64>() / m as f64,
        translation_residual: residual,
        degenerate: state.degenerate,
    })
}

/// ⟨σ_i⁺σ_j⁻ + σ_j⁺σ_i⁻⟩ on the lowest eigenvector.
pub fn qubit_correlation(state: &GroundState, basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    qubit_exchange(state.vector(), basis, i, j)
}

/// ⟨a_i a_j⟩ evaluated in-sector. The image of a state under a_i a_j has
/// N − 2 excitations and never ranks into the sector, so this is zero for
/// any sector eigenvector; it is computed rather than assumed.
fn anomalous_part(v: &[f64], basis: &SectorBasis, i: usize, j: usize) -> f64 {
    let mut scratch = vec![0u8; basis.sites()];
    let mut acc = 0.0;
    for r in 0..basis.dim() {
        let codes = basis.codes(r);
        scratch.copy_from_slice(codes);
        let nj = code_photons(scratch[j]);
        if nj == 0 {
            continue;
        }
        scratch[j] = make_code(nj - 1, code_excited(scratch[j]));
        let ni = code_photons(scratch[i]);
        if ni == 0 {
            continue;
        }
        scratch[i] = make_code(ni - 1, code_excited(scratch[i]));
        if let Some(t) = basis.rank_codes(&scratch) {
            acc += v[t] * ((nj * ni) as f64).sqrt() * v[r];
        }
    }
    acc
}

/// ⟨X_i X_j⟩ with X = a + a†, unnormalized.
///
/// Equals ⟨a_i†a_j⟩ + ⟨a_j†a_i⟩ + δᵢⱼ plus the anomalous ⟨aa⟩ and ⟨a†a†⟩
/// parts, which must vanish in a fixed-N state.
pub fn quadrature_correlation_raw(state: &GroundState, basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    let v = state.vector();
    let anomalous = anomalous_part(v, basis, i, j);
    if anomalous.abs() > ANOMALOUS_TOL {
        return Err(Error::Consistency(format!(
            "anomalous quadrature part {anomalous:e} exceeds {ANOMALOUS_TOL:e}"
        )));
    }
    let forward = hopping_expectation(v, basis, i, j)?;
    let backward = hopping_expectation(v, basis, j, i)?;
    let commutator = if i == j { 1.0 } else { 0.0 };
    // ⟨aa⟩ + ⟨a†a†⟩ = 2·anomalous for a real state
    Ok(forward + backward + commutator + 2.0 * anomalous)
}

/// ⟨X_i X_j⟩ / ⟨a_i†a_i⟩, which equals 2ρ₁(i, j) for i ≠ j.
pub fn quadrature_correlation(state: &GroundState, basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    let diag = photon_number(state.vector(), basis, i)?;
    if diag == 0.0 {
        return Err(Error::ZeroDiagonal { site: i });
    }
    Ok(quadrature_correlation_raw(state, basis, i, j)? / diag)
}

/// Charge and excitation gaps around sector N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub sites: usize,
    pub excitations: usize,
    /// E(N − 1).
    pub e_minus: f64,
    /// E(N).
    pub e: f64,
    /// E(N + 1).
    pub e_plus: f64,
    /// E(N + 1) − E(N).
    pub en_plus: f64,
    /// E(N) − E(N − 1).
    pub en_minus: f64,
    /// E_gp = E_{N+} − E_{N−}.
    pub charge_gap: f64,
    /// E_x = λ₁(N) − λ₀(N), when two levels were solved.
    pub excitation_gap: Option<f64>,
    /// Degeneracy flags of sectors N − 1, N, N + 1.
    pub degenerate: [bool; 3],
}

/// Solve sectors N − 1, N, N + 1 and form the gaps.
pub fn gaps(session: &Session, params: &LatticeParams, excitations: usize) -> Result<GapRecord> {
    if excitations == 0 {
        return Err(Error::InvalidParams("gaps need N ≥ 1".into()));
    }
    let (lower, (centre, upper)) = rayon::join(
        || session.spectrum(params, excitations - 1),
        || {
            rayon::join(
                || session.spectrum(params, excitations),
                || session.spectrum(params, excitations + 1),
            )
        },
    );
    let (lower, centre, upper) = (lower?, centre?, upper?);
    let (e_minus, e, e_plus) = (lower.ground_energy(), centre.ground_energy(), upper.ground_energy());
    let en_plus = e_plus - e;
    let en_minus = e - e_minus;
    Ok(GapRecord {
        sites: params.sites,
        excitations,
        e_minus,
        e,
        e_plus,
        en_plus,
        en_minus,
        charge_gap: en_plus - en_minus,
        excitation_gap: centre.eigenvalues.get(1).map(|e1| e1 - e),
        degenerate: [lower.degenerate, centre.degenerate, upper.degenerate],
    })
}
