//! Fixed-excitation-number sectors of the Fock ⊗ qubit product space.
//!
//! A site holds a photon number `n ≥ 0` and a qubit flag. A sector collects
//! every ring configuration whose total excitation number Σ(nᵢ + δᵢ) equals
//! N. States are ordered lexicographically on the flattened tuple
//! (n₁, δ₁, …, n_M, δ_M), and ranking is combinatorial: no hashing is
//! involved, so the ordering is identical on every run and platform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of states in a sector.
pub const DEFAULT_DIMENSION_CAP: u64 = 5_000_000;

/// Largest photon number representable in the packed per-site byte.
const MAX_SITE_PHOTONS: usize = 127;

/// Occupation of one qubit-resonator unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteState {
    /// Photon number of the resonator.
    pub n: u32,
    /// Qubit excited (↑) when true.
    pub excited: bool,
}

impl SiteState {
    pub const fn new(n: u32, excited: bool) -> Self {
        Self { n, excited }
    }

    pub fn excitations(&self) -> usize {
        self.n as usize + usize::from(self.excited)
    }

    fn pack(self) -> u8 {
        ((self.n as u8) << 1) | u8::from(self.excited)
    }

    fn unpack(code: u8) -> Self {
        Self {
            n: u32::from(code >> 1),
            excited: code & 1 == 1,
        }
    }
}

/// Photon number encoded in a packed site byte.
#[inline]
pub(crate) fn code_photons(code: u8) -> usize {
    (code >> 1) as usize
}

/// Qubit flag encoded in a packed site byte.
#[inline]
pub(crate) fn code_excited(code: u8) -> bool {
    code & 1 == 1
}

#[inline]
pub(crate) fn make_code(n: usize, excited: bool) -> u8 {
    ((n as u8) << 1) | u8::from(excited)
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Number of states in the (M, N) sector,
/// Σₖ C(M, k)·C(N − k + M − 1, M − 1) with k the number of excited qubits.
pub fn sector_dimension(sites: usize, excitations: usize) -> Result<u64> {
    if sites == 0 {
        return Err(Error::InvalidParams("M must be ≥ 1".into()));
    }
    let overflow = || Error::DimensionOverflow {
        sites,
        excitations,
    };
    let (m, n) = (sites as u64, excitations as u64);
    let mut total: u128 = 0;
    for k in 0..=m.min(n) {
        let qubits = binomial(m, k).ok_or_else(overflow)?;
        let photons = binomial(n - k + m - 1, m - 1).ok_or_else(overflow)?;
        total = qubits
            .checked_mul(photons)
            .and_then(|t| t.checked_add(total))
            .ok_or_else(overflow)?;
    }
    u64::try_from(total).map_err(|_| overflow())
}

/// Completion counts used by the ranking.
///
/// `completions[s][r]` is the number of ways to place exactly `r`
/// excitations on `s` sites; `prefix[s][r]` is Σ_{u ≤ r} pair(s, u) where
/// pair(s, u) = completions[s][u] + completions[s][u − 1] counts the ways to
/// fill one qubit flag plus `s` further sites with `u` excitations.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RankTables {
    completions: Vec<Vec<u64>>,
    prefix: Vec<Vec<u64>>,
}

impl RankTables {
    fn new(sites: usize, excitations: usize) -> Self {
        let width = excitations + 1;
        let mut completions = vec![vec![0u64; width]; sites + 1];
        completions[0][0] = 1;
        let mut prefix = vec![vec![0u64; width]; sites + 1];
        for s in 0..=sites {
            if s > 0 {
                for r in 0..width {
                    // one more site: choose its (n, δ) with n + δ = u ≤ r
                    completions[s][r] = prefix[s - 1][r];
                }
            }
            let mut acc = 0u64;
            for u in 0..width {
                let pair = completions[s][u] + if u > 0 { completions[s][u - 1] } else { 0 };
                acc += pair;
                prefix[s][u] = acc;
            }
        }
        Self {
            completions,
            prefix,
        }
    }

    #[inline]
    fn rank(&self, codes: &[u8], excitations: usize) -> Option<usize> {
        let sites = codes.len();
        let mut remaining = excitations;
        let mut index = 0u64;
        for (i, &code) in codes.iter().enumerate() {
            let after = sites - i - 1;
            let n = code_photons(code);
            let d = usize::from(code_excited(code));
            if n + d > remaining {
                return None;
            }
            if n > 0 {
                // every smaller photon value at this site, with either flag
                index += self.prefix[after][remaining] - self.prefix[after][remaining - n];
            }
            if d == 1 {
                index += self.completions[after][remaining - n];
            }
            remaining -= n + d;
        }
        (remaining == 0).then_some(index as usize)
    }
}

/// All configurations of one (M, N) sector with bidirectional index maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    sites: usize,
    excitations: usize,
    /// Packed site bytes, `sites` per state, states in lexicographic order.
    codes: Vec<u8>,
    tables: RankTables,
}

impl SectorBasis {
    /// Enumerate the (M, N) sector with the default dimension cap.
    pub fn new(sites: usize, excitations: usize) -> Result<Self> {
        enumerate_sector(sites, excitations, DEFAULT_DIMENSION_CAP)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn excitations(&self) -> usize {
        self.excitations
    }

    pub fn dim(&self) -> usize {
        self.codes.len() / self.sites
    }

    /// Packed codes of state `index`.
    #[inline]
    pub(crate) fn codes(&self, index: usize) -> &[u8] {
        &self.codes[index * self.sites..(index + 1) * self.sites]
    }

    /// Rank of a packed configuration, `None` if it lies outside the sector.
    #[inline]
    pub(crate) fn rank_codes(&self, codes: &[u8]) -> Option<usize> {
        if codes.len() != self.sites {
            return None;
        }
        self.tables.rank(codes, self.excitations)
    }

    /// Ordinal of `config` in this sector.
    pub fn rank(&self, config: &[SiteState]) -> Result<usize> {
        if config.len() != self.sites {
            return Err(Error::NotAMember(format!(
                "configuration has {} sites, sector has {}",
                config.len(),
                self.sites
            )));
        }
        let total: usize = config.iter().map(SiteState::excitations).sum();
        if total != self.excitations || config.iter().any(|s| s.n as usize > MAX_SITE_PHOTONS) {
            return Err(Error::NotAMember(format!(
                "total excitation {total} differs from sector N = {}",
                self.excitations
            )));
        }
        let codes: Vec<u8> = config.iter().map(|s| s.pack()).collect();
        self.rank_codes(&codes)
            .ok_or_else(|| Error::NotAMember(format!("{config:?}")))
    }

    /// Configuration stored at ordinal `index`.
    pub fn unrank(&self, index: usize) -> Result<Vec<SiteState>> {
        if index >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.dim(),
            });
        }
        Ok(self.codes(index).iter().map(|&c| SiteState::unpack(c)).collect())
    }

    /// Iterate over all configurations in order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<SiteState>> + '_ {
        self.codes
            .chunks_exact(self.sites)
            .map(|c| c.iter().map(|&b| SiteState::unpack(b)).collect())
    }
}

/// Enumerate the (M, N) sector in lexicographic order.
///
/// Fails with [`Error::ResourceCap`] when the predicted dimension exceeds
/// `cap`.
pub fn enumerate_sector(sites: usize, excitations: usize, cap: u64) -> Result<SectorBasis> {
    let dim = sector_dimension(sites, excitations)?;
    if dim > cap {
        return Err(Error::ResourceCap {
            sites,
            excitations,
            dim,
            cap,
        });
    }
    if excitations > MAX_SITE_PHOTONS {
        return Err(Error::InvalidParams(format!(
            "N = {excitations} exceeds the supported maximum of {MAX_SITE_PHOTONS}"
        )));
    }
    let mut codes = Vec::with_capacity(dim as usize * sites);
    let mut current = vec![0u8; sites];
    fill(&mut current, 0, excitations, &mut codes);
    debug_assert_eq!(codes.len(), dim as usize * sites);
    Ok(SectorBasis {
        sites,
        excitations,
        codes,
        tables: RankTables::new(sites, excitations),
    })
}

fn fill(current: &mut [u8], site: usize, remaining: usize, out: &mut Vec<u8>) {
    let last = site + 1 == current.len();
    for n in 0..=remaining {
        for excited in [false, true] {
            let used = n + usize::from(excited);
            if used > remaining || (last && used != remaining) {
                continue;
            }
            current[site] = make_code(n, excited);
            if last {
                out.extend_from_slice(current);
            } else {
                fill(current, site + 1, remaining - used, out);
            }
        }
    }
}
