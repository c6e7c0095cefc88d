//! Mott-lobe boundaries, gap extrapolation and the critical coupling ratio.
//!
//! Chemical potentials here are reported relative to ω_c.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extrapolate::{extrapolate, Extrapolation};
use super::gce::critical_mus;
use crate::error::{Error, Result};
use crate::model::LatticeParams;
use crate::observables::gaps;
use crate::session::Session;

/// Note attached to critical-ratio results.
pub const FINITE_SIZE_NOTE: &str =
    "finite-size estimate: small-lattice extrapolation cannot locate critical points accurately";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseConfig {
    pub sizes: Vec<usize>,
    pub degree: usize,
    pub fillings: Vec<usize>,
    /// Extrapolated lobe width above which a filling counts as Mott, MHz.
    pub mott_tol: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            sizes: vec![3, 4, 5, 6],
            degree: 3,
            fillings: vec![1, 2],
            mott_tol: 5.0,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < self.degree + 1 {
            return Err(Error::InvalidConfig(format!(
                "degree {} needs at least {} lattice sizes",
                self.degree,
                self.degree + 1
            )));
        }
        if self.sizes.windows(2).any(|w| w[1] <= w[0]) || self.sizes.first() == Some(&0) {
            return Err(Error::InvalidConfig("lattice sizes must be ascending and positive".into()));
        }
        if self.fillings.is_empty() || self.fillings.contains(&0) {
            return Err(Error::InvalidConfig("fillings must be ≥ 1".into()));
        }
        if !(self.mott_tol >= 0.0) {
            return Err(Error::InvalidConfig("mott tolerance must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// μ±(n) − ω_c for each lattice size and their M → ∞ limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeBoundary {
    pub filling: usize,
    pub sizes: Vec<usize>,
    pub mu_minus: Vec<f64>,
    pub mu_plus: Vec<f64>,
    pub mu_minus_inf: f64,
    pub mu_plus_inf: f64,
    /// μ⁰₊ − μ⁰₋.
    pub gap_inf: f64,
    pub mott: bool,
    /// Some finite-size lobe has μ₊ < μ₋.
    pub inverted: bool,
    pub unstable: bool,
}

pub fn lobe_boundaries(session: &Session, params: &LatticeParams, filling: usize, cfg: &PhaseConfig) -> Result<LobeBoundary> {
    let edges = cfg
        .sizes
        .par_iter()
        .map(|&m| critical_mus(session, &params.with_sites(m), filling))
        .collect::<Result<Vec<_>>>()?;
    let mu_minus: Vec<f64> = edges.iter().map(|e| e.mu_minus - params.omega_c).collect();
    let mu_plus: Vec<f64> = edges.iter().map(|e| e.mu_plus - params.omega_c).collect();
    let lower = extrapolate(&cfg.sizes, &mu_minus, cfg.degree)?;
    let upper = extrapolate(&cfg.sizes, &mu_plus, cfg.degree)?;
    let gap_inf = upper.intercept - lower.intercept;
    Ok(LobeBoundary {
        filling,
        sizes: cfg.sizes.clone(),
        inverted: edges.iter().any(|e| e.width() < 0.0),
        mu_minus,
        mu_plus,
        mu_minus_inf: lower.intercept,
        mu_plus_inf: upper.intercept,
        gap_inf,
        mott: gap_inf > cfg.mott_tol,
        unstable: lower.unstable || upper.unstable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// λ = ln(g_r/g_l), when the point comes from a λ sweep.
    pub lambda: Option<f64>,
    pub delta: f64,
    pub g_l: f64,
    pub g_r: f64,
    pub lobes: Vec<LobeBoundary>,
}

/// (g_l, g_r) with g_l + g_r = g_sum and ln(g_r/g_l) = λ.
pub fn lambda_couplings(g_sum: f64, lambda: f64) -> (f64, f64) {
    let g_r = g_sum / (1.0 + (-lambda).exp());
    (g_sum - g_r, g_r)
}

fn phase_point(session: &Session, params: LatticeParams, lambda: Option<f64>, cfg: &PhaseConfig) -> Result<PhasePoint> {
    let lobes = cfg
        .fillings
        .iter()
        .map(|&n| lobe_boundaries(session, &params, n, cfg))
        .collect::<Result<_>>()?;
    Ok(PhasePoint {
        lambda,
        delta: params.delta,
        g_l: params.g_l,
        g_r: params.g_r,
        lobes,
    })
}

/// Lobe boundaries along λ at fixed g_l + g_r. `base` supplies ω_c and Δ.
pub fn phase_diagram_lambda(
    session: &Session,
    base: &LatticeParams,
    g_sum: f64,
    lambdas: &[f64],
    cfg: &PhaseConfig,
) -> Result<Vec<PhasePoint>> {
    if !(g_sum > 0.0) {
        return Err(Error::InvalidParams("g_sum must be > 0".into()));
    }
    cfg.validate()?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let (g_l, g_r) = lambda_couplings(g_sum, lambda);
            phase_point(session, base.with_couplings(g_l, g_r).validate()?, Some(lambda), cfg)
        })
        .collect()
}

/// Lobe boundaries along Δ. `base` supplies ω_c and the couplings.
pub fn phase_diagram_delta(
    session: &Session,
    base: &LatticeParams,
    deltas: &[f64],
    cfg: &PhaseConfig,
) -> Result<Vec<PhasePoint>> {
    cfg.validate()?;
    deltas
        .par_iter()
        .map(|&delta| phase_point(session, base.with_delta(delta).validate()?, None, cfg))
        .collect()
}

/// E_gp(M) at filling n for several M, with its 1/M extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapExtrapolation {
    pub filling: usize,
    pub sizes: Vec<usize>,
    pub gaps: Vec<f64>,
    pub excitation_gaps: Vec<Option<f64>>,
    pub fit: Extrapolation,
}

impl GapExtrapolation {
    pub fn intercept(&self) -> f64 {
        self.fit.intercept
    }
}

pub fn extrapolated_gap(
    session: &Session,
    params: &LatticeParams,
    sizes: &[usize],
    degree: usize,
    filling: usize,
) -> Result<GapExtrapolation> {
    if filling == 0 {
        return Err(Error::InvalidParams("filling must be ≥ 1".into()));
    }
    let records = sizes
        .par_iter()
        .map(|&m| gaps(session, &params.with_sites(m), filling * m))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = records.iter().map(|r| r.charge_gap).collect();
    let fit = extrapolate(sizes, &values, degree)?;
    if fit.unstable {
        log::debug!("unstable gap extrapolation at g_l={} g_r={}", params.g_l, params.g_r);
    }
    Ok(GapExtrapolation {
        filling,
        sizes: sizes.to_vec(),
        gaps: values,
        excitation_gaps: records.iter().map(|r| r.excitation_gap).collect(),
        fit,
    })
}

/// Which side of g_r = g_l to scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioSide {
    /// Ratios in (0, 1]: the Mott region extends up from small g_r/g_l.
    Below,
    /// Ratios ≥ 1: the Mott region extends down from large g_r/g_l.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalRatioConfig {
    /// Coarse grid of g_r/g_l values, all on `side`.
    pub ratios: Vec<f64>,
    pub side: RatioSide,
    pub sizes: Vec<usize>,
    pub degree: usize,
    /// E⁰_gp threshold separating gapped from gapless, MHz.
    pub gap_tol: f64,
    /// Bisection stops once the bracket in min(r, 1/r) is this narrow.
    pub resolution: f64,
}

impl Default for CriticalRatioConfig {
    fn default() -> Self {
        Self {
            ratios: (1..=10).map(|i| i as f64 / 10.0).collect(),
            side: RatioSide::Below,
            sizes: vec![4, 5, 6, 7, 8],
            degree: 4,
            gap_tol: 5.0,
            resolution: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRatio {
    /// Edge of the gapped region, walking in from the decoupled end.
    pub ratio: f64,
    pub side: RatioSide,
    pub gap_tol: f64,
    /// (g_r/g_l, E⁰_gp) for every ratio evaluated, in evaluation order.
    pub scanned: Vec<(f64, f64)>,
    /// The gap closed inside the grid and the edge was refined.
    pub bracketed: bool,
    pub note: String,
}

/// Scan g_r/g_l at fixed g_l + g_r from the decoupled end towards 1, then
/// bisect the first bracket where E⁰_gp drops to `gap_tol` or below.
/// `base` supplies ω_c and Δ.
///
/// Both sides are scanned in x = min(r, 1/r), so the two estimates are
/// reciprocal whenever the gap is symmetric under g_l ↔ g_r.
pub fn critical_ratio_estimate(
    session: &Session,
    base: &LatticeParams,
    g_sum: f64,
    cfg: &CriticalRatioConfig,
) -> Result<CriticalRatio> {
    if !(g_sum > 0.0) {
        return Err(Error::InvalidParams("g_sum must be > 0".into()));
    }
    if cfg.gap_tol.is_nan() {
        return Err(Error::InvalidConfig("gap tolerance is NaN".into()));
    }
    if !(cfg.resolution > 0.0) {
        return Err(Error::InvalidConfig("ratio resolution must be > 0".into()));
    }
    let side = cfg.side;
    let in_range = |r: f64| match side {
        RatioSide::Below => r > 0.0 && r <= 1.0,
        RatioSide::Above => r >= 1.0 && r.is_finite(),
    };
    if cfg.ratios.is_empty() || cfg.ratios.iter().any(|&r| !in_range(r)) {
        return Err(Error::InvalidConfig(format!(
            "ratio grid empty or outside the {side:?} range"
        )));
    }
    let to_ratio = |x: f64| match side {
        RatioSide::Below => x,
        RatioSide::Above => 1.0 / x,
    };
    let mut grid: Vec<f64> = cfg.ratios.iter().map(|&r| to_ratio(r)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut scanned = Vec::new();
    let mut gap_at = |x: f64| -> Result<f64> {
        let ratio = to_ratio(x);
        let g_l = g_sum / (1.0 + ratio);
        let params = base.with_couplings(g_l, g_sum - g_l).validate()?;
        let gap = extrapolated_gap(session, &params, &cfg.sizes, cfg.degree, 1)?.intercept();
        scanned.push((ratio, gap));
        Ok(gap)
    };

    let mut open = None;
    let mut closed = None;
    for &x in &grid {
        if gap_at(x)? > cfg.gap_tol {
            open = Some(x);
        } else {
            closed = Some(x);
            break;
        }
    }
    let mut lo = open.ok_or(Error::RatioGridExhausted { gap_tol: cfg.gap_tol })?;
    if let Some(mut hi) = closed {
        while hi - lo > cfg.resolution {
            let mid = 0.5 * (lo + hi);
            if gap_at(mid)? > cfg.gap_tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(CriticalRatio {
        ratio: to_ratio(lo),
        side,
        gap_tol: cfg.gap_tol,
        scanned,
        bracketed: closed.is_some(),
        note: FINITE_SIZE_NOTE.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analytic::effective_u_pair;

    #[test]
    fn lambda_parameterization() {
        let (gl, gr) = lambda_couplings(300.0, 0.0);
        assert_eq!((gl, gr), (150.0, 150.0));
        let (gl, gr) = lambda_couplings(300.0, 1.3);
        assert!((gl + gr - 300.0).abs() < 1e-12);
        assert!(((gr / gl).ln() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn decoupled_lobe_width_is_u() {
        let p = LatticeParams::new(3, 10_000.0, 0.0, 0.0, 250.0);
        let cfg = PhaseConfig {
            sizes: vec![2, 3],
            degree: 1,
            fillings: vec![1],
            ..PhaseConfig::default()
        };
        let lobe = lobe_boundaries(&Session::default(), &p, 1, &cfg).unwrap();
        let u = effective_u_pair(0.0, 250.0);
        assert!((lobe.gap_inf - u).abs() < 1e-8 * u);
        assert!(lobe.mott);
        assert!(!lobe.inverted);
    }

    #[test]
    fn lobes_shift_with_omega_c() {
        let cfg = PhaseConfig {
            sizes: vec![2, 3],
            degree: 1,
            fillings: vec![1],
            ..PhaseConfig::default()
        };
        let s = Session::default();
        let p = LatticeParams::new(3, 10_000.0, 30.0, 60.0, 200.0);
        let a = lobe_boundaries(&s, &p, 1, &cfg).unwrap();
        let q = p.with_omega_c(10_500.0);
        let b = lobe_boundaries(&s, &q, 1, &cfg).unwrap();
        assert!((a.mu_minus_inf - b.mu_minus_inf).abs() < 1e-8 * p.omega_c);
        assert!((a.mu_plus_inf - b.mu_plus_inf).abs() < 1e-8 * p.omega_c);
    }

    fn small_config(ratios: Vec<f64>, side: RatioSide, gap_tol: f64) -> CriticalRatioConfig {
        CriticalRatioConfig {
            ratios,
            side,
            sizes: vec![2, 3],
            degree: 1,
            gap_tol,
            resolution: 0.01,
        }
    }

    #[test]
    fn infinite_tolerance_exhausts_the_grid() {
        let p = LatticeParams::new(3, 10_000.0, 0.0, 150.0, 150.0);
        let s = Session::default();
        let r = critical_ratio_estimate(&s, &p, 300.0, &small_config(vec![0.1], RatioSide::Below, f64::INFINITY));
        assert!(matches!(r, Err(Error::RatioGridExhausted { .. })));
        assert!(critical_ratio_estimate(&s, &p, 300.0, &small_config(vec![1.5], RatioSide::Below, 5.0)).is_err());
        assert!(critical_ratio_estimate(&s, &p, 300.0, &small_config(vec![0.5], RatioSide::Above, 5.0)).is_err());
    }

    #[test]
    fn small_ratio_is_gapped() {
        let p = LatticeParams::new(3, 10_000.0, 0.0, 150.0, 150.0);
        let cfg = small_config(vec![0.02, 0.05], RatioSide::Below, 5.0);
        let r = critical_ratio_estimate(&Session::default(), &p, 300.0, &cfg).unwrap();
        assert_eq!(r.ratio, 0.05);
        assert!(!r.bracketed);
        assert_eq!(r.note, FINITE_SIZE_NOTE);
    }

    #[test]
    fn bisection_refines_and_sides_are_reciprocal() {
        let p = LatticeParams::new(3, 10_000.0, 0.0, 150.0, 150.0);
        let s = Session::default();
        let below = small_config(vec![0.05, 0.6, 1.0], RatioSide::Below, 20.0);
        let b = critical_ratio_estimate(&s, &p, 300.0, &below).unwrap();
        assert!(b.bracketed);
        let (last_open, first_closed) = (b.ratio, b.ratio + below.resolution);
        assert!(b.scanned.iter().any(|&(r, g)| r == last_open && g > 20.0));
        let gap_above = b.scanned.iter().filter(|&&(r, _)| r > last_open).map(|&(r, _)| r).fold(f64::INFINITY, f64::min);
        assert!(gap_above <= first_closed + 1e-12);

        let above = small_config(vec![1.0 / 0.05, 1.0 / 0.6, 1.0], RatioSide::Above, 20.0);
        let a = critical_ratio_estimate(&s, &p, 300.0, &above).unwrap();
        assert!((a.ratio * b.ratio - 1.0).abs() < 1e-12, "{} vs {}", a.ratio, b.ratio);
    }
}
