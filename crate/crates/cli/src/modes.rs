//! Column schemas and per-point evaluation for each sweep mode.

use polariton_core::analysis::analytic::{delta_eps, effective_u, effective_u_pair, hopping_element, jc_spectrum};
use polariton_core::analysis::gce::{density_curve, GceConfig};
use polariton_core::analysis::phase::{
    critical_ratio_estimate, extrapolated_gap, phase_diagram_delta, phase_diagram_lambda, CriticalRatioConfig,
    LobeBoundary, PhaseConfig, PhasePoint, FINITE_SIZE_NOTE,
};
use polariton_core::observables::{qubit_correlation, quadrature_correlation, rho1_profile};
use polariton_core::{Error, LatticeParams, Result, Session};
use serde_json::json;

use crate::spec::{GridPoint, Mode, Param, SweepSpec};
use crate::table::{Column, Row, Value};

/// Rows and diagnostics produced by one grid point.
#[derive(Debug, Clone)]
pub struct PointOutput {
    pub rows: Vec<Row>,
    pub diagnostics: serde_json::Value,
}

/// CSV column carrying a grid parameter.
pub fn axis_column(p: Param) -> &'static str {
    match p {
        Param::OmegaC => "omega_c_MHz",
        Param::Delta => "delta_MHz",
        Param::GL => "g_l_MHz",
        Param::GR => "g_r_MHz",
        Param::GSum => "g_sum_MHz",
        Param::Lambda => "lambda",
        Param::Sites => "M",
        Param::Excitations => "N",
        Param::Filling => "filling",
    }
}

fn couplings() -> Vec<Column> {
    ["omega_c_MHz", "delta_MHz", "g_l_MHz", "g_r_MHz"]
        .into_iter()
        .map(Column::float)
        .collect()
}

fn coupling_values(p: &GridPoint) -> Vec<Value> {
    vec![p.omega_c.into(), p.delta.into(), p.g_l.into(), p.g_r.into()]
}

fn max_distance(spec: &SweepSpec) -> usize {
    spec.sites.iter().copied().max().unwrap_or(1) / 2
}

pub fn columns(spec: &SweepSpec) -> Vec<Column> {
    let mut cols = Vec::new();
    let per_size = |cols: &mut Vec<Column>, prefix: &str| {
        for m in &spec.sites {
            cols.push(Column::float(format!("{prefix}_M{m}_MHz")));
        }
    };
    match spec.mode {
        Mode::Sector => {
            cols.extend([Column::int("M"), Column::int("N")]);
            cols.extend(couplings());
            cols.extend([Column::int("dim"), Column::float("E0_MHz"), Column::float("E1_MHz"), Column::float("E_x_MHz")]);
            cols.push(Column::float("photon_density"));
            for d in 1..=max_distance(spec) {
                cols.push(Column::float(format!("rho1_x{d}")));
            }
            cols.extend(
                ["qubit_corr_x1", "qubit_corr_xmax", "quad_corr_x1", "quad_corr_xmax"]
                    .into_iter()
                    .map(Column::float),
            );
            cols.extend([Column::flag("degenerate"), Column::float("max_residual_MHz"), Column::int("matvecs")]);
        }
        Mode::Gaps => {
            cols.push(Column::int("filling"));
            cols.extend(couplings());
            per_size(&mut cols, "E_gp");
            per_size(&mut cols, "E_x");
            cols.extend([Column::float("E_gp_inf_MHz"), Column::flag("unstable"), Column::flag("degenerate")]);
            cols.extend([Column::text("sectors"), Column::float("max_residual_MHz")]);
        }
        Mode::Gce => {
            cols.push(Column::int("M"));
            cols.extend(couplings());
            cols.extend([
                Column::float("mu_minus_omega_c_MHz"),
                Column::int("N"),
                Column::float("n"),
                Column::float("rho1_xmax"),
                Column::flag("saturated"),
                Column::flag("degenerate"),
                Column::float("max_residual_MHz"),
            ]);
        }
        Mode::PhaseLambda | Mode::PhaseDelta => {
            if spec.mode == Mode::PhaseLambda {
                cols.extend([Column::float("lambda"), Column::float("g_sum_MHz")]);
            }
            cols.extend(couplings());
            cols.push(Column::int("filling"));
            per_size(&mut cols, "mu_minus");
            per_size(&mut cols, "mu_plus");
            cols.extend([
                Column::float("mu_minus_inf_MHz"),
                Column::float("mu_plus_inf_MHz"),
                Column::float("width_inf_MHz"),
                Column::flag("mott"),
                Column::flag("inverted"),
                Column::flag("unstable"),
                Column::float("max_residual_MHz"),
            ]);
        }
        Mode::Analytic => {
            cols.extend(couplings());
            cols.extend([Column::float("g_cell_MHz"), Column::int("n")]);
            cols.extend(
                ["eps_minus_MHz", "eps_plus_MHz", "delta_eps_MHz", "U_MHz", "U_pair_MHz"]
                    .into_iter()
                    .map(Column::float),
            );
            cols.push(Column::float("hopping_element"));
        }
        Mode::CriticalRatio => {
            cols.extend(["omega_c_MHz", "delta_MHz", "g_sum_MHz"].into_iter().map(Column::float));
            cols.extend([
                Column::text("side"),
                Column::float("gap_tol_MHz"),
                Column::float("beta_c"),
                Column::flag("bracketed"),
                Column::int("evaluations"),
                Column::text("note"),
            ]);
        }
    }
    cols
}

fn params(p: &GridPoint, sites: usize) -> LatticeParams {
    LatticeParams::new(sites, p.omega_c, p.delta, p.g_l, p.g_r)
}

/// Solved sectors, worst residual and degeneracy, read back from the memo.
struct Provenance {
    sectors: Vec<String>,
    max_residual: f64,
    degenerate: bool,
}

fn provenance(session: &Session, solved: &[(LatticeParams, usize)]) -> Result<Provenance> {
    let mut out = Provenance {
        sectors: Vec::new(),
        max_residual: 0.0,
        degenerate: false,
    };
    for (p, n) in solved {
        let s = session.spectrum(p, *n)?;
        out.sectors.push(format!("{}:{}", p.sites, n));
        out.max_residual = s.residuals.iter().copied().fold(out.max_residual, f64::max);
        out.degenerate |= s.degenerate;
    }
    Ok(out)
}

fn ok_if_defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroDiagonal { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn evaluate(spec: &SweepSpec, session: &Session, point: &GridPoint) -> Result<PointOutput> {
    match spec.mode {
        Mode::Sector => sector(spec, session, point),
        Mode::Gaps => gaps_mode(spec, session, point),
        Mode::Gce => gce(spec, session, point),
        Mode::PhaseLambda | Mode::PhaseDelta => phase(spec, session, point),
        Mode::Analytic => analytic(spec, point),
        Mode::CriticalRatio => critical(spec, session, point),
    }
}

fn sector(spec: &SweepSpec, session: &Session, point: &GridPoint) -> Result<PointOutput> {
    let m = point.sites;
    let n = point.excitations.unwrap_or(point.filling * m);
    let p = params(point, m).validate()?;
    let (basis, state) = session.solve(&p, n)?;
    let e0 = state.energy();
    let e1 = state.eigenvalues.get(1).copied();
    let xmax = m / 2;
    let profile = match rho1_profile(&state, &basis) {
        Ok(p) => Some(p),
        Err(Error::ZeroDiagonal { .. }) => None,
        Err(e) => return Err(e),
    };
    let pair = |f: fn(&_, &_, usize, usize) -> Result<f64>, d: usize| -> Result<Option<f64>> {
        if d == 0 || d >= m {
            Ok(None)
        } else {
            ok_if_defined(f(&state, &basis, 0, d))
        }
    };
    let mut row: Row = vec![m.into(), n.into()];
    row.extend(coupling_values(point));
    row.extend([basis.dim().into(), e0.into(), e1.into(), e1.map(|e| e - e0).into()]);
    row.push(profile.as_ref().map(|p| p.photon_density).into());
    for d in 1..=max_distance(spec) {
        row.push(profile.as_ref().and_then(|p| p.values.get(d).copied()).into());
    }
    row.push(pair(qubit_correlation, 1)?.into());
    row.push(pair(qubit_correlation, xmax)?.into());
    row.push(pair(quadrature_correlation, 1)?.into());
    row.push(pair(quadrature_correlation, xmax)?.into());
    row.extend([
        state.degenerate.into(),
        state.max_residual().into(),
        state.iterations.into(),
    ]);
    Ok(PointOutput {
        rows: vec![row],
        diagnostics: json!({
            "method": state.method,
            "restarts": state.restarts,
            "residuals": state.residuals,
            "translation_residual": profile.as_ref().map(|p| p.translation_residual),
        }),
    })
}

fn gaps_mode(spec: &SweepSpec, session: &Session, point: &GridPoint) -> Result<PointOutput> {
    let base = params(point, spec.sites[0]).validate()?;
    let ext = extrapolated_gap(session, &base, &spec.sites, spec.degree, point.filling)?;
    let solved: Vec<(LatticeParams, usize)> = spec
        .sites
        .iter()
        .flat_map(|&m| {
            let centre = point.filling * m;
            (centre - 1..=centre + 1).map(move |n| (base.with_sites(m), n))
        })
        .collect();
    let prov = provenance(session, &solved)?;
    let mut row: Row = vec![point.filling.into()];
    row.extend(coupling_values(point));
    row.extend(ext.gaps.iter().map(|&g| g.into()));
    row.extend(ext.excitation_gaps.iter().map(|&g| g.into()));
    row.extend([
        ext.intercept().into(),
        ext.fit.unstable.into(),
        prov.degenerate.into(),
        prov.sectors.join(";").into(),
        prov.max_residual.into(),
    ]);
    Ok(PointOutput {
        rows: vec![row],
        diagnostics: json!({ "fit": ext.fit }),
    })
}

fn gce(spec: &SweepSpec, session: &Session, point: &GridPoint) -> Result<PointOutput> {
    let p = params(point, point.sites).validate()?;
    let cfg = GceConfig {
        n_max: spec.n_max,
        mu_grid: spec.mu.iter().map(|mu| mu + p.omega_c).collect(),
        sizes: spec.sites.clone(),
    };
    let curve = density_curve(session, &p, &cfg)?;
    let solved: Vec<(LatticeParams, usize)> = (0..=curve.n_max).map(|n| (p, n)).collect();
    let prov = provenance(session, &solved)?;
    let rows = curve
        .rows
        .iter()
        .map(|r| {
            let mut row: Row = vec![p.sites.into()];
            row.extend(coupling_values(point));
            row.extend([
                (r.mu - p.omega_c).into(),
                r.excitations.into(),
                r.density.into(),
                r.rho1_max.into(),
                r.saturated.into(),
                r.degenerate.into(),
                prov.max_residual.into(),
            ]);
            row
        })
        .collect();
    let plateaus: Vec<_> = curve
        .plateaus
        .iter()
        .map(|pl| {
            json!({
                "N": pl.excitations,
                "n": pl.density,
                "mu_lower_minus_omega_c_MHz": pl.mu_lower - p.omega_c,
                "mu_upper_minus_omega_c_MHz": pl.mu_upper - p.omega_c,
                "width_MHz": pl.width(),
            })
        })
        .collect();
    Ok(PointOutput {
        rows,
        diagnostics: json!({
            "n_max": curve.n_max,
            "convex": curve.convex,
            "energies_MHz": curve.energies,
            "plateaus": plateaus,
            "sectors": prov.sectors,
        }),
    })
}

fn lobe_row(spec: &SweepSpec, point: &PhasePoint, omega_c: f64, lambda: Option<(f64, f64)>, lobe: &LobeBoundary, residual: f64) -> Row {
    let mut row: Row = Vec::new();
    if let Some((l, g_sum)) = lambda {
        row.extend([l.into(), g_sum.into()]);
    }
    row.extend([omega_c.into(), point.delta.into(), point.g_l.into(), point.g_r.into()]);
    row.push(lobe.filling.into());
    row.extend(lobe.mu_minus.iter().map(|&v| v.into()));
    row.extend(lobe.mu_plus.iter().map(|&v| v.into()));
    row.extend([
        lobe.mu_minus_inf.into(),
        lobe.mu_plus_inf.into(),
        lobe.gap_inf.into(),
        lobe.mott.into(),
        lobe.inverted.into(),
        lobe.unstable.into(),
        residual.into(),
    ]);
    debug_assert_eq!(lobe.sizes, spec.sites);
    row
}

fn phase(spec: &SweepSpec, session: &Session, point: &GridPoint) -> Result<PointOutput> {
    let cfg = PhaseConfig {
        sizes: spec.sites.clone(),
        degree: spec.degree,
        fillings: spec.filling.clone(),
        mott_tol: spec.mott_tol,
    };
    let base = params(point, spec.sites[0]);
    let (pp, lambda) = if spec.mode == Mode::PhaseLambda {
        let mut pts = phase_diagram_lambda(session, &base, point.g_sum, &[point.lambda], &cfg)?;
        (pts.remove(0), Some((point.lambda, point.g_sum)))
    } else {
        let mut pts = phase_diagram_delta(session, &base, &[point.delta], &cfg)?;
        (pts.remove(0), None)
    };
    let solved_params = base.with_couplings(pp.g_l, pp.g_r);
    let solved: Vec<(LatticeParams, usize)> = spec
        .filling
        .iter()
        .flat_map(|&f| {
            spec.sites.iter().flat_map(move |&m| {
                let c = f * m;
                (c - 1..=c + 1).map(move |n| (solved_params.with_sites(m), n))
            })
        })
        .collect();
    let prov = provenance(session, &solved)?;
    let rows = pp
        .lobes
        .iter()
        .map(|lobe| lobe_row(spec, &pp, point.omega_c, lambda, lobe, prov.max_residual))
        .collect();
    Ok(PointOutput {
        rows,
        diagnostics: json!({ "degenerate": prov.degenerate, "sectors": prov.sectors }),
    })
}

fn analytic(spec: &SweepSpec, point: &GridPoint) -> Result<PointOutput> {
    let g = point.g_l.max(point.g_r);
    let rows = spec
        .filling
        .iter()
        .map(|&n| {
            let doublet = jc_spectrum(n, point.delta, g, point.omega_c);
            let mut row = coupling_values(point);
            row.extend([g.into(), n.into()]);
            row.extend([
                doublet.lower.into(),
                doublet.upper.into(),
                delta_eps(n, point.delta, g, point.omega_c).into(),
                (n >= 1).then(|| effective_u(n, point.delta, g)).into(),
                effective_u_pair(point.delta, g).into(),
                (g > 0.0).then(|| hopping_element(point.delta, g)).into(),
            ]);
            row
        })
        .collect();
    Ok(PointOutput {
        rows,
        diagnostics: json!({ "coupling": "U and the dressed states use g = max(g_l, g_r)" }),
    })
}

fn critical(spec: &SweepSpec, session: &Session, point: &GridPoint) -> Result<PointOutput> {
    let cfg = CriticalRatioConfig {
        ratios: spec.ratios.clone(),
        side: spec.side,
        sizes: spec.sites.clone(),
        degree: spec.degree,
        gap_tol: spec.gap_tol,
        resolution: spec.resolution,
    };
    let base = params(point, spec.sites[0]);
    let est = critical_ratio_estimate(session, &base, point.g_sum, &cfg)?;
    let side = match est.side {
        polariton_core::analysis::phase::RatioSide::Below => "below",
        polariton_core::analysis::phase::RatioSide::Above => "above",
    };
    let row: Row = vec![
        point.omega_c.into(),
        point.delta.into(),
        point.g_sum.into(),
        side.into(),
        est.gap_tol.into(),
        est.ratio.into(),
        est.bracketed.into(),
        est.scanned.len().into(),
        FINITE_SIZE_NOTE.into(),
    ];
    Ok(PointOutput {
        rows: vec![row],
        diagnostics: json!({
            "scanned": est.scanned.iter().map(|(r, g)| json!({"ratio": r, "E_gp_inf_MHz": g})).collect::<Vec<_>>(),
            "note": est.note,
        }),
    })
}
