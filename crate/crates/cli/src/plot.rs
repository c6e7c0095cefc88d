//! Declarative plot descriptions that point at CSV columns.

use serde::Serialize;

use crate::modes::axis_column;
use crate::spec::{Mode, Param, SweepSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub column: String,
    pub label: String,
    pub scale: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub column: String,
    pub label: String,
    pub style: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotDescription {
    pub title: String,
    pub data: String,
    pub x: Axis,
    pub y_label: String,
    pub y_scale: &'static str,
    pub series: Vec<Series>,
    /// Columns whose distinct values split the rows into separate curves.
    pub group_by: Vec<String>,
}

fn axis(column: &str, label: &str) -> Axis {
    Axis {
        column: column.into(),
        label: label.into(),
        scale: "linear",
    }
}

fn line(column: impl Into<String>, label: impl Into<String>) -> Series {
    Series {
        column: column.into(),
        label: label.into(),
        style: "line",
    }
}

fn points(column: impl Into<String>, label: impl Into<String>) -> Series {
    Series {
        style: "points",
        ..line(column, label)
    }
}

fn label(p: Param) -> &'static str {
    match p {
        Param::OmegaC => "omega_c (MHz)",
        Param::Delta => "Delta (MHz)",
        Param::GL => "g_l (MHz)",
        Param::GR => "g_r (MHz)",
        Param::GSum => "g_l + g_r (MHz)",
        Param::Lambda => "lambda",
        Param::Sites => "M",
        Param::Excitations => "N",
        Param::Filling => "filling",
    }
}

/// Horizontal axis: the first swept parameter, or `fallback`.
fn x_axis(spec: &SweepSpec, fallback: Param) -> (Axis, Vec<String>) {
    let axes = spec.axes();
    let x = axes.first().copied().unwrap_or(fallback);
    let groups = axes.iter().skip(1).map(|&p| axis_column(p).to_string()).collect();
    (axis(axis_column(x), label(x)), groups)
}

pub fn describe(spec: &SweepSpec, data: &str) -> PlotDescription {
    let (x, mut group_by, y_label, series) = match spec.mode {
        Mode::Sector => {
            let (x, g) = x_axis(spec, Param::GR);
            let xmax = spec.sites.iter().copied().max().unwrap_or(1) / 2;
            let mut s = vec![line("E_x_MHz", "E_x")];
            if xmax >= 1 {
                s.push(line(format!("rho1_x{xmax}"), "rho1(x_max)"));
            }
            (x, g, "value".to_string(), s)
        }
        Mode::Gaps => {
            let (x, g) = x_axis(spec, Param::GR);
            let mut s = vec![line("E_gp_inf_MHz", "M -> infinity")];
            s.extend(spec.sites.iter().map(|m| points(format!("E_gp_M{m}_MHz"), format!("M = {m}"))));
            (x, g, "E_gp (MHz)".to_string(), s)
        }
        Mode::Gce => {
            let g = spec.axes().iter().map(|&p| axis_column(p).to_string()).collect();
            (
                axis("mu_minus_omega_c_MHz", "mu - omega_c (MHz)"),
                g,
                "density n".to_string(),
                vec![line("n", "n")],
            )
        }
        Mode::PhaseLambda | Mode::PhaseDelta => {
            let (x, mut g) = x_axis(spec, if spec.mode == Mode::PhaseLambda { Param::Lambda } else { Param::Delta });
            g.push("filling".into());
            let s = vec![line("mu_minus_inf_MHz", "mu_-"), line("mu_plus_inf_MHz", "mu_+")];
            (x, g, "mu - omega_c (MHz)".to_string(), s)
        }
        Mode::Analytic => {
            let (x, mut g) = x_axis(spec, Param::Delta);
            g.push("n".into());
            let s = vec![line("U_MHz", "U"), line("delta_eps_MHz", "excitation cost")];
            (x, g, "energy (MHz)".to_string(), s)
        }
        Mode::CriticalRatio => {
            let (x, g) = x_axis(spec, Param::GSum);
            (x, g, "beta_c".to_string(), vec![points("beta_c", "g_l / g_r at gap closure")])
        }
    };
    group_by.dedup();
    PlotDescription {
        title: format!("{} ({})", spec.name, spec.mode),
        data: data.to_string(),
        x,
        y_label,
        y_scale: "linear",
        series,
        group_by,
    }
}
