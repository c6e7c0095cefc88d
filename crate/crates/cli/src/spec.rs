//! Resolved sweep description built from a [`RawConfig`].

use std::fmt;
use std::path::PathBuf;

use polariton_core::analysis::phase::RatioSide;
use polariton_core::{EigenConfig, DEFAULT_DIMENSION_CAP};
use serde::Serialize;

use crate::config::{entry_error, parse_bool, parse_list, parse_scalar, parse_usize, parse_usize_list, Entry, RawConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sector,
    Gaps,
    Gce,
    PhaseLambda,
    PhaseDelta,
    Analytic,
    CriticalRatio,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Sector,
        Mode::Gaps,
        Mode::Gce,
        Mode::PhaseLambda,
        Mode::PhaseDelta,
        Mode::Analytic,
        Mode::CriticalRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Sector => "sector",
            Mode::Gaps => "gaps",
            Mode::Gce => "gce",
            Mode::PhaseLambda => "phase-lambda",
            Mode::PhaseDelta => "phase-delta",
            Mode::Analytic => "analytic",
            Mode::CriticalRatio => "critical-ratio",
        }
    }

    /// Modes whose M list is a set of sizes for 1/M extrapolation.
    pub fn extrapolates(self) -> bool {
        matches!(self, Mode::Gaps | Mode::PhaseLambda | Mode::PhaseDelta | Mode::CriticalRatio)
    }

    fn default_sites(self) -> Vec<usize> {
        match self {
            Mode::Sector => vec![8],
            Mode::Gce => vec![6],
            Mode::PhaseLambda | Mode::PhaseDelta => vec![3, 4, 5, 6],
            Mode::Gaps | Mode::CriticalRatio => vec![4, 5, 6, 7, 8],
            Mode::Analytic => vec![1],
        }
    }

    fn default_degree(self) -> usize {
        match self {
            Mode::PhaseLambda | Mode::PhaseDelta => 3,
            _ => 4,
        }
    }

    /// Modes that emit one row per filling rather than sweeping it.
    fn fillings_are_rows(self) -> bool {
        matches!(self, Mode::PhaseLambda | Mode::PhaseDelta | Mode::Analytic)
    }

    fn default_filling(self) -> Vec<usize> {
        match self {
            Mode::PhaseLambda | Mode::PhaseDelta => vec![1, 2],
            Mode::Analytic => vec![1, 2, 3],
            _ => vec![1],
        }
    }

    /// Parameters that may carry more than one value.
    fn sweepable(self) -> &'static [Param] {
        use Param::*;
        match self {
            Mode::Sector => &[OmegaC, Delta, GL, GR, Sites, Excitations, Filling],
            Mode::Gaps => &[OmegaC, Delta, GL, GR, Filling],
            Mode::Gce => &[OmegaC, Delta, GL, GR, Sites],
            Mode::PhaseLambda => &[OmegaC, Delta, GSum, Lambda],
            Mode::PhaseDelta => &[OmegaC, Delta, GL, GR],
            Mode::Analytic => &[OmegaC, Delta, GL, GR],
            Mode::CriticalRatio => &[OmegaC, Delta, GSum],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// Grid parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    OmegaC,
    Delta,
    GL,
    GR,
    GSum,
    Lambda,
    Sites,
    Excitations,
    Filling,
}

impl Param {
    pub fn key(self) -> &'static str {
        match self {
            Param::OmegaC => "omega_c",
            Param::Delta => "delta",
            Param::GL => "g_l",
            Param::GR => "g_r",
            Param::GSum => "g_sum",
            Param::Lambda => "lambda",
            Param::Sites => "M",
            Param::Excitations => "N",
            Param::Filling => "filling",
        }
    }
}

/// Every accepted `section.key`.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("", "mode"),
    ("", "name"),
    ("", "strict"),
    ("model", "M"),
    ("model", "N"),
    ("model", "filling"),
    ("model", "omega_c"),
    ("model", "delta"),
    ("model", "g_l"),
    ("model", "g_r"),
    ("sweep", "degree"),
    ("sweep", "zip"),
    ("eigen", "k"),
    ("eigen", "tol"),
    ("eigen", "max_iter"),
    ("eigen", "max_restarts"),
    ("eigen", "seed"),
    ("eigen", "dense_threshold"),
    ("eigen", "block_size"),
    ("eigen", "dimension_cap"),
    ("gce", "n_max"),
    ("gce", "mu"),
    ("phase", "g_sum"),
    ("phase", "lambda"),
    ("phase", "mott_tol"),
    ("critical", "ratios"),
    ("critical", "side"),
    ("critical", "gap_tol"),
    ("critical", "resolution"),
    ("output", "dir"),
    ("output", "format"),
    ("output", "plot"),
    ("output", "workers"),
];

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// Closest known key by Jaro-Winkler similarity on the bare key name.
pub fn nearest_key(section: &str, key: &str) -> String {
    let score = |(s, k): &(&str, &str)| {
        let base = strsim::jaro_winkler(&key.to_ascii_lowercase(), &k.to_ascii_lowercase());
        if *s == section {
            base + 1e-3
        } else {
            base
        }
    };
    let best = KNOWN_KEYS
        .iter()
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .expect("key table is non-empty");
    qualified(best.0, best.1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub mode: Mode,
    pub name: String,
    pub strict: bool,
    pub omega_c: Vec<f64>,
    pub delta: Vec<f64>,
    pub g_l: Vec<f64>,
    pub g_r: Vec<f64>,
    /// Lattice sizes: extrapolation set, or a swept axis.
    pub sites: Vec<usize>,
    /// Explicit sectors; empty means N = filling · M.
    pub excitations: Vec<usize>,
    pub filling: Vec<usize>,
    pub degree: usize,
    pub zip: bool,
    pub eigen: EigenConfig,
    pub dimension_cap: u64,
    pub n_max: Option<usize>,
    /// μ − ω_c grid for the grand-canonical staircase, MHz.
    pub mu: Vec<f64>,
    pub g_sum: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mott_tol: f64,
    pub ratios: Vec<f64>,
    pub side: RatioSide,
    pub gap_tol: f64,
    pub resolution: f64,
    pub out_dir: PathBuf,
    pub format: Format,
    pub plot: bool,
    pub workers: usize,
}

impl SweepSpec {
    /// Defaults for `mode`.
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            name: mode.name().to_string(),
            strict: true,
            omega_c: vec![10_000.0],
            delta: vec![0.0],
            g_l: vec![150.0],
            g_r: vec![150.0],
            sites: mode.default_sites(),
            excitations: Vec::new(),
            filling: mode.default_filling(),
            degree: mode.default_degree(),
            zip: false,
            eigen: EigenConfig::default(),
            dimension_cap: DEFAULT_DIMENSION_CAP,
            n_max: None,
            mu: (0..=200).map(|i| -400.0 + 2.0 * i as f64).collect(),
            g_sum: vec![300.0],
            lambda: (0..=24).map(|i| -3.0 + 0.25 * i as f64).collect(),
            mott_tol: 5.0,
            ratios: (1..=10).map(|i| i as f64 / 10.0).collect(),
            side: RatioSide::Below,
            gap_tol: 5.0,
            resolution: 0.01,
            out_dir: PathBuf::from("out"),
            format: Format::Csv,
            plot: false,
            workers: 1,
        }
    }

    /// Resolve `raw` against the defaults. `mode` overrides the config's
    /// own `mode` key.
    pub fn from_raw(raw: &RawConfig, mode: Option<Mode>) -> Result<Self, CliError> {
        let mode = match (mode, raw.get("", "mode")) {
            (Some(m), _) => m,
            (None, Some(e)) => e.value.parse().map_err(|_| {
                let names: Vec<&str> = Mode::ALL.iter().map(|m| m.name()).collect();
                entry_error(e, format!("unknown mode `{}` (expected one of {})", e.value, names.join(", ")))
            })?,
            (None, None) => return Err(CliError::Config("no mode given".into())),
        };
        let mut spec = Self::defaults(mode);
        if let Some(e) = raw.get("", "strict") {
            spec.strict = parse_bool(e)?;
        }
        for e in &raw.entries {
            if !KNOWN_KEYS.iter().any(|(s, k)| *s == e.section && *k == e.key) {
                let msg = format!("unknown key `{}`; did you mean `{}`?", e.qualified(), nearest_key(&e.section, &e.key));
                if spec.strict {
                    return Err(entry_error(e, msg));
                }
                log::warn!("{msg}");
                continue;
            }
            spec.apply(e)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn apply(&mut self, e: &Entry) -> Result<(), CliError> {
        let optional = |e: &Entry| -> Result<Option<usize>, CliError> {
            if e.value.eq_ignore_ascii_case("auto") || e.value.is_empty() {
                Ok(None)
            } else {
                parse_usize(e).map(Some)
            }
        };
        match (e.section.as_str(), e.key.as_str()) {
            ("", "mode") | ("", "strict") => {}
            ("", "name") => {
                if e.value.is_empty() || e.value.contains(['/', '\\']) {
                    return Err(entry_error(e, "name must be a plain file stem"));
                }
                self.name = e.value.clone();
            }
            ("model", "M") => self.sites = parse_usize_list(e)?,
            ("model", "N") => self.excitations = parse_usize_list(e)?,
            ("model", "filling") => self.filling = parse_usize_list(e)?,
            ("model", "omega_c") => self.omega_c = parse_list(e)?,
            ("model", "delta") => self.delta = parse_list(e)?,
            ("model", "g_l") => self.g_l = parse_list(e)?,
            ("model", "g_r") => self.g_r = parse_list(e)?,
            ("sweep", "degree") => self.degree = parse_usize(e)?,
            ("sweep", "zip") => self.zip = parse_bool(e)?,
            ("eigen", "k") => self.eigen.k = parse_usize(e)?,
            ("eigen", "tol") => self.eigen.tol = parse_scalar(e)?,
            ("eigen", "max_iter") => self.eigen.max_iter = optional(e)?,
            ("eigen", "max_restarts") => self.eigen.max_restarts = parse_usize(e)?,
            ("eigen", "seed") => {
                self.eigen.seed = e.value.parse().map_err(|_| entry_error(e, "seed must be an unsigned integer"))?
            }
            ("eigen", "dense_threshold") => self.eigen.dense_threshold = parse_usize(e)?,
            ("eigen", "block_size") => self.eigen.block_size = optional(e)?,
            ("eigen", "dimension_cap") => self.dimension_cap = parse_usize(e)? as u64,
            ("gce", "n_max") => self.n_max = optional(e)?,
            ("gce", "mu") => self.mu = parse_list(e)?,
            ("phase", "g_sum") => self.g_sum = parse_list(e)?,
            ("phase", "lambda") => self.lambda = parse_list(e)?,
            ("phase", "mott_tol") => self.mott_tol = parse_scalar(e)?,
            ("critical", "ratios") => self.ratios = parse_list(e)?,
            ("critical", "side") => {
                self.side = match e.value.as_str() {
                    "below" => RatioSide::Below,
                    "above" => RatioSide::Above,
                    other => return Err(entry_error(e, format!("side `{other}` is not `below` or `above`"))),
                }
            }
            ("critical", "gap_tol") => self.gap_tol = parse_scalar(e)?,
            ("critical", "resolution") => self.resolution = parse_scalar(e)?,
            ("output", "dir") => self.out_dir = PathBuf::from(&e.value),
            ("output", "format") => {
                self.format = match e.value.as_str() {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    "both" => Format::Both,
                    other => return Err(entry_error(e, format!("format `{other}` is not csv, json or both"))),
                }
            }
            ("output", "plot") => self.plot = parse_bool(e)?,
            ("output", "workers") => self.workers = parse_usize(e)?,
            _ => unreachable!("key table and match arms disagree"),
        }
        Ok(())
    }

    fn values(&self, p: Param) -> Vec<GridValue> {
        let floats = |v: &[f64]| v.iter().map(|&x| GridValue::Float(x)).collect();
        let ints = |v: &[usize]| v.iter().map(|&x| GridValue::Int(x)).collect();
        match p {
            Param::OmegaC => floats(&self.omega_c),
            Param::Delta => floats(&self.delta),
            Param::GL => floats(&self.g_l),
            Param::GR => floats(&self.g_r),
            Param::GSum => floats(&self.g_sum),
            Param::Lambda => floats(&self.lambda),
            Param::Sites => ints(&self.sites),
            Param::Excitations => ints(&self.excitations),
            Param::Filling => ints(&self.filling),
        }
    }

    fn len_of(&self, p: Param) -> usize {
        self.values(p).len()
    }

    /// Parameters that vary across the grid, in grid-nesting order.
    pub fn axes(&self) -> Vec<Param> {
        let all = [
            Param::OmegaC,
            Param::Delta,
            Param::GL,
            Param::GR,
            Param::GSum,
            Param::Lambda,
            Param::Sites,
            Param::Excitations,
            Param::Filling,
        ];
        all.into_iter()
            .filter(|&p| self.mode.sweepable().contains(&p) && self.len_of(p) > 1)
            .filter(|&p| !(p == Param::Filling && self.mode.fillings_are_rows()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let sweepable = self.mode.sweepable();
        for p in [Param::OmegaC, Param::Delta, Param::GL, Param::GR, Param::Excitations] {
            if self.len_of(p) > 1 && !sweepable.contains(&p) {
                return bad(format!("{} cannot be swept in mode {}", p.key(), self.mode));
            }
        }
        if !self.mode.extrapolates() && self.sites.len() > 1 && !sweepable.contains(&Param::Sites) {
            return bad(format!("M cannot be swept in mode {}", self.mode));
        }
        if self.filling.len() > 1 && !sweepable.contains(&Param::Filling) && !self.mode.fillings_are_rows() {
            return bad(format!("filling cannot be swept in mode {}", self.mode));
        }
        if self.mode == Mode::CriticalRatio && self.filling != [1] {
            return bad("critical-ratio works at unit filling".into());
        }
        if !self.excitations.is_empty() && self.mode != Mode::Sector {
            return bad(format!("N is only used in mode sector, not {}", self.mode));
        }
        let axes = self.axes();
        if self.zip {
            if let Some(first) = axes.first() {
                let n = self.len_of(*first);
                if let Some(p) = axes.iter().find(|&&p| self.len_of(p) != n) {
                    return bad(format!("zip needs equal lengths, {} has {} values and {} has {n}", p.key(), self.len_of(*p), first.key()));
                }
            }
        } else if axes.len() > 2 {
            let names: Vec<&str> = axes.iter().map(|p| p.key()).collect();
            return bad(format!("at most two swept axes, got {} ({})", axes.len(), names.join(", ")));
        }
        if self.sites.is_empty() || self.sites.contains(&0) {
            return bad("M must be ≥ 1".into());
        }
        if self.filling.contains(&0) && !matches!(self.mode, Mode::Sector | Mode::Analytic) {
            return bad("filling must be ≥ 1".into());
        }
        if self.mode.extrapolates() {
            let mut sorted = self.sites.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted != self.sites {
                return bad("M list must be strictly ascending".into());
            }
            if self.sites.len() < self.degree + 1 {
                return bad(format!("degree {} needs at least {} lattice sizes, got {}", self.degree, self.degree + 1, self.sites.len()));
            }
        }
        if self.mode == Mode::Gce {
            if self.mu.windows(2).any(|w| w[1] < w[0]) {
                return bad("gce.mu must be ascending".into());
            }
            if self.n_max == Some(0) {
                return bad("gce.n_max must be ≥ 1".into());
            }
        }
        if self.g_sum.iter().any(|&g| !(g > 0.0)) {
            return bad("phase.g_sum must be > 0".into());
        }
        if self.workers == 0 {
            return bad("output.workers must be ≥ 1".into());
        }
        self.eigen.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Grid points in output order; the first axis varies slowest.
    pub fn grid(&self) -> Vec<GridPoint> {
        let axes = self.axes();
        let base = GridPoint {
            index: 0,
            omega_c: self.omega_c[0],
            delta: self.delta[0],
            g_l: self.g_l[0],
            g_r: self.g_r[0],
            g_sum: self.g_sum[0],
            lambda: self.lambda.first().copied().unwrap_or(0.0),
            sites: self.sites[0],
            excitations: self.excitations.first().copied(),
            filling: self.filling[0],
        };
        let mut points = Vec::new();
        if self.zip {
            let n = axes.first().map_or(1, |p| self.len_of(*p));
            for i in 0..n {
                let mut pt = base.clone();
                for &p in &axes {
                    pt.set(p, self.values(p)[i]);
                }
                points.push(pt);
            }
        } else {
            let mut stack = vec![base];
            for &p in &axes {
                stack = stack
                    .into_iter()
                    .flat_map(|pt| {
                        self.values(p).into_iter().map(move |v| {
                            let mut q = pt.clone();
                            q.set(p, v);
                            q
                        })
                    })
                    .collect();
            }
            points = stack;
        }
        for (i, p) in points.iter_mut().enumerate() {
            p.index = i;
        }
        points
    }

    /// Flattened `section.key = value` lines of the resolved spec.
    pub fn echo(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        let ilist = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let opt = |v: Option<usize>| v.map_or("auto".to_string(), |x| x.to_string());
        vec![
            format!("mode = {}", self.mode),
            format!("name = {}", self.name),
            format!("strict = {}", self.strict),
            format!("model.M = {}", ilist(&self.sites)),
            format!("model.N = {}", if self.excitations.is_empty() { "auto".into() } else { ilist(&self.excitations) }),
            format!("model.filling = {}", ilist(&self.filling)),
            format!("model.omega_c = {}", list(&self.omega_c)),
            format!("model.delta = {}", list(&self.delta)),
            format!("model.g_l = {}", list(&self.g_l)),
            format!("model.g_r = {}", list(&self.g_r)),
            format!("sweep.degree = {}", self.degree),
            format!("sweep.zip = {}", self.zip),
            format!("eigen.k = {}", self.eigen.k),
            format!("eigen.tol = {:e}", self.eigen.tol),
            format!("eigen.max_iter = {}", opt(self.eigen.max_iter)),
            format!("eigen.max_restarts = {}", self.eigen.max_restarts),
            format!("eigen.seed = {}", self.eigen.seed),
            format!("eigen.dense_threshold = {}", self.eigen.dense_threshold),
            format!("eigen.block_size = {}", opt(self.eigen.block_size)),
            format!("eigen.dimension_cap = {}", self.dimension_cap),
            format!("gce.n_max = {}", opt(self.n_max)),
            format!("gce.mu = {}", list(&self.mu)),
            format!("phase.g_sum = {}", list(&self.g_sum)),
            format!("phase.lambda = {}", list(&self.lambda)),
            format!("phase.mott_tol = {}", self.mott_tol),
            format!("critical.ratios = {}", list(&self.ratios)),
            format!("critical.side = {}", match self.side { RatioSide::Below => "below", RatioSide::Above => "above" }),
            format!("critical.gap_tol = {}", self.gap_tol),
            format!("critical.resolution = {}", self.resolution),
            format!("output.dir = {}", self.out_dir.display()),
            format!("output.format = {}", match self.format { Format::Csv => "csv", Format::Json => "json", Format::Both => "both" }),
            format!("output.plot = {}", self.plot),
            format!("output.workers = {}", self.workers),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GridValue {
    Float(f64),
    Int(usize),
}

/// One parameter combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: usize,
    pub omega_c: f64,
    pub delta: f64,
    pub g_l: f64,
    pub g_r: f64,
    pub g_sum: f64,
    pub lambda: f64,
    pub sites: usize,
    pub excitations: Option<usize>,
    pub filling: usize,
}

impl GridPoint {
    fn set(&mut self, p: Param, v: GridValue) {
        match (p, v) {
            (Param::OmegaC, GridValue::Float(x)) => self.omega_c = x,
            (Param::Delta, GridValue::Float(x)) => self.delta = x,
            (Param::GL, GridValue::Float(x)) => self.g_l = x,
            (Param::GR, GridValue::Float(x)) => self.g_r = x,
            (Param::GSum, GridValue::Float(x)) => self.g_sum = x,
            (Param::Lambda, GridValue::Float(x)) => self.lambda = x,
            (Param::Sites, GridValue::Int(x)) => self.sites = x,
            (Param::Excitations, GridValue::Int(x)) => self.excitations = Some(x),
            (Param::Filling, GridValue::Int(x)) => self.filling = x,
            _ => unreachable!("parameter kind mismatch"),
        }
    }
}
