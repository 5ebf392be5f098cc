//! Flat `key = value` run configuration with repeated `polygon.` groups.
//!
//! Lines are `key = value`; `#` starts a comment. A `polygon.radius` line
//! opens a new polygon group, and the following `polygon.mass` and
//! `polygon.phase` lines belong to it.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use multipolar::discretization::MeshSpec;
use multipolar::geometry::{Mode, PoleConfiguration, Polygon};
use multipolar::minimizer::MinimizeOptions;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, when the error is tied to one.
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Hardy,
    Scaling,
    Beta,
    Gamma,
    KLimit,
    Riemann,
}

impl StudyKind {
    pub const ALL: [StudyKind; 6] = [
        StudyKind::Hardy,
        StudyKind::Scaling,
        StudyKind::Beta,
        StudyKind::Gamma,
        StudyKind::KLimit,
        StudyKind::Riemann,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Hardy => "hardy",
            StudyKind::Scaling => "scaling",
            StudyKind::Beta => "beta",
            StudyKind::Gamma => "gamma",
            StudyKind::KLimit => "k-limit",
            StudyKind::Riemann => "riemann",
        }
    }
}

impl FromStr for StudyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            format!("unknown study '{s}', expected one of hardy, scaling, beta, gamma, k-limit, riemann")
        })
    }
}

/// Study parameters; each study reads the ones it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyParams {
    pub kind: Option<StudyKind>,
    /// Ring radius of the Hardy study.
    pub ring_radius: f64,
    /// Shrink factors `10^-j`, `j = 0..=decades`.
    pub shrink_decades: usize,
    pub half_width: f64,
    pub xi: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    /// Concentration scale of the gradient-constant comparison.
    pub mu: f64,
    pub samples: usize,
    pub tolerance: f64,
    /// Evaluation point `(rho, theta, s)` of the Riemann table.
    pub point: [f64; 3],
}

impl Default for StudyParams {
    fn default() -> Self {
        Self {
            kind: None,
            ring_radius: 1.0,
            shrink_decades: 10,
            half_width: 16.0,
            xi: 1.0,
            mu_min: 1e-7,
            mu_max: 1e-5,
            mu_points: 13,
            mu: 1e-6,
            samples: 1_000_000,
            tolerance: 0.01,
            point: [0.5, 0.3, 0.3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub lambda0: f64,
    /// `None` for circular symmetry.
    pub k: Option<usize>,
    pub k_list: Vec<usize>,
    pub polygons: Vec<Polygon>,
    pub grid: MeshSpec,
    pub solver: MinimizeOptions,
    pub multistart: bool,
    pub check_k_max: usize,
    pub study: StudyParams,
    /// Sample points `(rho, theta, s)` of the potential table.
    pub samples: Vec<[f64; 3]>,
    /// Monte-Carlo seed; overridden by `--seed`.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: 4,
            lambda0: 0.0,
            k: None,
            k_list: vec![2, 4, 8, 16],
            polygons: Vec::new(),
            grid: MeshSpec::default(),
            solver: MinimizeOptions::default(),
            multistart: true,
            check_k_max: 200,
            study: StudyParams::default(),
            samples: Vec::new(),
            seed: 0,
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| err(Some(line), key, format!("cannot parse '{v}': {e}")))
}

fn parse_list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    v.split(',').map(|p| parse_num(line, key, p.trim())).collect()
}

fn parse_triple(line: usize, key: &str, v: &str) -> Result<[f64; 3], ConfigError> {
    let xs: Vec<f64> = parse_list(line, key, v)?;
    xs.try_into()
        .map_err(|_| err(Some(line), key, "expected three comma-separated numbers rho,theta,s"))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(Some(line), key, format!("expected true or false, got '{v}'"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        let mut mode: Option<(usize, String)> = None;
        // (line, radius, mass, phase) per group
        let mut groups: Vec<(usize, f64, Option<f64>, Option<f64>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (key, v) = body
                .split_once('=')
                .ok_or_else(|| err(Some(line), body, "expected key = value"))?;
            let (key, v) = (key.trim(), v.trim());
            match key {
                "dimension" => c.dimension = parse_num(line, key, v)?,
                "lambda0" => c.lambda0 = parse_num(line, key, v)?,
                "mode" => mode = Some((line, v.to_string())),
                "k" => c.k = Some(parse_num(line, key, v)?),
                "k_list" => c.k_list = parse_list(line, key, v)?,
                "polygon.radius" => groups.push((line, parse_num(line, key, v)?, None, None)),
                "polygon.mass" | "polygon.phase" => {
                    let g = groups
                        .last_mut()
                        .ok_or_else(|| err(Some(line), key, "must follow a polygon.radius line"))?;
                    let slot = if key == "polygon.mass" { &mut g.2 } else { &mut g.3 };
                    if slot.is_some() {
                        return Err(err(Some(line), key, "given twice for one polygon"));
                    }
                    *slot = Some(parse_num(line, key, v)?);
                }
                "grid.ratio" => c.grid.ratio = parse_num(line, key, v)?,
                "grid.h_origin" => c.grid.h_origin = parse_num(line, key, v)?,
                "grid.h_pole" => c.grid.h_pole = parse_num(line, key, v)?,
                "grid.h_max" => c.grid.h_max = parse_num(line, key, v)?,
                "grid.n_theta" => c.grid.n_theta = parse_num(line, key, v)?,
                "grid.truncation" => {
                    c.grid.truncation = if v == "auto" {
                        None
                    } else {
                        Some(parse_num(line, key, v)?)
                    }
                }
                "solver.tol" => c.solver.tol = parse_num(line, key, v)?,
                "solver.max_iter" => c.solver.max_iter = parse_num(line, key, v)?,
                "solver.multistart" => c.multistart = parse_bool(line, key, v)?,
                "solver.multistart_iter" => c.solver.multistart_iter = parse_num(line, key, v)?,
                "check.k_max" => c.check_k_max = parse_num(line, key, v)?,
                "study" => c.study.kind = Some(v.parse().map_err(|e| err(Some(line), key, e))?),
                "study.ring_radius" => c.study.ring_radius = parse_num(line, key, v)?,
                "study.shrink_decades" => c.study.shrink_decades = parse_num(line, key, v)?,
                "study.half_width" => c.study.half_width = parse_num(line, key, v)?,
                "study.xi" => c.study.xi = parse_num(line, key, v)?,
                "study.mu_min" => c.study.mu_min = parse_num(line, key, v)?,
                "study.mu_max" => c.study.mu_max = parse_num(line, key, v)?,
                "study.mu_points" => c.study.mu_points = parse_num(line, key, v)?,
                "study.mu" => c.study.mu = parse_num(line, key, v)?,
                "study.samples" => c.study.samples = parse_num(line, key, v)?,
                "study.tolerance" => c.study.tolerance = parse_num(line, key, v)?,
                "study.point" => c.study.point = parse_triple(line, key, v)?,
                "sample" => c.samples.push(parse_triple(line, key, v)?),
                "seed" => c.seed = parse_num(line, key, v)?,
                _ => return Err(err(Some(line), key, "unknown key")),
            }
        }
        for (line, radius, mass, phase) in groups {
            let mass = mass.ok_or_else(|| err(Some(line), "polygon.mass", "missing for this polygon"))?;
            c.polygons.push(Polygon::with_phase(radius, mass, phase.unwrap_or(0.0)));
        }
        match mode {
            None => {}
            Some((_, m)) if m == "circular" => {
                if c.k.is_some() {
                    return Err(err(None, "k", "given with mode = circular"));
                }
            }
            Some((_, m)) if m == "polygonal" => {
                if c.k.is_none() {
                    return Err(err(None, "k", "required with mode = polygonal"));
                }
            }
            Some((line, m)) => {
                return Err(err(
                    Some(line),
                    "mode",
                    format!("expected circular or polygonal, got '{m}'"),
                ))
            }
        }
        if c.k_list.is_empty() || c.k_list.windows(2).any(|w| w[1] <= w[0]) || c.k_list[0] == 0 {
            return Err(err(None, "k_list", "must be positive and strictly increasing"));
        }
        c.pole_configuration()?;
        Ok(c)
    }

    pub fn mode(&self) -> Mode {
        match self.k {
            Some(k) => Mode::Polygonal { k },
            None => Mode::Circular,
        }
    }

    pub fn pole_configuration(&self) -> Result<PoleConfiguration, ConfigError> {
        PoleConfiguration::new(self.dimension, self.lambda0, self.polygons.clone(), self.mode())
            .map_err(|e| err(None, "configuration", e.to_string()))
    }

    /// Canonical text; parsing it gives back the same configuration.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let list = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        kv("dimension", self.dimension.to_string());
        kv("lambda0", format!("{:?}", self.lambda0));
        match self.k {
            Some(k) => {
                kv("mode", "polygonal".into());
                kv("k", k.to_string());
            }
            None => kv("mode", "circular".into()),
        }
        kv(
            "k_list",
            self.k_list.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
        );
        for p in &self.polygons {
            kv("polygon.radius", format!("{:?}", p.radius));
            kv("polygon.mass", format!("{:?}", p.mass));
            kv("polygon.phase", format!("{:?}", p.phase));
        }
        kv("grid.ratio", format!("{:?}", self.grid.ratio));
        kv("grid.h_origin", format!("{:?}", self.grid.h_origin));
        kv("grid.h_pole", format!("{:?}", self.grid.h_pole));
        kv("grid.h_max", format!("{:?}", self.grid.h_max));
        kv("grid.n_theta", self.grid.n_theta.to_string());
        kv(
            "grid.truncation",
            self.grid.truncation.map_or("auto".into(), |t| format!("{t:?}")),
        );
        kv("solver.tol", format!("{:?}", self.solver.tol));
        kv("solver.max_iter", self.solver.max_iter.to_string());
        kv("solver.multistart", self.multistart.to_string());
        kv("solver.multistart_iter", self.solver.multistart_iter.to_string());
        kv("check.k_max", self.check_k_max.to_string());
        let st = &self.study;
        if let Some(kind) = st.kind {
            kv("study", kind.name().into());
        }
        kv("study.ring_radius", format!("{:?}", st.ring_radius));
        kv("study.shrink_decades", st.shrink_decades.to_string());
        kv("study.half_width", format!("{:?}", st.half_width));
        kv("study.xi", format!("{:?}", st.xi));
        kv("study.mu_min", format!("{:?}", st.mu_min));
        kv("study.mu_max", format!("{:?}", st.mu_max));
        kv("study.mu_points", st.mu_points.to_string());
        kv("study.mu", format!("{:?}", st.mu));
        kv("study.samples", st.samples.to_string());
        kv("study.tolerance", format!("{:?}", st.tolerance));
        kv("study.point", list(&st.point));
        for p in &self.samples {
            kv("sample", list(p));
        }
        kv("seed", self.seed.to_string());
        s
    }
}
