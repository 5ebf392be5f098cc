//! Pole configurations (concentric regular polygons or circles around a
//! central pole), exact inter-pole distances and the scalar positivity,
//! existence and non-existence conditions.

use std::f64::consts::PI;
use std::fmt;

use crate::closed_forms::hardy_constant;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `k` poles per ring at the vertices of a regular polygon.
    Polygonal { k: usize },
    /// Mass spread uniformly over each circle.
    Circular,
}

/// One ring of poles. `mass` is the per-pole mass in polygonal mode and the
/// total ring mass in circular mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polygon {
    pub radius: f64,
    pub mass: f64,
    pub phase: f64,
}

impl Polygon {
    pub fn new(radius: f64, mass: f64) -> Self {
        Self {
            radius,
            mass,
            phase: 0.0,
        }
    }

    pub fn with_phase(radius: f64, mass: f64, phase: f64) -> Self {
        Self { radius, mass, phase }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleConfiguration {
    n: usize,
    lambda0: f64,
    polygons: Vec<Polygon>,
    mode: Mode,
}

impl PoleConfiguration {
    pub fn new(n: usize, lambda0: f64, polygons: Vec<Polygon>, mode: Mode) -> Result<Self> {
        if n < 3 {
            return invalid(format!("dimension must be at least 3, got {n}"));
        }
        if !lambda0.is_finite() {
            return invalid("central mass must be finite");
        }
        if let Mode::Polygonal { k } = mode {
            if k == 0 {
                return invalid("polygons need at least one vertex");
            }
        }
        for (idx, p) in polygons.iter().enumerate() {
            if !(p.radius > 0.0) || !p.radius.is_finite() {
                return invalid(format!("polygon {idx}: radius must be positive, got {}", p.radius));
            }
            if !p.mass.is_finite() || !p.phase.is_finite() {
                return invalid(format!("polygon {idx}: mass and phase must be finite"));
            }
        }
        if let Mode::Polygonal { k } = mode {
            let period = 2.0 * PI / k as f64;
            for a in 0..polygons.len() {
                for b in a + 1..polygons.len() {
                    let (pa, pb) = (&polygons[a], &polygons[b]);
                    let d = (pa.phase - pb.phase).rem_euclid(period);
                    if pa.radius == pb.radius && (d == 0.0 || d == period) {
                        return invalid(format!("polygons {a} and {b} share their poles"));
                    }
                }
            }
        }
        Ok(Self {
            n,
            lambda0,
            polygons,
            mode,
        })
    }

    /// Central pole only.
    pub fn central(n: usize, lambda0: f64, mode: Mode) -> Result<Self> {
        Self::new(n, lambda0, Vec::new(), mode)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn k(&self) -> Option<usize> {
        match self.mode {
            Mode::Polygonal { k } => Some(k),
            Mode::Circular => None,
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.polygons.iter().map(|p| p.radius).fold(0.0, f64::max)
    }

    /// Total ring masses `Lambda_l` (`k lambda_l` in polygonal mode).
    pub fn total_masses(&self) -> Vec<f64> {
        match self.mode {
            Mode::Polygonal { k } => self.polygons.iter().map(|p| k as f64 * p.mass).collect(),
            Mode::Circular => self.polygons.iter().map(|p| p.mass).collect(),
        }
    }

    /// The circular configuration with the same total ring masses.
    pub fn to_circular(&self) -> Self {
        let polygons = self
            .polygons
            .iter()
            .zip(self.total_masses())
            .map(|(p, m)| Polygon { mass: m, ..*p })
            .collect();
        Self {
            polygons,
            mode: Mode::Circular,
            ..self.clone()
        }
    }

    /// The `k`-gon configuration with the same total ring masses, so each
    /// pole carries `Lambda_l / k`.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        let polygons = self
            .polygons
            .iter()
            .zip(self.total_masses())
            .map(|(p, m)| Polygon {
                mass: m / k as f64,
                ..*p
            })
            .collect();
        Self::new(self.n, self.lambda0, polygons, Mode::Polygonal { k })
    }

    /// Same configuration with every mass replaced by zero except `lambda0`.
    pub fn central_only(&self) -> Self {
        Self {
            polygons: Vec::new(),
            ..self.clone()
        }
    }

    fn polygon(&self, ell: usize) -> Result<&Polygon> {
        self.polygons.get(ell).ok_or_else(|| {
            Error::IndexOutOfRange(format!(
                "polygon {ell} requested, configuration has {}",
                self.polygons.len()
            ))
        })
    }

    fn require_k(&self) -> Result<usize> {
        self.k()
            .ok_or_else(|| Error::InvalidParameter("operation requires polygonal mode".into()))
    }
}

/// Vertices of polygon `ell` in the plane, at angles `phase + 2 pi i/k`,
/// `i = 0..k`.
pub fn polygon_vertices(cfg: &PoleConfiguration, ell: usize) -> Result<Vec<[f64; 2]>> {
    let k = cfg.require_k()?;
    let p = cfg.polygon(ell)?;
    Ok((0..k)
        .map(|i| {
            let a = p.phase + 2.0 * PI * i as f64 / k as f64;
            [p.radius * a.cos(), p.radius * a.sin()]
        })
        .collect())
}

/// `|a - b|` for points at radii `ra`, `rb` separated by the angle `delta`,
/// written to avoid cancellation when the points are close.
pub(crate) fn chord(ra: f64, rb: f64, delta: f64) -> f64 {
    let h = (0.5 * delta).sin();
    ((ra - rb) * (ra - rb) + 4.0 * ra * rb * h * h).sqrt()
}

/// Distance between vertex `i` of polygon `j` and vertex `s` of polygon
/// `ell`.
pub fn pole_distance(cfg: &PoleConfiguration, j: usize, i: usize, ell: usize, s: usize) -> Result<f64> {
    let k = cfg.require_k()?;
    let (pj, pl) = (cfg.polygon(j)?, cfg.polygon(ell)?);
    if i >= k || s >= k {
        return Err(Error::IndexOutOfRange(format!(
            "vertex indices ({i}, {s}) must be below k = {k}"
        )));
    }
    if j == ell {
        if i == s {
            return invalid("distance from a pole to itself requested");
        }
        let d = 2.0 * pj.radius * ((s as f64 - i as f64) * PI / k as f64).sin().abs();
        return Ok(d);
    }
    let delta = 2.0 * PI * (i as f64 - s as f64) / k as f64 + (pj.phase - pl.phase);
    Ok(chord(pj.radius, pl.radius, delta))
}

/// Smallest angle between a vertex of polygon `j` and a vertex of polygon
/// `ell`, in `[0, pi/k]`.
pub fn theta_offset(cfg: &PoleConfiguration, j: usize, ell: usize) -> Result<f64> {
    let k = cfg.require_k()?;
    let (pj, pl) = (cfg.polygon(j)?, cfg.polygon(ell)?);
    let period = 2.0 * PI / k as f64;
    let d = (pl.phase - pj.phase).rem_euclid(period);
    Ok(d.min(period - d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    fn eval(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Less => lhs < rhs,
            Relation::LessEq => lhs <= rhs,
            Relation::Greater => lhs > rhs,
            Relation::GreaterEq => lhs >= rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        }
    }
}

/// How a condition enters the verdict: every hypothesis must hold, at least
/// one alternative must hold (when there are any), and prerequisites are
/// standing assumptions such as positivity of the quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Hypothesis,
    Alternative,
    Prerequisite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub holds: bool,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub title: String,
    pub conditions: Vec<Condition>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn new(title: &str) -> Self {
        Self {
            title: title.to_string(),
            conditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, lhs: f64, relation: Relation, rhs: f64) -> bool {
        self.push_with_role(name, lhs, relation, rhs, Role::Hypothesis)
    }

    fn push_with_role(&mut self, name: &str, lhs: f64, relation: Relation, rhs: f64, role: Role) -> bool {
        let holds = relation.eval(lhs, rhs);
        self.conditions.push(Condition {
            name: name.to_string(),
            lhs,
            relation,
            rhs,
            holds,
            role,
        });
        holds
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// All hypotheses hold and, if alternatives are listed, one of them does.
    pub fn hypotheses_hold(&self) -> bool {
        let all = self
            .conditions
            .iter()
            .filter(|c| c.role == Role::Hypothesis)
            .all(|c| c.holds);
        let mut alts = self
            .conditions
            .iter()
            .filter(|c| c.role == Role::Alternative)
            .peekable();
        let any = alts.peek().is_none() || alts.any(|c| c.holds);
        all && any
    }

    pub fn prerequisites_hold(&self) -> bool {
        self.conditions
            .iter()
            .filter(|c| c.role == Role::Prerequisite)
            .all(|c| c.holds)
    }

    pub fn verdict(&self) -> bool {
        self.hypotheses_hold() && self.prerequisites_hold()
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.title)?;
        for c in &self.conditions {
            let role = match c.role {
                Role::Hypothesis => "",
                Role::Alternative => " (alternative)",
                Role::Prerequisite => " (prerequisite)",
            };
            writeln!(
                f,
                "{}{}: {:.17e} {} {:.17e} -> {}",
                c.name,
                role,
                c.lhs,
                c.relation.symbol(),
                c.rhs,
                if c.holds { "holds" } else { "fails" }
            )?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        writeln!(f, "verdict: {}", if self.verdict() { "pass" } else { "fail" })
    }
}

/// `lambda0^+ + sum Lambda_l^+ < (N-2)^2/4`, plus the per-pole form in
/// polygonal mode.
pub fn check_positivity(cfg: &PoleConfiguration) -> ConditionReport {
    let mut rep = ConditionReport::new("positivity");
    let h = hardy_constant(cfg.n);
    let lhs = cfg.lambda0.max(0.0) + cfg.total_masses().iter().map(|m| m.max(0.0)).sum::<f64>();
    rep.push("lambda0+ + sum Lambda+", lhs, Relation::Less, h);
    if let Mode::Polygonal { k } = cfg.mode {
        let per_pole = cfg.lambda0.max(0.0) + k as f64 * cfg.polygons.iter().map(|p| p.mass.max(0.0)).sum::<f64>();
        rep.push("lambda0+ + k sum lambda+", per_pole, Relation::Less, h);
    }
    rep
}

/// `sum_l m_l / r_l^q` with `q = 2` or `q = sqrt((N-2)^2 - 4 lambda0)`
/// depending on `lambda0`; returns (sum, exponent, branch label).
fn branch_sum(n: usize, lambda0: f64, radii: &[f64], masses: &[f64]) -> (f64, f64, &'static str) {
    let nf = n as f64;
    let (q, label) = if lambda0 <= nf * (nf - 4.0) / 4.0 {
        (2.0, "lambda0 <= N(N-4)/4")
    } else {
        (
            ((nf - 2.0) * (nf - 2.0) - 4.0 * lambda0).sqrt(),
            "N(N-4)/4 < lambda0 < (N-2)^2/4",
        )
    };
    let sum = radii.iter().zip(masses).map(|(r, m)| m / r.powf(q)).sum();
    (sum, q, label)
}

/// Sufficient conditions for the circular-symmetry infimum to be attained.
pub fn check_circ_existence(cfg: &PoleConfiguration) -> Result<ConditionReport> {
    if cfg.n < 4 {
        return invalid(format!("existence conditions need N >= 4, got {}", cfg.n));
    }
    let mut rep = ConditionReport::new("circular existence");
    let h = hardy_constant(cfg.n);
    let masses = cfg.total_masses();
    let radii: Vec<f64> = cfg.polygons.iter().map(|p| p.radius).collect();
    rep.push("sum Lambda", masses.iter().sum(), Relation::LessEq, 0.0);
    rep.push("lambda0", cfg.lambda0, Relation::Less, h);
    if cfg.lambda0 < h {
        let (sum, q, label) = branch_sum(cfg.n, cfg.lambda0, &radii, &masses);
        rep.push("sum Lambda / r^q", sum, Relation::Greater, 0.0);
        rep.notes.push(format!("branch {label}, q = {q:.17e}"));
    }
    let pos = check_positivity(&cfg.to_circular());
    let c = &pos.conditions[0];
    rep.push_with_role(&c.name, c.lhs, c.relation, c.rhs, Role::Prerequisite);
    Ok(rep)
}

/// `sum_{i=1}^{k-1} 1/(4 r^2 sin^2(i pi/k))`, the self-interaction of one
/// polygon seen from one of its vertices.
pub fn self_polygon_sum(k: usize, r: f64) -> f64 {
    (1..k)
        .map(|i| {
            let s = (i as f64 * PI / k as f64).sin();
            1.0 / (4.0 * r * r * s * s)
        })
        .sum()
}

/// `sum_{i=1}^{k} 1/(r_a^2 + r_b^2 - 2 r_a r_b cos(2 pi i/k + theta))`.
pub fn cross_polygon_sum(k: usize, ra: f64, rb: f64, theta: f64) -> f64 {
    (1..=k)
        .map(|i| {
            let d = chord(ra, rb, 2.0 * PI * i as f64 / k as f64 + theta);
            1.0 / (d * d)
        })
        .sum()
}

/// The key sum evaluated at a vertex of the outermost-mass polygon `m`
/// (the last one): central, self and cross contributions.
pub fn existence_key_sum(cfg: &PoleConfiguration) -> Result<f64> {
    let k = cfg.require_k()?;
    let m = match cfg.polygons.len() {
        0 => return invalid("key sum needs at least one polygon"),
        len => len - 1,
    };
    let pm = &cfg.polygons[m];
    let rm = pm.radius;
    let mut sum = cfg.lambda0 / (rm * rm) + pm.mass * self_polygon_sum(k, rm);
    for ell in 0..m {
        let theta = theta_offset(cfg, m, ell)?;
        sum += cfg.polygons[ell].mass * cross_polygon_sum(k, rm, cfg.polygons[ell].radius, theta);
    }
    Ok(sum)
}

/// Sufficient conditions for the `k`-gon infimum to be attained at the
/// given `k` (dimension above 4).
pub fn check_polygon_existence_k(cfg: &PoleConfiguration) -> Result<ConditionReport> {
    let k = cfg.require_k()?;
    if cfg.n <= 4 {
        return invalid(format!("polygon existence conditions need N > 4, got {}", cfg.n));
    }
    if cfg.polygons.is_empty() {
        return invalid("polygon existence conditions need at least one polygon");
    }
    for w in cfg.polygons.windows(2) {
        if w[0].mass > w[1].mass {
            return Err(Error::Unsorted(format!(
                "per-pole masses {} then {}",
                w[0].mass, w[1].mass
            )));
        }
    }
    let nf = cfg.n as f64;
    let h = hardy_constant(cfg.n);
    let mut rep = ConditionReport::new(&format!("polygon existence (k = {k})"));
    let per_pole = cfg.lambda0.max(0.0) + k as f64 * cfg.polygons.iter().map(|p| p.mass.max(0.0)).sum::<f64>();
    rep.push("lambda0+ + k sum lambda+", per_pole, Relation::Less, h);
    let masses: Vec<f64> = cfg.polygons.iter().map(|p| p.mass).collect();
    let radii: Vec<f64> = cfg.polygons.iter().map(|p| p.radius).collect();
    rep.push("sum lambda", masses.iter().sum(), Relation::LessEq, 0.0);
    rep.push(
        "lambda_m",
        *masses.last().unwrap(),
        Relation::LessEq,
        nf * (nf - 4.0) / 4.0,
    );
    rep.push("lambda0", cfg.lambda0, Relation::Less, h);
    if cfg.lambda0 < h {
        let (sum, q, label) = branch_sum(cfg.n, cfg.lambda0, &radii, &masses);
        rep.push("sum lambda / r^q", sum, Relation::Greater, 0.0);
        rep.notes.push(format!("branch {label}, q = {q:.17e}"));
    }
    rep.push("key sum", existence_key_sum(cfg)?, Relation::Greater, 0.0);
    Ok(rep)
}

/// Smallest `k <= k_max` for which the `k`-gon conditions hold when every
/// ring keeps its total mass and each pole carries `Lambda_l / k`.
pub fn min_k_for_existence(cfg: &PoleConfiguration, k_max: usize) -> Result<Option<usize>> {
    if cfg.n <= 4 {
        return invalid(format!("polygon existence conditions need N > 4, got {}", cfg.n));
    }
    for k in 1..=k_max {
        let ck = match cfg.with_k(k) {
            Ok(c) => c,
            // k-gons that put two rings on top of each other are skipped
            Err(Error::InvalidParameter(_)) => continue,
            Err(e) => return Err(e),
        };
        if check_polygon_existence_k(&ck)?.verdict() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

const CASE_NEGATIVE: &str = "max Lambda";
const CASE_POSITIVE: &str = "min(lambda0, min Lambda)";

/// Same-sign mass cases in which neither infimum is attained: all ring
/// masses negative, or the central and all ring masses positive.
pub fn check_nonattainability(cfg: &PoleConfiguration) -> ConditionReport {
    let mut rep = ConditionReport::new("non-attainability");
    let masses = cfg.total_masses();
    if masses.is_empty() {
        rep.notes.push("no rings: only the central pole".into());
    } else {
        let max = masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = masses.iter().copied().fold(cfg.lambda0, f64::min);
        rep.push_with_role(CASE_NEGATIVE, max, Relation::Less, 0.0, Role::Alternative);
        rep.push_with_role(CASE_POSITIVE, min, Relation::Greater, 0.0, Role::Alternative);
    }
    let pos = check_positivity(cfg);
    let c = &pos.conditions[0];
    rep.push_with_role(&c.name, c.lhs, c.relation, c.rhs, Role::Prerequisite);
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SameSignCase {
    AllNegative,
    AllPositive,
}

/// Which same-sign case a non-attainability report found, if any.
pub fn same_sign_case(rep: &ConditionReport) -> Option<SameSignCase> {
    if rep.get(CASE_NEGATIVE).is_some_and(|c| c.holds) {
        Some(SameSignCase::AllNegative)
    } else if rep.get(CASE_POSITIVE).is_some_and(|c| c.holds) {
        Some(SameSignCase::AllPositive)
    } else {
        None
    }
}
