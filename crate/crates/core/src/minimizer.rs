//! Minimization of the discrete Rayleigh quotient, threshold levels,
//! dilation scans and local power-law exponents of minimizers.

use rayon::prelude::*;

use crate::closed_forms::{hardy_constant, HardyParameter, RadialProfile};
use crate::discretization::{
    sample_closed_form, Center, DiscreteProblem, EnergyBreakdown, Field, GridMode, MeshSpec, ReducedGrid,
    StiffnessSolver,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::{check_positivity, Mode, PoleConfiguration};
use crate::quadrature::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Stop when the relative dual-norm residual drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations given to each starting point before the best is refined.
    pub multistart_iter: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 20_000,
            multistart_iter: 60,
        }
    }
}

/// Starting points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// The one-pole minimizer for the central mass.
    Origin,
    /// Bumps at the vertices of the positive-mass rings.
    Rings,
    /// A wide bump covering every ring.
    Flat,
}

pub const PRESETS: [Preset; 3] = [Preset::Origin, Preset::Rings, Preset::Flat];

#[derive(Debug, Clone)]
pub enum Init {
    Field(Field),
    Preset(Preset),
    /// Short runs from every preset, then refinement of the best.
    Multistart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub quotient: f64,
    pub step: f64,
    pub residual: f64,
}

/// Comparison levels from companion runs on the same grid family.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    /// Level of the zero-potential problem (the grid's Sobolev constant).
    pub sobolev_proxy: f64,
    /// `k^{2/N}` times the Sobolev proxy (polygonal mode).
    pub k_sobolev: Option<f64>,
    /// `k^{2/N} S(lambda_l)/S` times the proxy, one per ring with
    /// `0 <= lambda_l`.
    pub per_pole: Vec<Option<f64>>,
    /// Level with the central mass only.
    pub central: f64,
    /// Level with central mass `lambda0 + k sum lambda_l` (polygonal mode),
    /// `None` when that mass is not below the Hardy constant.
    pub merged: Option<f64>,
}

impl Thresholds {
    /// Smallest comparison level.
    pub fn minimum(&self) -> f64 {
        let mut m = self.central;
        for v in self
            .k_sobolev
            .iter()
            .chain(self.per_pole.iter().flatten())
            .chain(self.merged.iter())
        {
            m = m.min(*v);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct MinimizationResult {
    pub level: f64,
    pub field: Field,
    pub breakdown: EnergyBreakdown,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    pub thresholds: Option<Thresholds>,
    /// Level reached from each starting point in a multistart run.
    pub starts: Vec<(Preset, f64)>,
}

struct State {
    u: Vec<f64>,
    au: Vec<f64>,
    level: f64,
}

/// Normalized gradient flow accelerated by preconditioned nonlinear
/// conjugate gradients, with a line search that only accepts decrease.
pub struct Minimizer<'a> {
    problem: &'a DiscreteProblem,
    solver: StiffnessSolver,
}

impl<'a> Minimizer<'a> {
    pub fn new(problem: &'a DiscreteProblem) -> Result<Self> {
        let pos = check_positivity(&problem.cfg);
        if !pos.verdict() {
            let c = pos.conditions.iter().find(|c| !c.holds).unwrap_or(&pos.conditions[0]);
            return Err(Error::Indefinite(format!(
                "positivity condition fails ({} = {} >= {})",
                c.name, c.lhs, c.rhs
            )));
        }
        Ok(Self {
            problem,
            solver: StiffnessSolver::new(&problem.grid)?,
        })
    }

    pub fn problem(&self) -> &DiscreteProblem {
        self.problem
    }

    fn normalize(&self, u: &mut [f64]) -> Result<()> {
        let n = self.problem.lp_power(u)?;
        if !(n > 0.0) {
            return Err(Error::ZeroField);
        }
        let c = n.powf(-1.0 / self.problem.exponent());
        u.par_iter_mut().for_each(|x| *x *= c);
        Ok(())
    }

    fn state(&self, mut u: Vec<f64>) -> Result<State> {
        self.normalize(&mut u)?;
        let mut au = vec![0.0; u.len()];
        self.problem.apply_operator(&u, &mut au);
        let level = self.problem.dot(&u, &au);
        Ok(State { u, au, level })
    }

    /// Relative residual `sqrt(r.K^{-1}r) / sqrt(u.Ku)` of the discrete
    /// equation `(K - V)u = R m |u|^{2*-2} u` at a normalized field.
    pub fn residual(&self, u: &[f64]) -> Result<f64> {
        let st = self.state(u.to_vec())?;
        let mut g = vec![0.0; u.len()];
        self.problem.quotient_gradient(&st.u, &st.au, &mut g)?;
        let mut z = vec![0.0; u.len()];
        self.solver.solve(&g, &mut z);
        Ok(self.relative(&st.u, &g, &z))
    }

    fn relative(&self, u: &[f64], g: &[f64], z: &[f64]) -> f64 {
        // g = 2 r at unit norm
        let dual = (0.25 * self.problem.dot(g, z)).max(0.0).sqrt();
        let mut ku = vec![0.0; u.len()];
        self.problem.apply_stiffness(u, &mut ku);
        dual / self.problem.dot(u, &ku).sqrt()
    }

    /// Starting field for a preset.
    pub fn preset_field(&self, preset: Preset) -> Result<Field> {
        let g = &self.problem.grid;
        let cfg = &self.problem.cfg;
        let n = cfg.dimension();
        let scale = if cfg.polygons().is_empty() {
            1.0
        } else {
            cfg.max_radius()
        };
        match preset {
            Preset::Origin => {
                let lam = cfg.lambda0().min(0.9 * hardy_constant(n));
                let prof = RadialProfile::z(HardyParameter::new(n, lam)?, 0.3 * scale)?;
                sample_closed_form(g, cfg, &prof, Center::Origin)
            }
            Preset::Rings => {
                let masses = cfg.total_masses();
                let mut chosen: Vec<usize> = (0..masses.len()).filter(|&l| masses[l] > 0.0).collect();
                if chosen.is_empty() && !masses.is_empty() {
                    chosen.push(0);
                }
                if chosen.is_empty() {
                    return self.preset_field(Preset::Origin);
                }
                let mut vals = vec![0.0; g.len()];
                for ell in chosen {
                    let ring = cfg.polygons()[ell];
                    let lam = match cfg.mode() {
                        Mode::Polygonal { .. } => ring.mass.clamp(0.0, 0.9 * hardy_constant(n)),
                        Mode::Circular => 0.0,
                    };
                    let prof = RadialProfile::z(HardyParameter::new(n, lam)?, 0.1 * ring.radius)?;
                    let f = sample_closed_form(g, cfg, &prof, Center::Ring(ell))?;
                    for (a, b) in vals.iter_mut().zip(f.values()) {
                        *a += b;
                    }
                }
                Field::from_values(g, vals)
            }
            Preset::Flat => {
                let prof = RadialProfile::w(HardyParameter::new(n, 0.0)?, 1.5 * scale)?;
                sample_closed_form(g, cfg, &prof, Center::Origin)
            }
        }
    }

    pub fn minimize(&self, init: Init, opts: &MinimizeOptions) -> Result<MinimizationResult> {
        match init {
            Init::Field(f) => self.run(f.into_values(), opts, Vec::new()),
            Init::Preset(p) => self.run(self.preset_field(p)?.into_values(), opts, Vec::new()),
            Init::Multistart => {
                let short = MinimizeOptions {
                    max_iter: opts.multistart_iter,
                    ..*opts
                };
                let runs = PRESETS
                    .par_iter()
                    .map(|&p| {
                        let f = self.preset_field(p)?;
                        Ok((p, self.run(f.into_values(), &short, Vec::new())?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let starts: Vec<(Preset, f64)> = runs.iter().map(|(p, r)| (*p, r.level)).collect();
                let (_, best) = runs
                    .into_iter()
                    .min_by(|a, b| a.1.level.partial_cmp(&b.1.level).unwrap())
                    .unwrap();
                let mut res = self.run(best.field.into_values(), opts, starts)?;
                let mut trace = best.trace;
                let offset = best.iterations;
                trace.extend(res.trace.iter().map(|r| TraceRow {
                    iteration: r.iteration + offset,
                    ..*r
                }));
                res.trace = trace;
                res.iterations += offset;
                Ok(res)
            }
        }
    }

    fn run(&self, u0: Vec<f64>, opts: &MinimizeOptions, starts: Vec<(Preset, f64)>) -> Result<MinimizationResult> {
        let pb = self.problem;
        let len = pb.len();
        let u0 = Field::from_values(&pb.grid, u0)?.into_values();
        let mut st = self.state(u0)?;
        let mut g = vec![0.0; len];
        let mut z = vec![0.0; len];
        let mut d = vec![0.0; len];
        let mut ad = vec![0.0; len];
        let mut g_prev = vec![0.0; len];
        let mut gz_prev = 0.0;
        let mut step_prev = 0.0;
        let mut trace = Vec::new();
        pb.quotient_gradient(&st.u, &st.au, &mut g)?;
        self.solver.solve(&g, &mut z);
        let mut residual = self.relative(&st.u, &g, &z);
        trace.push(TraceRow {
            iteration: 0,
            quotient: st.level,
            step: 0.0,
            residual,
        });
        let mut converged = residual <= opts.tol;
        let mut it = 0;
        let mut restart = true;
        while !converged && it < opts.max_iter {
            it += 1;
            let gz = pb.dot(&g, &z);
            let beta = if restart || gz_prev == 0.0 {
                0.0
            } else {
                let num = pb.reduce(|i| z[i] * (g[i] - g_prev[i]));
                (num / gz_prev).max(0.0)
            };
            d.par_iter_mut()
                .zip(z.par_iter())
                .for_each(|(di, zi)| *di = -zi + beta * *di);
            let mut slope = pb.dot(&g, &d);
            if !(slope < 0.0) {
                d.par_iter_mut().zip(z.par_iter()).for_each(|(di, zi)| *di = -zi);
                slope = -gz;
            }
            pb.apply_operator(&d, &mut ad);
            let search = self.line_search(&st, &d, &ad, slope, step_prev)?;
            let Some((t, value)) = search else {
                if restart {
                    // no decrease even along the preconditioned gradient:
                    // the quotient is flat at working precision
                    break;
                }
                restart = true;
                continue;
            };
            restart = false;
            step_prev = t;
            let scale = {
                st.u.par_iter_mut().zip(d.par_iter()).for_each(|(a, b)| *a += t * b);
                let n = pb.lp_power(&st.u)?;
                n.powf(-1.0 / pb.exponent())
            };
            st.u.par_iter_mut().for_each(|x| *x *= scale);
            if it % 50 == 0 {
                pb.apply_operator(&st.u, &mut st.au);
            } else {
                st.au
                    .par_iter_mut()
                    .zip(ad.par_iter())
                    .for_each(|(a, b)| *a = (*a + t * b) * scale);
            }
            st.level = pb.dot(&st.u, &st.au);
            std::mem::swap(&mut g, &mut g_prev);
            gz_prev = gz;
            pb.quotient_gradient(&st.u, &st.au, &mut g)?;
            self.solver.solve(&g, &mut z);
            residual = self.relative(&st.u, &g, &z);
            trace.push(TraceRow {
                iteration: it,
                quotient: value,
                step: t,
                residual,
            });
            converged = residual <= opts.tol;
        }
        // |u| is a minimizer whenever u is
        let abs: Vec<f64> = st.u.iter().map(|x| x.abs()).collect();
        let st = self.state(abs)?;
        pb.quotient_gradient(&st.u, &st.au, &mut g)?;
        self.solver.solve(&g, &mut z);
        let residual = self.relative(&st.u, &g, &z);
        let field = Field::from_values(&pb.grid, st.u)?;
        let breakdown = pb.breakdown(field.values())?;
        Ok(MinimizationResult {
            level: breakdown.quotient,
            field,
            breakdown,
            residual,
            iterations: it,
            converged: residual <= opts.tol,
            trace,
            thresholds: None,
            starts,
        })
    }

    /// Minimizes `phi(t) = a(u + t d)/n(u + t d)^{2/2*}` along `d` by a
    /// safeguarded secant iteration on `phi'`; returns the accepted step and
    /// value, or `None` when no decrease is found.
    fn line_search(&self, st: &State, d: &[f64], ad: &[f64], slope: f64, hint: f64) -> Result<Option<(f64, f64)>> {
        let pb = self.problem;
        let p = pb.exponent();
        let m = pb.mass();
        let a0 = st.level;
        let uad = pb.dot(&st.u, ad);
        let dad = pb.dot(d, ad);
        let u = &st.u;
        let eval = |t: f64| -> (f64, f64) {
            let n = pb.reduce(|i| m[i] * (u[i] + t * d[i]).abs().powf(p));
            let dn = p * pb.reduce(|i| {
                let v = u[i] + t * d[i];
                m[i] * v.abs().powf(p - 2.0) * v * d[i]
            });
            let a = a0 + 2.0 * t * uad + t * t * dad;
            let da = 2.0 * uad + 2.0 * t * dad;
            let np = n.powf(-2.0 / p);
            (a * np, np * (da - (2.0 / p) * a * dn / n))
        };
        let phi0 = a0;
        let mut t1 = if hint > 0.0 {
            hint
        } else if dad > 0.0 {
            -slope / (2.0 * dad)
        } else {
            1.0
        };
        if !(t1 > 0.0) || !t1.is_finite() {
            t1 = 1.0;
        }
        // bracket a sign change of phi' (or accept a sufficient decrease)
        let (mut lo, mut dlo) = (0.0, slope);
        let mut best: Option<(f64, f64)> = None;
        let mut hi = None;
        let mut t = t1;
        for _ in 0..40 {
            let (v, dv) = eval(t);
            if v.is_finite() && v < phi0 && best.is_none_or(|b: (f64, f64)| v < b.1) {
                best = Some((t, v));
            }
            if !v.is_finite() || v > phi0 + 1e-4 * t * slope {
                hi = Some((t, dv));
                break;
            }
            if dv.abs() <= 0.1 * slope.abs() {
                return Ok(best);
            }
            if dv > 0.0 {
                hi = Some((t, dv));
                break;
            }
            lo = t;
            dlo = dv;
            t *= 2.0;
        }
        let Some((mut thi, mut dhi)) = hi else {
            return Ok(best);
        };
        for _ in 0..30 {
            // secant on phi', kept inside the bracket
            let mut t = if dhi.is_finite() && dhi > dlo {
                lo - dlo * (thi - lo) / (dhi - dlo)
            } else {
                0.5 * (lo + thi)
            };
            let width = thi - lo;
            if !(t > lo + 0.01 * width && t < thi - 0.01 * width) {
                t = 0.5 * (lo + thi);
            }
            let (v, dv) = eval(t);
            if v.is_finite() && v < phi0 && best.is_none_or(|b: (f64, f64)| v < b.1) {
                best = Some((t, v));
            }
            let armijo = v.is_finite() && v <= phi0 + 1e-4 * t * slope;
            if armijo && dv.abs() <= 0.1 * slope.abs() {
                return Ok(best);
            }
            if !armijo || dv > 0.0 {
                thi = t;
                dhi = dv;
            } else {
                lo = t;
                dlo = dv;
            }
            if (thi - lo) <= 1e-12 * thi {
                break;
            }
        }
        Ok(best)
    }
}

/// Builds the grid and minimizes in one call.
pub fn minimize_quotient(
    spec: &MeshSpec,
    cfg: &PoleConfiguration,
    init: Init,
    opts: &MinimizeOptions,
) -> Result<MinimizationResult> {
    let grid = ReducedGrid::build(spec, cfg)?;
    let pb = DiscreteProblem::new(grid, cfg.clone())?;
    Minimizer::new(&pb)?.minimize(init, opts)
}

/// Which symmetry class a single-mass level is computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Sector(usize),
    Circular,
}

/// Minimized level of the central-mass-only problem in a symmetry class,
/// on the grid family of `geometry` (its rings shape the mesh but carry no
/// mass).
pub fn estimate_level_family(
    spec: &MeshSpec,
    geometry: &PoleConfiguration,
    lambda: f64,
    symmetry: Symmetry,
    opts: &MinimizeOptions,
) -> Result<MinimizationResult> {
    let n = geometry.dimension();
    if lambda >= hardy_constant(n) {
        return invalid(format!("mass {lambda} must be below {}", hardy_constant(n)));
    }
    let mode = match symmetry {
        Symmetry::Sector(k) => Mode::Polygonal { k },
        Symmetry::Circular => Mode::Circular,
    };
    let rings = geometry
        .polygons()
        .iter()
        .map(|p| crate::geometry::Polygon { mass: 0.0, ..*p })
        .collect();
    let cfg = PoleConfiguration::new(n, lambda, rings, mode)?;
    let grid = ReducedGrid::build(spec, &cfg)?;
    let pb = DiscreteProblem::new(grid, cfg)?;
    Minimizer::new(&pb)?.minimize(Init::Preset(Preset::Origin), opts)
}

/// Companion runs for the comparison levels of `cfg` on the same mesh.
pub fn compute_thresholds(spec: &MeshSpec, cfg: &PoleConfiguration, opts: &MinimizeOptions) -> Result<Thresholds> {
    let n = cfg.dimension();
    let sym = match cfg.mode() {
        Mode::Polygonal { k } => Symmetry::Sector(k),
        Mode::Circular => Symmetry::Circular,
    };
    let sobolev_proxy = estimate_level_family(spec, cfg, 0.0, sym, opts)?.level;
    let central = estimate_level_family(spec, cfg, cfg.lambda0(), sym, opts)?.level;
    let (k_sobolev, per_pole, merged) = match cfg.mode() {
        Mode::Polygonal { k } => {
            let kf = (k as f64).powf(2.0 / n as f64);
            let per = cfg
                .polygons()
                .iter()
                .map(|p| {
                    if p.mass >= 0.0 && p.mass < hardy_constant(n) {
                        let r = crate::closed_forms::level_ratio(&HardyParameter::new(n, p.mass).ok()?).ok()?;
                        Some(kf * r * sobolev_proxy)
                    } else {
                        None
                    }
                })
                .collect();
            let lam = cfg.lambda0() + k as f64 * cfg.polygons().iter().map(|p| p.mass).sum::<f64>();
            let merged = if lam < hardy_constant(n) {
                Some(estimate_level_family(spec, cfg, lam, sym, opts)?.level)
            } else {
                None
            };
            (Some(kf * sobolev_proxy), per, merged)
        }
        Mode::Circular => (None, Vec::new(), None),
    };
    Ok(Thresholds {
        sobolev_proxy,
        k_sobolev,
        per_pole,
        central,
        merged,
    })
}

/// Best match `amplitude * z^lambda_mu` of an origin-centered field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileFit {
    pub mu: f64,
    pub amplitude: f64,
    /// `|u - c z_mu| / |u|` in the discrete `L^{2*}` norm.
    pub relative_error: f64,
}

fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Fits the one-pole profile with mass `lambda` (centered at the origin) to
/// `field`, scanning `mu` over the resolved scales and refining by golden
/// section in `ln mu` and in the amplitude.
pub fn fit_central_profile(problem: &DiscreteProblem, field: &Field, lambda: f64) -> Result<ProfileFit> {
    let cfg = &problem.cfg;
    let g = &problem.grid;
    let u = field.values();
    let m = problem.mass();
    let p = problem.exponent();
    let base = RadialProfile::z(HardyParameter::new(cfg.dimension(), lambda)?, 1.0)?;
    let norm_u = problem.lp_power(u)?;
    if !(norm_u > 0.0) {
        return Err(Error::ZeroField);
    }
    let error_at = |ln_mu: f64| -> Result<(f64, f64)> {
        let z = sample_closed_form(g, cfg, &base.with_mu(ln_mu.exp())?, Center::Origin)?;
        let z = z.values();
        let norm_z = problem.reduce(|i| m[i] * z[i].abs().powf(p));
        if !(norm_z > 0.0) {
            return Ok((0.0, f64::INFINITY));
        }
        let c0 = (norm_u / norm_z).powf(1.0 / p);
        let (c, e) = golden_min(
            |c| problem.reduce(|i| m[i] * (u[i] - c * z[i]).abs().powf(p)),
            0.0,
            2.0 * c0,
            60,
        );
        Ok((c, (e / norm_u).powf(1.0 / p)))
    };
    let lo = g.rho[0].ln();
    let hi = g.truncation().ln();
    let steps = (((hi - lo) / 10f64.ln()) * 8.0).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    let mut best = (0, f64::INFINITY);
    for q in 0..=steps {
        let (_, e) = error_at(lo + q as f64 * h)?;
        if e < best.1 {
            best = (q, e);
        }
    }
    let center = lo + best.0 as f64 * h;
    let mut failure = None;
    let (ln_mu, _) = golden_min(
        |x| match error_at(x) {
            Ok((_, e)) => e,
            Err(err) => {
                failure = Some(err);
                f64::INFINITY
            }
        },
        center - h,
        center + h,
        50,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let (amplitude, relative_error) = error_at(ln_mu)?;
    Ok(ProfileFit {
        mu: ln_mu.exp(),
        amplitude,
        relative_error,
    })
}

/// Where a dilation family is concentrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleSet {
    Origin,
    Ring(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuScanResult {
    pub mu_values: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    /// Quotient of the same family with only the concentration point's own
    /// potential.
    pub concentration_levels: Vec<f64>,
    pub best_mu: f64,
    pub best_bound: f64,
}

impl MuScanResult {
    /// Largest drop of the full bound below the concentration-only level.
    pub fn max_dip(&self) -> f64 {
        self.upper_bounds
            .iter()
            .zip(&self.concentration_levels)
            .map(|(b, c)| c - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Quotients of the full problem along `z^lambda_mu` concentrated at the
/// origin or at the vertices of one ring, next to the quotient with only
/// that point's own inverse-square term.
pub fn mu_scan_upper_bound(
    problem: &DiscreteProblem,
    pole_set: PoleSet,
    lambda_profile: f64,
    mu_grid: &[f64],
) -> Result<MuScanResult> {
    let cfg = &problem.cfg;
    let n = cfg.dimension();
    let (center, own) = match pole_set {
        PoleSet::Origin => (
            Center::Origin,
            PoleConfiguration::central(n, cfg.lambda0(), cfg.mode())?,
        ),
        PoleSet::Ring(ell) => {
            if ell >= cfg.polygons().len() {
                return Err(Error::IndexOutOfRange(format!("ring {ell}")));
            }
            let rings = cfg
                .polygons()
                .iter()
                .enumerate()
                .map(|(j, p)| crate::geometry::Polygon {
                    mass: if j == ell { p.mass } else { 0.0 },
                    ..*p
                })
                .collect();
            (Center::Ring(ell), PoleConfiguration::new(n, 0.0, rings, cfg.mode())?)
        }
    };
    let own_pb = DiscreteProblem::new(problem.grid.clone(), own)?;
    let param = HardyParameter::new(n, lambda_profile)?;
    let base = RadialProfile::z(param, 1.0)?;
    let mut bounds = Vec::with_capacity(mu_grid.len());
    let mut levels = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let prof = base.with_mu(mu)?;
        let f = sample_closed_form(&problem.grid, cfg, &prof, center)?;
        bounds.push(problem.rayleigh_quotient(f.values())?);
        levels.push(own_pb.rayleigh_quotient(f.values())?);
    }
    let (bi, &best) = bounds
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or_else(|| Error::InvalidParameter("empty mu grid".into()))?;
    Ok(MuScanResult {
        mu_values: mu_grid.to_vec(),
        upper_bounds: bounds,
        concentration_levels: levels,
        best_mu: mu_grid[bi],
        best_bound: best,
    })
}

/// A fitted local power law.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub location: String,
    pub exponent: f64,
    /// Radii spanned by the fit.
    pub range: (f64, f64),
    pub max_residual: f64,
    pub reliable: bool,
    /// For poles: whether the minimizer grows toward the pole.
    pub singular: Option<bool>,
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularExponents {
    pub origin: ExponentFit,
    pub infinity: ExponentFit,
    pub poles: Vec<ExponentFit>,
}

fn fit_window(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Option<(f64, f64, usize)> {
    let (mut fx, mut fy) = (Vec::new(), Vec::new());
    for (&x, &y) in xs.iter().zip(ys) {
        if x >= lo && x <= hi && y > 0.0 {
            fx.push(x.ln());
            fy.push(y.ln());
        }
    }
    if fx.len() < 3 {
        return None;
    }
    let (slope, _, res) = linear_fit(&fx, &fy);
    Some((slope, res, fx.len()))
}

/// Log-log slopes of a minimizer: at the origin along the first-plane ray
/// next to the axis, at infinity along the same ray, and at each ring along
/// the normal `s` direction. Pole slopes on sector grids are taken relative
/// to the mid-sector ray so the smooth background cancels.
pub fn extract_singular_exponents(problem: &DiscreteProblem, res: &MinimizationResult) -> Result<SingularExponents> {
    let g = &problem.grid;
    let u = res.field.values();
    let nr = g.n_rho();
    let ns = g.n_s();
    // origin: one decade starting past the two innermost cells, on the
    // diagonal-free ray s = s_1
    let rho_ray: Vec<f64> = (0..nr).map(|i| u[g.index(i, 0, 0)]).collect();
    let inner = g.rho[2];
    let origin = match fit_window(&g.rho, &rho_ray, inner, 10.0 * inner) {
        Some((e, r, npts)) => ExponentFit {
            location: "origin".into(),
            exponent: e,
            range: (inner, 10.0 * inner),
            max_residual: r,
            reliable: npts >= 5 && 10.0 * inner < g.truncation(),
            singular: None,
            mass: Some(problem.cfg.lambda0()),
        },
        None => ExponentFit {
            location: "origin".into(),
            exponent: f64::NAN,
            range: (inner, 10.0 * inner),
            max_residual: f64::NAN,
            reliable: false,
            singular: None,
            mass: Some(problem.cfg.lambda0()),
        },
    };
    let outer = g.truncation() / 4.0;
    let infinity = match fit_window(&g.rho, &rho_ray, outer / 10.0, outer) {
        Some((e, r, npts)) => ExponentFit {
            location: "infinity".into(),
            exponent: e,
            range: (outer / 10.0, outer),
            max_residual: r,
            reliable: npts >= 5 && outer / 10.0 > 2.0 * problem.cfg.max_radius(),
            singular: None,
            mass: None,
        },
        None => ExponentFit {
            location: "infinity".into(),
            exponent: f64::NAN,
            range: (outer / 10.0, outer),
            max_residual: f64::NAN,
            reliable: false,
            singular: None,
            mass: None,
        },
    };
    let mut poles = Vec::new();
    for (ell, ring) in problem.cfg.polygons().iter().enumerate() {
        let i = g
            .rho
            .iter()
            .position(|&r| r == ring.radius)
            .ok_or_else(|| Error::InvalidParameter(format!("ring {ell} radius is not a grid node")))?;
        let (profile, corrected) = match g.mode {
            GridMode::Sector { .. } => {
                let period = g.period();
                let nt = g.n_theta();
                let at = |th: f64| ((th.rem_euclid(period) / g.dtheta).round() as usize) % nt;
                let jp = at(ring.phase);
                let jm = at(ring.phase + 0.5 * period);
                let ys: Vec<f64> = (0..ns).map(|l| u[g.index(i, jp, l)] / u[g.index(i, jm, l)]).collect();
                (ys, true)
            }
            GridMode::Circular => ((0..ns).map(|l| u[g.index(i, 0, l)]).collect(), false),
        };
        // the closest resolved distances: from past the two innermost cells
        // out to one tenth of the ring radius, capped at one decade
        let lo = match g.mode {
            GridMode::Sector { .. } => g.s[2].max(ring.radius * g.dtheta),
            GridMode::Circular => g.s[2],
        };
        let hi = (10.0 * lo).min(0.3 * ring.radius);
        let fit = fit_window(&g.s, &profile, lo, hi);
        let mass = problem.cfg.polygons()[ell].mass;
        poles.push(match fit {
            Some((e, r, npts)) => ExponentFit {
                location: format!("ring {ell}{}", if corrected { "" } else { " (uncorrected)" }),
                exponent: e,
                range: (lo, hi),
                max_residual: r,
                reliable: npts >= 4 && hi > 2.0 * lo,
                singular: Some(e < 0.0),
                mass: Some(mass),
            },
            None => ExponentFit {
                location: format!("ring {ell}"),
                exponent: f64::NAN,
                range: (lo, hi),
                max_residual: f64::NAN,
                reliable: false,
                singular: None,
                mass: Some(mass),
            },
        });
    }
    Ok(SingularExponents {
        origin,
        infinity,
        poles,
    })
}
