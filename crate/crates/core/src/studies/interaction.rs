//! Interaction integrals of one-pole profiles with a shifted inverse-square
//! weight, their small-`mu` scaling laws and the limiting constants.
//!
//! Every integral over `R^N` is reduced to at most two dimensions by the
//! axial symmetry about the line through the two singular points.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::closed_forms::{normalization_alpha, HardyParameter, RadialProfile};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{linear_fit, unit_sphere_area, Estimate, Integrator};

/// `lambda` at which the interaction changes regime, `N(N-4)/4`.
pub fn regime_threshold(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 4.0) / 4.0
}

/// Small-`mu` behavior of the interaction integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `lambda < N(N-4)/4`: `mu^2 |xi|^{-2} int z^2`.
    Quadratic,
    /// `lambda = N(N-4)/4`: `mu^2 |ln mu|` times a constant.
    Logarithmic,
    /// `lambda > N(N-4)/4`: `mu^{(N-2) nu} kappa^2 beta |xi|^{-(N-2) nu}`.
    Fractional,
}

pub fn regime_of(p: &HardyParameter) -> Regime {
    let t = regime_threshold(p.dimension());
    let lam = p.lambda();
    if (lam - t).abs() <= 1e-12 * t.abs().max(1.0) {
        Regime::Logarithmic
    } else if lam < t {
        Regime::Quadratic
    } else {
        Regime::Fractional
    }
}

/// Exponent `sqrt((N-2)^2 - 4 lambda) = (N-2) nu`.
pub fn fractional_exponent(p: &HardyParameter) -> f64 {
    p.gap()
}

/// Outer integral whose integrand evaluates an inner quadrature; the
/// integrand reports its own weighted inner error through the cell, and the
/// largest one times the interval length bounds the inner contribution.
fn integrate_tracked<F: Fn(f64, &Cell<f64>) -> f64>(f: F, a: f64, b: f64, breaks: &[f64]) -> Result<f64> {
    let inner = Cell::new(0.0);
    let est = Integrator::with_rel_tol(1e-10).integrate_lenient(&|x| f(x, &inner), a, b, breaks);
    let err = est.error + inner.get() * (b - a).abs();
    if !est.value.is_finite() || err > 1e-8 * est.value.abs() {
        return Err(Error::Quadrature {
            estimate: est.value,
            error: err,
        });
    }
    Ok(est.value)
}

/// `int_0^pi sin^{N-2} psi / (1 + rho^2 + 2 sign rho cos psi) d psi`, the
/// angular part of `|x + e|^{-2}` over spheres about the origin.
fn axial_kernel_signed(n: usize, rho: f64, sign: f64) -> Estimate {
    let f = |psi: f64| {
        let h = if sign > 0.0 {
            (0.5 * psi).cos()
        } else {
            (0.5 * psi).sin()
        };
        let d2 = (1.0 - rho) * (1.0 - rho) + 4.0 * rho * h * h;
        if d2 <= 0.0 {
            return 0.0;
        }
        psi.sin().powi(n as i32 - 2) / d2
    };
    // the denominator nearly vanishes at the far end when rho ~ 1
    let w = (1.0 - rho).abs().max(1e-300);
    let peak = if sign > 0.0 { PI } else { 0.0 };
    let breaks: Vec<f64> = [1.0, 3.0, 10.0, 30.0, 100.0]
        .iter()
        .filter(|&&c| c * w < PI)
        .map(|&c| if sign > 0.0 { peak - c * w } else { c * w })
        .collect();
    Integrator::with_rel_tol(1e-12).integrate_lenient(&f, 0.0, PI, &breaks)
}

pub(crate) fn axial_kernel(n: usize, rho: f64) -> Estimate {
    axial_kernel_signed(n, rho, 1.0)
}

/// `int_{R^N} z_mu(x)^2 / |x + xi|^2 dx` with `z_mu` the normalized one-pole
/// solution for `p`.
pub fn interaction_integral(p: &HardyParameter, mu: f64, xi_distance: f64) -> Result<f64> {
    interaction_integral_oriented(p, mu, xi_distance, 1.0)
}

/// Same integral with the reduction axis reversed (`xi -> -xi`).
pub(crate) fn interaction_integral_oriented(p: &HardyParameter, mu: f64, d: f64, sign: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return invalid(format!("mu must be positive, got {mu}"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return invalid(format!("|xi| must be positive, got {d}"));
    }
    let n = p.dimension();
    let nf = n as f64;
    let prof = RadialProfile::z(*p, mu)?;
    let nu = p.nu();
    // decay rates of the integrand in ln t toward 0 and infinity
    let rate0 = 2.0 + (nf - 2.0) * nu;
    let rate_inf = (nf - 2.0) * nu;
    let lo = mu.min(d).ln() - 40.0 / rate0;
    let hi = mu.max(d).ln() + 40.0 / rate_inf;
    let f = |tau: f64, inner: &Cell<f64>| {
        let t = tau.exp();
        let z = prof.value(t);
        let g = axial_kernel_signed(n, t / d, sign);
        let w = z * z * (nf * tau).exp();
        inner.set(inner.get().max(w * g.error));
        w * g.value
    };
    let v = integrate_tracked(f, lo, hi, &[mu.ln(), d.ln()])?;
    Ok(unit_sphere_area(n - 2) * v / (d * d))
}

/// `int z_1^2` over `R^N` (finite in the quadratic regime).
pub fn profile_l2_squared(p: &HardyParameter) -> Result<f64> {
    if regime_of(p) != Regime::Quadratic {
        return invalid("z is square integrable only below N(N-4)/4");
    }
    let n = p.dimension();
    let nf = n as f64;
    let prof = RadialProfile::z(*p, 1.0)?;
    let rate0 = 2.0 + (nf - 2.0) * p.nu();
    let rate_inf = (nf - 2.0) * p.nu() - 2.0;
    let f = |tau: f64| {
        let z = prof.value(tau.exp());
        z * z * (nf * tau).exp()
    };
    let est = Integrator::with_rel_tol(1e-11).integrate_with_breaks(f, -40.0 / rate0, 40.0 / rate_inf, &[0.0])?;
    Ok(unit_sphere_area(n - 1) * est.value)
}

/// Result of a scaling fit in `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFitReport {
    pub regime: Regime,
    pub xi_distance: f64,
    pub mu_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of `ln(value)` (or `ln(value/|ln mu|)` in the logarithmic
    /// regime) against `ln mu`, over all but the two largest `mu`.
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub log_correction: bool,
    pub max_residual: f64,
    /// Coefficient of the leading term, measured and predicted: `value /
    /// mu^slope` at the smallest `mu`, or in the logarithmic regime the slope
    /// of `value / mu^2` against `|ln mu|`.
    pub prefactor: (f64, f64),
    /// Largest relative deviation of `value / (mu^2 |ln mu|)` from its mean
    /// over the fitted points (logarithmic regime only).
    pub log_constant_spread: Option<f64>,
    /// Set when the fit residual exceeds `0.05` in log units.
    pub flagged: bool,
}

impl ScalingFitReport {
    pub fn slope_error(&self) -> f64 {
        (self.fitted_slope - self.predicted_slope).abs()
    }

    pub fn prefactor_ratio(&self) -> f64 {
        self.prefactor.0 / self.prefactor.1
    }
}

/// `points` geometric values from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return invalid(format!(
            "need 0 < lo < hi and at least 2 points, got [{lo}, {hi}] x {points}"
        ));
    }
    let step = (hi / lo).ln() / (points - 1) as f64;
    Ok((0..points).map(|i| lo * (step * i as f64).exp()).collect())
}

/// Default `mu` range of the scaling fits.
pub const DEFAULT_MU_RANGE: (f64, f64) = (1e-7, 1e-5);
pub const DEFAULT_MU_POINTS: usize = 13;

/// Measures the interaction integral along a geometric `mu` grid and fits its
/// small-`mu` power law against the regime prediction.
pub fn fit_interaction_scaling(
    p: &HardyParameter,
    xi_distance: f64,
    mu_range: (f64, f64),
    points: usize,
) -> Result<ScalingFitReport> {
    let (lo, hi) = mu_range;
    if hi > 1e-1 || (hi / lo).log10() < 2.0 - 1e-12 {
        return invalid(format!(
            "mu range [{lo}, {hi}] must span at least two decades below 1e-1"
        ));
    }
    if points < 5 {
        return invalid("need at least 5 mu points");
    }
    let mu_grid = geometric_grid(lo, hi, points)?;
    let values = mu_grid
        .iter()
        .map(|&mu| interaction_integral(p, mu, xi_distance))
        .collect::<Result<Vec<_>>>()?;
    let regime = regime_of(p);
    let n = p.dimension();
    let d = xi_distance;
    let kept = points - 2;
    let x: Vec<f64> = mu_grid[..kept].iter().map(|m| m.ln()).collect();
    let log_correction = regime == Regime::Logarithmic;
    let y: Vec<f64> = mu_grid[..kept]
        .iter()
        .zip(&values)
        .map(|(m, v)| {
            if log_correction {
                (v / m.ln().abs()).ln()
            } else {
                v.ln()
            }
        })
        .collect();
    let (fitted_slope, _, max_residual) = linear_fit(&x, &y);
    let alpha = normalization_alpha(p)?;
    let mu0 = mu_grid[0];
    let (predicted_slope, prefactor) = match regime {
        Regime::Quadratic => (2.0, (values[0] / (mu0 * mu0), profile_l2_squared(p)? / (d * d))),
        Regime::Logarithmic => {
            // value / mu^2 = C |ln mu| + D: the slope removes the constant
            let lx: Vec<f64> = mu_grid[..kept].iter().map(|m| m.ln().abs()).collect();
            let ly: Vec<f64> = mu_grid[..kept].iter().zip(&values).map(|(m, v)| v / (m * m)).collect();
            let (c, _, _) = linear_fit(&lx, &ly);
            (2.0, (c, unit_sphere_area(n - 1) * alpha * alpha / (d * d)))
        }
        Regime::Fractional => {
            let e = fractional_exponent(p);
            (
                e,
                (values[0] / mu0.powf(e), alpha * alpha * beta_constant(p)? * d.powf(-e)),
            )
        }
    };
    let log_constant_spread = if log_correction {
        let c: Vec<f64> = mu_grid[..kept]
            .iter()
            .zip(&values)
            .map(|(m, v)| v / (m * m * m.ln().abs()))
            .collect();
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        Some(c.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(ScalingFitReport {
        regime,
        xi_distance,
        mu_grid,
        values,
        fitted_slope,
        predicted_slope,
        log_correction,
        max_residual,
        prefactor,
        log_constant_spread,
        flagged: max_residual > 0.05,
    })
}

fn require_fractional(p: &HardyParameter) -> Result<()> {
    if regime_of(p) != Regime::Fractional {
        return invalid(format!(
            "the constant needs N(N-4)/4 < lambda, got lambda = {} (threshold {})",
            p.lambda(),
            regime_threshold(p.dimension())
        ));
    }
    Ok(())
}

/// `beta = int dx / (|x|^2 |x - e_1|^{(N-2)(1+nu)})`, reduced about `e_1`.
pub fn beta_constant(p: &HardyParameter) -> Result<f64> {
    require_fractional(p)?;
    let n = p.dimension();
    let nf = n as f64;
    let e = (nf - 2.0) * (1.0 + p.nu());
    // y = x - e_1: int |y|^{-e} |y + e_1|^{-2}; the kernel tends to G(0) at
    // both ends with O(rho^2) corrections, so the tails are closed forms
    let g0 = axial_kernel(n, 0.0).value;
    let (r0, r1): (f64, f64) = (1e-5, 1e5);
    let f = |tau: f64, inner: &Cell<f64>| {
        let rho = tau.exp();
        let g = axial_kernel(n, rho);
        let w = rho.powf(nf - e);
        inner.set(inner.get().max(w * g.error));
        w * g.value
    };
    let mid = integrate_tracked(f, r0.ln(), r1.ln(), &[0.0])?;
    let head = g0 * r0.powf(nf - e) / (nf - e);
    let tail = g0 * r1.powf(nf - e - 2.0) / (e + 2.0 - nf);
    Ok(unit_sphere_area(n - 2) * (head + mid + tail))
}

/// Which shifted point appears in the denominator of the gradient constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaConvention {
    /// `|x + e_1|`, paired with the numerator `x . (x + e_1)`.
    Plus,
    /// `|x - e_1|`, as printed next to the same numerator.
    Minus,
}

/// `gamma = int x.(x + e_1) / (|x|^a |x -+ e_1|^a) dx` with
/// `a = (N+2)/2 + (N-2) nu/2`.
pub fn gamma_constant(p: &HardyParameter, convention: GammaConvention) -> Result<f64> {
    require_fractional(p)?;
    let n = p.dimension();
    let nf = n as f64;
    let a = (nf + 2.0) / 2.0 + (nf - 2.0) * p.nu() / 2.0;
    // the Minus integrand is taken about its singular point, x = e_1 + w, so
    // both cases read num(t, cos phi) / (t^a |w + e_1|^a) in polar coordinates
    let (num, rate0): (fn(f64, f64) -> f64, f64) = match convention {
        GammaConvention::Plus => (|t, c| t * t + t * c, (nf - 2.0) * (1.0 - p.nu()) / 2.0 + 1.0),
        GammaConvention::Minus => (|t, c| 2.0 + 3.0 * t * c + t * t, (nf - 2.0) * (1.0 - p.nu()) / 2.0),
    };
    let inner_int = |t: f64| -> Estimate {
        let f = |phi: f64| {
            // |w + e_1|^2 without cancellation near t = 1
            let h = (0.5 * phi).cos();
            let d2 = (t - 1.0) * (t - 1.0) + 4.0 * t * h * h;
            if d2 <= 0.0 {
                return 0.0;
            }
            num(t, phi.cos()) * d2.powf(-a / 2.0) * phi.sin().powi(n as i32 - 2)
        };
        let w = (1.0 - t).abs().max(1e-300);
        let breaks: Vec<f64> = [1.0, 3.0, 10.0, 30.0, 100.0]
            .iter()
            .filter(|&&c| c * w < PI)
            .map(|&c| PI - c * w)
            .collect();
        Integrator::with_rel_tol(1e-11).integrate_lenient(&f, 0.0, PI, &breaks)
    };
    // integrate in ln t; the integrand decays like t^rate0 at 0 and like
    // t^{-1-(N-2) nu} at infinity
    let rate_inf = 1.0 + (nf - 2.0) * p.nu();
    let f = |tau: f64, inner: &Cell<f64>| {
        let t = tau.exp();
        let g = inner_int(t);
        let w = t.powf(nf - a);
        inner.set(inner.get().max(w * g.error));
        w * g.value
    };
    let breaks = [-0.1, -0.01, -0.001, 0.0, 0.001, 0.01, 0.1];
    let v = integrate_tracked(f, -40.0 / rate0, 40.0 / rate_inf, &breaks)?;
    Ok(unit_sphere_area(n - 2) * v)
}

/// `int grad z_mu(x) . grad z_mu(x + xi) dx`, evaluated directly.
///
/// The integrand is symmetric under `x -> -xi - x`, so twice the integral
/// over the half-space nearer to the origin is taken; there the only
/// singular point is the origin.
pub fn gradient_interaction(p: &HardyParameter, mu: f64, xi_distance: f64) -> Result<f64> {
    let d = xi_distance;
    if !(mu > 0.0 && mu.is_finite() && d > 0.0 && d.is_finite()) {
        return invalid(format!("need mu > 0 and |xi| > 0, got {mu}, {d}"));
    }
    let n = p.dimension();
    let nf = n as f64;
    let prof = RadialProfile::z(*p, mu)?;
    let dz_d = prof.derivative(d);
    let pw = n as i32 - 2;
    let inner_int = |t: f64| -> Estimate {
        let zt = prof.derivative(t);
        let full = t <= 0.5 * d;
        let top = if full { PI } else { (-d / (2.0 * t)).acos() };
        let f = |phi: f64| {
            let c = phi.cos();
            let b = (t * t + d * d + 2.0 * t * d * c).sqrt();
            // grad z(x).grad z(x+xi) = z'(t) z'(b) x.(x+xi)/(t b)
            let mut g = prof.derivative(b) * (t + d * c) / b;
            if full {
                // the constant-direction part integrates to zero over [0, pi]
                g -= dz_d * c;
            }
            zt * g * phi.sin().powi(pw)
        };
        Integrator::with_rel_tol(1e-12).integrate_lenient(&f, 0.0, top, &[])
    };
    let nu = p.nu();
    let rate0 = (nf - 2.0) * (1.0 + nu) / 2.0 + 1.0;
    let rate_inf = (nf - 2.0) * nu;
    let lo = mu.min(d).ln() - 40.0 / rate0;
    let hi = mu.max(d).ln() + 40.0 / rate_inf;
    let f = |tau: f64, inner: &Cell<f64>| {
        let t = tau.exp();
        let g = inner_int(t);
        let w = (nf * tau).exp();
        inner.set(inner.get().max(w * g.error));
        w * g.value
    };
    let v = integrate_tracked(f, lo, hi, &[mu.ln(), (0.5 * d).ln(), d.ln()])?;
    Ok(2.0 * unit_sphere_area(n - 2) * v)
}

/// Measured and predicted limits of the gradient interaction divided by
/// `mu^{(N-2) nu}`, for both conventions of the constant.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    pub mu: f64,
    pub xi_distance: f64,
    pub measured: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub predicted_plus: f64,
    pub predicted_minus: f64,
    /// The convention within `tolerance` of the measurement, if exactly one.
    pub matching: Option<GammaConvention>,
    pub tolerance: f64,
}

impl GammaReport {
    pub fn ratio(&self, convention: GammaConvention) -> f64 {
        match convention {
            GammaConvention::Plus => self.measured / self.predicted_plus,
            GammaConvention::Minus => self.measured / self.predicted_minus,
        }
    }
}

/// Compares the gradient interaction at `mu` with
/// `alpha^2 ((N-2)^2/4) (1+nu)^2 gamma |xi|^{-(N-2) nu}` for both sign
/// conventions of `gamma`.
pub fn gamma_disambiguation(p: &HardyParameter, mu: f64, xi_distance: f64, tolerance: f64) -> Result<GammaReport> {
    let e = fractional_exponent(p);
    let measured = gradient_interaction(p, mu, xi_distance)? / mu.powf(e);
    let gamma_plus = gamma_constant(p, GammaConvention::Plus)?;
    let gamma_minus = gamma_constant(p, GammaConvention::Minus)?;
    let nf = p.dimension() as f64;
    let alpha = normalization_alpha(p)?;
    let pref = alpha * alpha * (nf - 2.0).powi(2) / 4.0 * (1.0 + p.nu()).powi(2) * xi_distance.powf(-e);
    let predicted_plus = pref * gamma_plus;
    let predicted_minus = pref * gamma_minus;
    let ok_plus = (measured / predicted_plus - 1.0).abs() <= tolerance;
    let ok_minus = (measured / predicted_minus - 1.0).abs() <= tolerance;
    let matching = match (ok_plus, ok_minus) {
        (true, false) => Some(GammaConvention::Plus),
        (false, true) => Some(GammaConvention::Minus),
        _ => None,
    };
    Ok(GammaReport {
        mu,
        xi_distance,
        measured,
        gamma_plus,
        gamma_minus,
        predicted_plus,
        predicted_minus,
        matching,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    /// `|S^{N-2}| int dx1 int_0^inf f(u0, u1, r) r^{N-2} dr` in coordinates
    /// along the axis, rather than around one of the singular points `c0 <
    /// c1`; `f` receives the exact offsets `u0 = x1 - c0` and `u1 = x1 - c1`.
    /// `lo` is the outer cutoff in `ln t` around each singular point.
    fn cylindrical<F: Fn(f64, f64, f64) -> f64>(n: usize, f: F, gap: f64, lo: f64) -> f64 {
        let quad = Integrator::with_rel_tol(1e-10);
        let inner = |u0: f64, u1: f64| {
            let g = |sig: f64| {
                let r = sig.exp();
                f(u0, u1, r) * r.powi(n as i32 - 1)
            };
            let d = u0.abs().min(u1.abs());
            quad.integrate_lenient(&g, d.ln() - 40.0, d.ln().max(0.0) + 40.0, &[d.ln()])
                .value
        };
        let outer = |offsets: &dyn Fn(f64) -> (f64, f64), lo: f64, hi: f64| {
            let h = |tau: f64| {
                let t = tau.exp();
                let (u0, u1) = offsets(t);
                inner(u0, u1) * t
            };
            quad.integrate_lenient(&h, lo, hi, &[]).value
        };
        let w = (0.5 * gap).ln();
        let sum = outer(&|t| (-t, -gap - t), lo, 40.0)
            + outer(&|t| (t, t - gap), lo, w)
            + outer(&|t| (gap - t, -t), lo, w)
            + outer(&|t| (gap + t, t), lo, 40.0);
        unit_sphere_area(n - 2) * sum
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn four_dimensional_kernel_is_newtonian() {
        // in R^4 the spherical mean of |x - y|^{-2} is 1 / max(|x|, |y|)^2
        for rho in [0.0, 0.2, 0.9, 0.999, 1.001, 1.5, 40.0] {
            let g = axial_kernel(4, rho).value;
            let want = 0.5 * PI / rho.max(1.0).powi(2);
            assert!(rel(g, want) < 1e-9, "rho={rho}: {g} vs {want}");
        }
    }

    #[test]
    fn interaction_is_even_in_xi() {
        let p = HardyParameter::new(5, 0.5).unwrap();
        for mu in [1e-3, 0.3, 2.0] {
            let a = interaction_integral_oriented(&p, mu, 1.0, 1.0).unwrap();
            let b = interaction_integral_oriented(&p, mu, 1.0, -1.0).unwrap();
            assert!(rel(a, b) < 1e-8, "mu={mu}: {a} vs {b}");
        }
    }

    /// Talenti profile `A (1 + (t/s)^2)^{-(N-2)/2}`: amplitude and width read
    /// off the sampled profile.
    fn talenti_shape(n: usize) -> (f64, f64) {
        let z = RadialProfile::z(HardyParameter::new(n, 0.0).unwrap(), 1.0).unwrap();
        let a = z.value(1e-9);
        let q = z.value(1.0) / a;
        let s2 = 1.0 / (q.powf(-2.0 / (n as f64 - 2.0)) - 1.0);
        (a, s2.sqrt())
    }

    #[test]
    fn quadratic_regime_matches_the_l2_mass() {
        let n = 6;
        let p = HardyParameter::new(n, 0.0).unwrap();
        let (a, s) = talenti_shape(n);
        let nf = n as f64;
        let mass = a * a * s.powf(nf) * PI.powf(nf / 2.0) * gamma(nf / 2.0 - 2.0) / gamma(nf - 2.0);
        assert!(rel(profile_l2_squared(&p).unwrap(), mass) < 1e-8);
        let rep = fit_interaction_scaling(&p, 1.0, DEFAULT_MU_RANGE, DEFAULT_MU_POINTS).unwrap();
        assert_eq!(rep.regime, Regime::Quadratic);
        assert!(rep.slope_error() < 0.05);
        assert!(rel(rep.prefactor.0, mass) < 1e-2);
        assert!(!rep.flagged);
    }

    #[test]
    fn logarithmic_regime_has_a_constant_log_coefficient() {
        let p = HardyParameter::new(6, 3.0).unwrap();
        assert_eq!(regime_of(&p), Regime::Logarithmic);
        let rep = fit_interaction_scaling(&p, 1.0, DEFAULT_MU_RANGE, DEFAULT_MU_POINTS).unwrap();
        assert!(rep.log_correction);
        assert!(rep.slope_error() < 0.05);
        assert!(rep.log_constant_spread.unwrap() < 0.05);
        assert!((rep.prefactor_ratio() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fractional_regime_slope_and_beta_prefactor() {
        let p = HardyParameter::new(6, 3.5).unwrap();
        let rep = fit_interaction_scaling(&p, 1.0, DEFAULT_MU_RANGE, DEFAULT_MU_POINTS).unwrap();
        assert!((rep.fitted_slope - 2f64.sqrt()).abs() < 0.05);
        assert!((rep.prefactor_ratio() - 1.0).abs() < 0.02);
        let p = HardyParameter::new(5, 2.0).unwrap();
        let rep = fit_interaction_scaling(&p, 2.0, DEFAULT_MU_RANGE, DEFAULT_MU_POINTS).unwrap();
        assert!(rep.slope_error() < 0.05);
        assert!((rep.prefactor_ratio() - 1.0).abs() < 0.02);
    }

    #[test]
    fn interaction_is_homogeneous_in_xi_above_the_threshold() {
        let p = HardyParameter::new(6, 3.5).unwrap();
        let mu = 1e-7;
        let a = interaction_integral(&p, mu, 1.0).unwrap();
        let b = interaction_integral(&p, mu, 2.0).unwrap();
        assert!(rel(b / a, 2f64.powf(-fractional_exponent(&p))) < 1e-2);
    }

    #[test]
    fn spread_profiles_approach_the_hardy_term() {
        // z_mu is dilation-invariant in the Hardy term, so for mu >> |xi| the
        // interaction tends to int z^2/|y|^2
        let n = 6;
        let p = HardyParameter::new(n, 0.0).unwrap();
        let (a, s) = talenti_shape(n);
        let h = 0.5 * (n as f64 - 2.0);
        let hardy =
            a * a * s.powf(n as f64 - 2.0) * unit_sphere_area(n - 1) * 0.5 * gamma(h) * gamma(h) / gamma(2.0 * h);
        let v = interaction_integral(&p, 1e4, 1.0).unwrap();
        assert!(rel(v, hardy) < 1e-6, "{v} vs {hardy}");
    }

    #[test]
    fn beta_agrees_with_the_cylindrical_reduction() {
        for (n, lam) in [(6usize, 3.5), (5, 2.0)] {
            let p = HardyParameter::new(n, lam).unwrap();
            let e = (n as f64 - 2.0) * (1.0 + p.nu());
            // singular points 0 and e_1
            let f = |u0: f64, u1: f64, r: f64| 1.0 / ((u0 * u0 + r * r) * (u1 * u1 + r * r).powf(0.5 * e));
            let want = cylindrical(n, f, 1.0, -40.0);
            let got = beta_constant(&p).unwrap();
            assert!(rel(got, want) < 1e-6, "N={n}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_agrees_with_the_cylindrical_reduction() {
        // N = 4 puts the Minus singularity close to the integrability limit
        for (n, lam) in [(6usize, 3.5), (4, 0.5)] {
            let p = HardyParameter::new(n, lam).unwrap();
            let nf = n as f64;
            let a = (nf + 2.0) / 2.0 + (nf - 2.0) * p.nu() / 2.0;
            for conv in [GammaConvention::Plus, GammaConvention::Minus] {
                // x . (x + e_1) with the shifted point at -e_1 or e_1
                let f = |u0: f64, u1: f64, r: f64| {
                    let (x1, y1) = match conv {
                        GammaConvention::Plus => (u1, u0),
                        GammaConvention::Minus => (u0, u1),
                    };
                    let a2 = x1 * x1 + r * r;
                    let b2 = y1 * y1 + r * r;
                    (a2 + x1) / (a2 * b2).powf(0.5 * a)
                };
                // the N = 4 Minus integrand decays only like t^{0.29} in ln t near e_1
                let lo = if n == 4 { -120.0 } else { -40.0 };
                let want = cylindrical(n, f, 1.0, lo);
                let got = gamma_constant(&p, conv).unwrap();
                assert!(rel(got, want) < 1e-6, "N={n} {conv:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn constants_need_the_fractional_regime() {
        let p = HardyParameter::new(6, 3.0).unwrap();
        assert!(beta_constant(&p).is_err());
        assert!(gamma_constant(&p, GammaConvention::Plus).is_err());
    }

    #[test]
    fn gradient_interaction_selects_one_convention() {
        let p = HardyParameter::new(6, 3.5).unwrap();
        let rep = gamma_disambiguation(&p, 1e-6, 1.0, 0.03).unwrap();
        assert_eq!(rep.matching, Some(GammaConvention::Plus));
        assert!((rep.ratio(GammaConvention::Plus) - 1.0).abs() < 0.03);
        assert!((rep.ratio(GammaConvention::Minus) - 1.0).abs() > 0.03);
        let e = fractional_exponent(&p);
        let far = gradient_interaction(&p, 1e-6, 2.0).unwrap() / 1e-6f64.powf(e);
        assert!(rel(far / rep.measured, 2f64.powf(-e)) < 1e-3);
    }

    #[test]
    fn scaling_fit_validates_the_range() {
        let p = HardyParameter::new(6, 0.0).unwrap();
        assert!(fit_interaction_scaling(&p, 1.0, (1e-3, 1.0), 13).is_err());
        assert!(fit_interaction_scaling(&p, 1.0, (1e-3, 1e-2), 13).is_err());
        assert!(fit_interaction_scaling(&p, 1.0, (1e-5, 1e-3), 3).is_err());
    }
}
