//! Explicit one-pole objects: the exponent `nu`, the radial solutions
//! `w_mu`, their L^{2*}-normalized versions `z_mu`, the level ratio and the
//! power-law behavior at the origin and at infinity.

use crate::error::{invalid, Error, Result};
use crate::quadrature::{unit_sphere_area, Integrator};

/// Dimension and inverse-square mass of a single pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyParameter {
    n: usize,
    lambda: f64,
}

impl HardyParameter {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n < 3 {
            return invalid(format!("dimension must be at least 3, got {n}"));
        }
        if !lambda.is_finite() {
            return invalid("mass must be finite");
        }
        let crit = hardy_constant(n);
        if lambda >= crit {
            return invalid(format!(
                "mass {lambda} must be below the Hardy constant {crit} for N = {n}"
            ));
        }
        Ok(Self { n, lambda })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        nu_lambda(self)
    }

    /// Critical Sobolev exponent `2N/(N-2)`.
    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.n)
    }

    /// `(N(N-2) nu^2)^{(N-2)/4}`, the leading constant of `w_1`.
    pub fn w_constant(&self) -> f64 {
        let n = self.n as f64;
        let nu = self.nu();
        (n * (n - 2.0) * nu * nu).powf((n - 2.0) / 4.0)
    }

    /// `sqrt((N-2)^2 - 4 lambda)`, the decay gap that governs interactions.
    pub fn gap(&self) -> f64 {
        (self.n as f64 - 2.0) * self.nu()
    }
}

/// `((N-2)/2)^2`.
pub fn hardy_constant(n: usize) -> f64 {
    let h = (n as f64 - 2.0) / 2.0;
    h * h
}

pub fn critical_exponent(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 - 2.0)
}

/// `(1 - 4 lambda/(N-2)^2)^{1/2}`.
pub fn nu_lambda(p: &HardyParameter) -> f64 {
    (1.0 - p.lambda / hardy_constant(p.n)).sqrt()
}

/// `S(lambda)/S = (1 - 4 lambda/(N-2)^2)^{(N-1)/N}` for `0 <= lambda`.
pub fn level_ratio(p: &HardyParameter) -> Result<f64> {
    if p.lambda < 0.0 {
        return invalid(format!(
            "level ratio is only available for nonnegative mass, got {}",
            p.lambda
        ));
    }
    let n = p.n as f64;
    Ok((1.0 - p.lambda / hardy_constant(p.n)).powf((n - 1.0) / n))
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln w_1(t) - ln C` for the unit-scale profile.
fn log_shape(p: &HardyParameter, t: f64) -> f64 {
    let nu = p.nu();
    let lt = t.ln();
    -0.5 * (p.n as f64 - 2.0) * ((1.0 - nu) * lt + softplus(2.0 * nu * lt))
}

/// Logarithmic derivative of the unit-scale profile.
fn log_shape_derivative(p: &HardyParameter, t: f64) -> f64 {
    let nu = p.nu();
    let x = 2.0 * nu * t.ln();
    // t^{2nu}/(1+t^{2nu}) computed stably
    let frac = if x > 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    -0.5 * (p.n as f64 - 2.0) * ((1.0 - nu) + 2.0 * nu * frac) / t
}

/// `||w_1||_{2*}^{2*}` by quadrature in `ln t`, with the two power-law tails
/// added in closed form.
pub fn w_norm_power(p: &HardyParameter) -> Result<f64> {
    let n = p.n as f64;
    let nu = p.nu();
    let c = p.w_constant();
    let cp = c.powf(p.critical_exponent());
    let decay = n * nu;
    // integrand in tau = ln t: e^{N nu tau} (1 + e^{2 nu tau})^{-N}, symmetric in tau
    let cut = (1e16f64).ln() / decay;
    let f = |tau: f64| (decay * tau - n * softplus(2.0 * nu * tau)).exp();
    let est = Integrator::with_rel_tol(1e-13).integrate_with_breaks(f, -cut, cut, &[0.0])?;
    let tail = 2.0 * (-decay * cut).exp() / decay;
    let area = unit_sphere_area(p.n - 1);
    Ok(area * cp * (est.value + tail))
}

/// `alpha = C / ||w_1||_{2*}`.
pub fn normalization_alpha(p: &HardyParameter) -> Result<f64> {
    let norm = w_norm_power(p)?.powf(1.0 / p.critical_exponent());
    Ok(p.w_constant() / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Un-normalized `w_mu`.
    W,
    /// L^{2*}-normalized `z_mu`.
    Z,
}

/// A member of the one-pole dilation family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub mu: f64,
    pub kind: ProfileKind,
    pub param: HardyParameter,
    amplitude: f64,
}

impl RadialProfile {
    pub fn w(param: HardyParameter, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(Self {
            mu,
            kind: ProfileKind::W,
            param,
            amplitude: param.w_constant(),
        })
    }

    pub fn z(param: HardyParameter, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(Self {
            mu,
            kind: ProfileKind::Z,
            param,
            amplitude: normalization_alpha(&param)?,
        })
    }

    /// Same profile at another scale, reusing the normalization constant.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(Self { mu, ..*self })
    }

    /// `alpha` for kind Z, `C` for kind W.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Z => Some(self.amplitude),
            ProfileKind::W => None,
        }
    }

    fn scale_exponent(&self) -> f64 {
        -(self.param.n as f64 - 2.0) / 2.0
    }

    /// Value at radius `t`, without argument checks.
    pub fn value(&self, t: f64) -> f64 {
        let x = t / self.mu;
        self.amplitude * self.mu.powf(self.scale_exponent()) * log_shape(&self.param, x).exp()
    }

    /// Radial derivative at `t`.
    pub fn derivative(&self, t: f64) -> f64 {
        let x = t / self.mu;
        self.value(t) * log_shape_derivative(&self.param, x) / self.mu
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return invalid(format!("radius must be positive and finite, got {t}"));
        }
        Ok(self.value(t))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return invalid(format!("dilation scale must be positive, got {mu}"));
    }
    Ok(())
}

pub fn eval_w(profile: &RadialProfile, t: f64) -> Result<f64> {
    profile.eval(t)
}

/// Power-law behavior `kappa0 |x|^{e0}` at 0 and `kappa_inf |x|^{e_inf}` at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticExpansion {
    pub exponent_at_zero: f64,
    pub exponent_at_infinity: f64,
    pub kappa0: f64,
    pub kappa_inf: f64,
}

/// Exponents for mass `lambda`; the constants are those of `z_1`, both equal
/// to `alpha`.
pub fn asymptotics_of(p: &HardyParameter) -> Result<AsymptoticExpansion> {
    let alpha = normalization_alpha(p)?;
    let (e0, einf) = exponents(p);
    Ok(AsymptoticExpansion {
        exponent_at_zero: e0,
        exponent_at_infinity: einf,
        kappa0: alpha,
        kappa_inf: alpha,
    })
}

/// `(-(N-2)(1-nu)/2, -(N-2)(1+nu)/2)`.
pub fn exponents(p: &HardyParameter) -> (f64, f64) {
    let h = (p.n as f64 - 2.0) / 2.0;
    let nu = p.nu();
    (-h * (1.0 - nu), -h * (1.0 + nu))
}

/// Radial Rayleigh quotient
/// `(int |u'|^2 - lambda int u^2/t^2) / ||u||_{2*}^2` of a profile, by
/// quadrature in `ln t` with closed-form tails.
pub fn radial_quotient(profile: &RadialProfile) -> Result<f64> {
    let p = &profile.param;
    let n = p.n as f64;
    let nu = p.nu();
    let mu = profile.mu;
    let area = unit_sphere_area(p.n - 1);
    let pexp = p.critical_exponent();
    // All three integrands decay like e^{-(N-2) nu |tau - ln mu|} in tau = ln t.
    let slowest = (n - 2.0) * nu;
    let cut = (1e16f64).ln() / slowest;
    let (lo, hi) = (mu.ln() - cut, mu.ln() + cut);
    let integ = Integrator::with_rel_tol(1e-13);
    let grad = integ.integrate_with_breaks(
        |tau: f64| {
            let t = tau.exp();
            let d = profile.derivative(t);
            d * d * t.powf(n)
        },
        lo,
        hi,
        &[mu.ln()],
    )?;
    let hardy = integ.integrate_with_breaks(
        |tau: f64| {
            let t = tau.exp();
            let v = profile.value(t);
            v * v * t.powf(n - 2.0)
        },
        lo,
        hi,
        &[mu.ln()],
    )?;
    let lp = integ.integrate_with_breaks(
        |tau: f64| {
            let t = tau.exp();
            profile.value(t).powf(pexp) * t.powf(n)
        },
        lo,
        hi,
        &[mu.ln()],
    )?;
    if !(lp.value > 0.0) {
        return Err(Error::ZeroField);
    }
    let num = area * (grad.value - p.lambda * hardy.value);
    Ok(num / (area * lp.value).powf(2.0 / pexp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta;
    use std::f64::consts::PI;

    fn hp(n: usize, l: f64) -> HardyParameter {
        HardyParameter::new(n, l).unwrap()
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu_lambda(&hp(4, 0.0)), 1.0);
        assert!((nu_lambda(&hp(4, 0.75)) - 0.5).abs() < 1e-15);
        assert!((nu_lambda(&hp(5, -4.0)) - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(HardyParameter::new(2, 0.0).is_err());
        assert!(HardyParameter::new(4, 1.0).is_err());
        assert!(HardyParameter::new(4, f64::NAN).is_err());
        assert!(HardyParameter::new(4, 0.999).is_ok());
    }

    #[test]
    fn w_examples() {
        let p = hp(4, 0.0);
        let w1 = RadialProfile::w(p, 1.0).unwrap();
        assert!((w1.eval(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let w2 = RadialProfile::w(p, 2.0).unwrap();
        assert!((w2.eval(2.0).unwrap() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!(w1.eval(0.0).is_err());
        assert!(w1.eval(-1.0).is_err());
    }

    #[test]
    fn w_matches_direct_formula() {
        let p = hp(5, 1.2);
        let nu = p.nu();
        let w = RadialProfile::w(p, 1.0).unwrap();
        for &t in &[1e-3f64, 0.3, 1.0, 2.5, 40.0] {
            let direct = (5.0 * 3.0 * nu * nu).powf(0.75) / (t.powf(1.0 - nu) * (1.0 + t.powf(2.0 * nu))).powf(1.5);
            assert!((w.value(t) / direct - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_slopes_match_exponents() {
        // The correction to the leading power is O(t^{-2 nu}), so the fitting
        // decade moves outward as nu shrinks.
        for &(n, l, far) in &[
            (4, 0.0, 1e3),
            (3, 0.0, 1e3),
            (5, -4.0, 1e3),
            (4, 0.75, 1e5),
            (6, 3.5, 1e8),
        ] {
            let p = hp(n, l);
            let w = RadialProfile::w(p, 1.0).unwrap();
            let (e0, einf) = exponents(&p);
            let slope = |a: f64, b: f64| (w.value(b).ln() - w.value(a).ln()) / (b.ln() - a.ln());
            assert!((slope(far, 10.0 * far) - einf).abs() < 1e-3, "inf n={n} l={l}");
            assert!((slope(0.1 / far, 1.0 / far) - e0).abs() < 1e-3, "zero n={n} l={l}");
        }
    }

    #[test]
    fn level_ratio_examples() {
        assert_eq!(level_ratio(&hp(4, 0.0)).unwrap(), 1.0);
        assert!((level_ratio(&hp(4, 0.75)).unwrap() - 0.25f64.powf(0.75)).abs() < 1e-15);
        assert!((level_ratio(&hp(5, 9.0 / 8.0)).unwrap() - 0.5f64.powf(0.8)).abs() < 1e-15);
        assert!(level_ratio(&hp(4, -0.1)).is_err());
    }

    #[test]
    fn norm_matches_beta_function() {
        // int_0^inf t^{N nu - 1} (1 + t^{2 nu})^{-N} dt = B(N/2, N/2) / (2 nu)
        for &(n, l) in &[(3, 0.0), (4, 0.0), (4, 0.75), (5, -4.0), (6, 3.5), (6, 3.999)] {
            let p = hp(n, l);
            let nf = n as f64;
            let exact = unit_sphere_area(n - 1) * p.w_constant().powf(p.critical_exponent()) * beta(nf / 2.0, nf / 2.0)
                / (2.0 * p.nu());
            let got = w_norm_power(&p).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-10, "n={n} l={l}");
        }
    }

    #[test]
    fn z_is_normalized_at_every_scale() {
        let p = hp(4, 0.3);
        let alpha = normalization_alpha(&p).unwrap();
        for &mu in &[1.0, 7.0, 0.01] {
            let z = RadialProfile::z(p, mu).unwrap();
            assert_eq!(z.alpha(), Some(alpha));
            let n = 4.0;
            let pe = p.critical_exponent();
            let est = Integrator::with_rel_tol(1e-12)
                .integrate_with_breaks(
                    |tau: f64| {
                        let t = tau.exp();
                        z.value(t).powf(pe) * t.powf(n)
                    },
                    mu.ln() - 40.0,
                    mu.ln() + 40.0,
                    &[mu.ln()],
                )
                .unwrap();
            let norm = (unit_sphere_area(3) * est.value).powf(1.0 / pe);
            assert!((norm - 1.0).abs() < 1e-8, "mu={mu}");
        }
    }

    #[test]
    fn alpha_for_talenti_case() {
        // N = 4, lambda = 0: ||w_1||_4^4 = 2 pi^2 * 64 * B(2,2)/2 = 32 pi^2 / 3
        let alpha = normalization_alpha(&hp(4, 0.0)).unwrap();
        let exact = 8f64.sqrt() / (32.0 * PI * PI / 3.0).powf(0.25);
        assert!((alpha - exact).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_exponents() {
        let a = asymptotics_of(&hp(4, 0.0)).unwrap();
        assert_eq!((a.exponent_at_zero, a.exponent_at_infinity), (0.0, -2.0));
        let b = asymptotics_of(&hp(4, 0.75)).unwrap();
        assert!((b.exponent_at_zero + 0.5).abs() < 1e-15);
        assert!((b.exponent_at_infinity + 1.5).abs() < 1e-15);
        assert_eq!(b.kappa0, b.kappa_inf);
    }

    #[test]
    fn constants_match_profile_limits() {
        let p = hp(6, 3.5);
        let z = RadialProfile::z(p, 1.0).unwrap();
        let a = asymptotics_of(&p).unwrap();
        let t = 1e-8;
        assert!((z.value(t) / t.powf(a.exponent_at_zero) / a.kappa0 - 1.0).abs() < 1e-3);
        let t = 1e8;
        assert!((z.value(t) / t.powf(a.exponent_at_infinity) / a.kappa_inf - 1.0).abs() < 1e-3);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let z = RadialProfile::z(hp(5, 0.8), 0.7).unwrap();
        for &t in &[0.01, 0.5, 0.7, 3.0] {
            let h = 1e-6 * t;
            let fd = (z.value(t + h) - z.value(t - h)) / (2.0 * h);
            assert!((z.derivative(t) / fd - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn radial_quotient_tracks_level_ratio() {
        let s0 = radial_quotient(&RadialProfile::w(hp(4, 0.0), 1.0).unwrap()).unwrap();
        for &l in &[0.15, 0.45, 0.75] {
            let p = hp(4, l);
            let s = radial_quotient(&RadialProfile::z(p, 1.0).unwrap()).unwrap();
            assert!((s / s0 - level_ratio(&p).unwrap()).abs() < 1e-8, "l={l}");
        }
    }

    #[test]
    fn radial_quotient_is_scale_free() {
        let p = hp(6, 2.0);
        let base = radial_quotient(&RadialProfile::z(p, 1.0).unwrap()).unwrap();
        for &mu in &[0.1, 10.0] {
            let q = radial_quotient(&RadialProfile::z(p, mu).unwrap()).unwrap();
            assert!((q / base - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sobolev_constant_for_n4() {
        // S = N(N-2)/4 |S^N|^{2/N} = 2 * (8 pi^2 / 3)^{1/2}
        let s = radial_quotient(&RadialProfile::w(hp(4, 0.0), 1.0).unwrap()).unwrap();
        let exact = 2.0 * (8.0 * PI * PI / 3.0).sqrt();
        assert!((s / exact - 1.0).abs() < 1e-9);
    }
}
