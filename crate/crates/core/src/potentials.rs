//! Central, polygon and circle-averaged inverse-square potentials in reduced
//! coordinates `(rho, theta, s)`: `rho = |z|` and `theta = arg z` for the
//! first two coordinates, `s = |y|` for the remaining `N - 2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Mode, PoleConfiguration};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub rho: f64,
    pub theta: f64,
    pub s: f64,
}

impl ReducedPoint {
    pub fn new(rho: f64, theta: f64, s: f64) -> Self {
        Self { rho, theta, s }
    }

    pub fn norm_sq(&self) -> f64 {
        self.rho * self.rho + self.s * self.s
    }
}

/// One additive piece of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialTerm {
    Central,
    PolygonPoles(usize),
    CircleAverage(usize),
}

fn singular(what: impl Into<String>, distance: f64) -> Error {
    Error::Singular {
        what: what.into(),
        distance,
    }
}

/// `V^r(y) = ((r^2 + |y|^2)^2 - 4 r^2 |y'|^2)^{-1/2}`, the average of
/// `|x - y|^{-2}` over the circle of radius `r` in the first plane, written
/// as a product of the distances to the nearest and farthest circle points
/// in the meridian half-plane.
pub fn circle_potential(r: f64, rho: f64, s: f64) -> Result<f64> {
    let near = ((r - rho) * (r - rho) + s * s).sqrt();
    if near == 0.0 {
        return Err(singular(format!("circle of radius {r}"), near));
    }
    Ok(circle_potential_unchecked(r, rho, s))
}

pub(crate) fn circle_potential_unchecked(r: f64, rho: f64, s: f64) -> f64 {
    let near = (r - rho) * (r - rho) + s * s;
    let far = (r + rho) * (r + rho) + s * s;
    1.0 / (near.sqrt() * far.sqrt())
}

/// Matched asymptote of `V^r`: `1/(2r ||y| - r|)` within distance `r` of the
/// circle, `1/|y|^2` elsewhere.
pub fn circle_potential_near_field(r: f64, rho: f64, s: f64) -> f64 {
    let dist = ((r - rho) * (r - rho) + s * s).sqrt();
    let norm = (rho * rho + s * s).sqrt();
    if dist < r {
        1.0 / (2.0 * r * (norm - r).abs())
    } else {
        1.0 / (norm * norm)
    }
}

/// Composite trapezoid average of `|x - y|^{-2}` over `n` equispaced circle
/// points.
pub fn circle_average_trapezoid(r: f64, rho: f64, s: f64, n: usize) -> f64 {
    let sum: f64 = (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            let h = (0.5 * t).sin();
            1.0 / ((r - rho) * (r - rho) + 4.0 * r * rho * h * h + s * s)
        })
        .sum();
    sum / n as f64
}

/// Trapezoid average with node doubling from 2048 until successive estimates
/// differ by less than `tol` relative.
pub fn circle_average_converged(r: f64, rho: f64, s: f64, tol: f64) -> Result<f64> {
    let mut n = 2048;
    let mut prev = circle_average_trapezoid(r, rho, s, n);
    while n < 1 << 24 {
        n *= 2;
        let next = circle_average_trapezoid(r, rho, s, n);
        if (next - prev).abs() <= tol * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature {
        estimate: prev,
        error: f64::NAN,
    })
}

/// Precomputed evaluator for the potential of a configuration.
#[derive(Debug, Clone)]
pub struct Potential {
    lambda0: f64,
    mode: Mode,
    rings: Vec<Ring>,
}

#[derive(Debug, Clone)]
struct Ring {
    radius: f64,
    mass: f64,
    /// `(sin, cos)` of half the vertex angles.
    half_angles: Vec<(f64, f64)>,
}

impl Potential {
    pub fn new(cfg: &PoleConfiguration) -> Self {
        let rings = cfg
            .polygons()
            .iter()
            .map(|p| {
                let half_angles = match cfg.mode() {
                    Mode::Polygonal { k } => (0..k)
                        .map(|i| {
                            let a = 0.5 * (p.phase + 2.0 * PI * i as f64 / k as f64);
                            (a.sin(), a.cos())
                        })
                        .collect(),
                    Mode::Circular => Vec::new(),
                };
                Ring {
                    radius: p.radius,
                    mass: p.mass,
                    half_angles,
                }
            })
            .collect();
        Self {
            lambda0: cfg.lambda0(),
            mode: cfg.mode(),
            rings,
        }
    }

    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    /// `lambda0 / |x|^2`.
    pub fn central(&self, p: &ReducedPoint) -> Result<f64> {
        if self.lambda0 == 0.0 {
            return Ok(0.0);
        }
        let r2 = p.norm_sq();
        if r2 == 0.0 {
            return Err(singular("origin", 0.0));
        }
        Ok(self.lambda0 / r2)
    }

    /// Unweighted `sum_i |x - a_i|^{-2}` over the vertices of ring `ell`.
    fn vertex_sum(&self, ell: usize, p: &ReducedPoint) -> Result<f64> {
        let ring = &self.rings[ell];
        let (st, ct) = (0.5 * p.theta).sin_cos();
        let r = ring.radius;
        let base = (p.rho - r) * (p.rho - r) + p.s * p.s;
        let cross = 4.0 * p.rho * r;
        let mut sum = 0.0;
        for &(sa, ca) in &ring.half_angles {
            // sin((theta - angle)/2)
            let h = st * ca - ct * sa;
            let d2 = base + cross * h * h;
            if d2 == 0.0 {
                return Err(singular(format!("pole on ring {ell}"), 0.0));
            }
            sum += 1.0 / d2;
        }
        Ok(sum)
    }

    /// Contribution of ring `ell`: `lambda_l sum_i |x - a_i|^{-2}` or
    /// `Lambda_l V^{r_l}`.
    pub fn ring(&self, ell: usize, p: &ReducedPoint) -> Result<f64> {
        let ring = &self.rings[ell];
        if ring.mass == 0.0 {
            return Ok(0.0);
        }
        match self.mode {
            Mode::Polygonal { .. } => Ok(ring.mass * self.vertex_sum(ell, p)?),
            Mode::Circular => Ok(ring.mass * circle_potential(ring.radius, p.rho, p.s)?),
        }
    }

    pub fn term(&self, term: PotentialTerm, p: &ReducedPoint) -> Result<f64> {
        match term {
            PotentialTerm::Central => self.central(p),
            PotentialTerm::PolygonPoles(ell) | PotentialTerm::CircleAverage(ell) => {
                if ell >= self.rings.len() {
                    return Err(Error::IndexOutOfRange(format!("ring {ell}")));
                }
                self.ring(ell, p)
            }
        }
    }

    /// The terms in evaluation order: central first, then one per ring.
    pub fn terms(&self) -> Vec<PotentialTerm> {
        let mut t = vec![PotentialTerm::Central];
        for ell in 0..self.rings.len() {
            t.push(match self.mode {
                Mode::Polygonal { .. } => PotentialTerm::PolygonPoles(ell),
                Mode::Circular => PotentialTerm::CircleAverage(ell),
            });
        }
        t
    }

    pub fn total(&self, p: &ReducedPoint) -> Result<f64> {
        let mut v = self.central(p)?;
        for ell in 0..self.rings.len() {
            v += self.ring(ell, p)?;
        }
        Ok(v)
    }

    /// Per-pole average `(1/k) sum_i |x - a_i|^{-2}` of ring `ell`, the
    /// Riemann sum of the circle average.
    pub fn ring_average(&self, ell: usize, p: &ReducedPoint) -> Result<f64> {
        let n = self.rings[ell].half_angles.len();
        if n == 0 {
            return circle_potential(self.rings[ell].radius, p.rho, p.s);
        }
        Ok(self.vertex_sum(ell, p)? / n as f64)
    }
}

/// Central plus polygon pole sums at a reduced point.
pub fn polygon_potential(cfg: &PoleConfiguration, p: &ReducedPoint) -> Result<f64> {
    if cfg.k().is_none() {
        return Err(Error::InvalidParameter(
            "polygon potential requires polygonal mode".into(),
        ));
    }
    Potential::new(cfg).total(p)
}

/// The potential of the configuration in its own mode.
pub fn total_potential(cfg: &PoleConfiguration, p: &ReducedPoint) -> Result<f64> {
    Potential::new(cfg).total(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;

    fn poly(n: usize, l0: f64, k: usize, rings: &[(f64, f64, f64)]) -> PoleConfiguration {
        let p = rings.iter().map(|&(r, m, ph)| Polygon::with_phase(r, m, ph)).collect();
        PoleConfiguration::new(n, l0, p, Mode::Polygonal { k }).unwrap()
    }

    #[test]
    fn circle_potential_special_points() {
        assert!((circle_potential(2.0, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-16);
        assert!((circle_potential(2.0, 0.0, 3.0).unwrap() - 1.0 / 13.0).abs() < 1e-16);
        assert!(matches!(circle_potential(1.0, 1.0, 0.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn circle_potential_matches_expanded_form() {
        let (r, rho, s) = (1.3f64, 0.4f64, 0.9f64);
        let y2 = rho * rho + s * s;
        let direct = 1.0 / ((r * r + y2).powi(2) - 4.0 * r * r * rho * rho).sqrt();
        assert!((circle_potential(r, rho, s).unwrap() / direct - 1.0).abs() < 1e-14);
    }

    #[test]
    fn circle_potential_homogeneity() {
        for &(rho, s) in &[(0.3, 0.1), (2.0, 0.0), (0.9, 1.7)] {
            let a = circle_potential(2.0, 2.0 * rho, 2.0 * s).unwrap();
            let b = circle_potential(1.0, rho, s).unwrap();
            assert!((a - b / 4.0).abs() <= 1e-15 * b);
        }
    }

    #[test]
    fn near_and_far_asymptotes() {
        let r = 1.5;
        for &d in &[1e-4, -1e-4] {
            let v = circle_potential(r, r + d, 0.0).unwrap();
            assert!((v / circle_potential_near_field(r, r + d, 0.0) - 1.0).abs() < 1e-2);
        }
        let v = circle_potential(r, 1e3 * r * 0.6, 1e3 * r * 0.8).unwrap();
        let y2 = (1e3 * r) * (1e3 * r);
        assert!((v * y2 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn trapezoid_agrees_with_closed_form() {
        for &(rho, s) in &[(0.0, 0.5), (0.5, 0.2), (1.4, 0.3), (3.0, 0.0)] {
            let q = circle_average_trapezoid(1.0, rho, s, 2048);
            let c = circle_potential(1.0, rho, s).unwrap();
            assert!((q / c - 1.0).abs() < 1e-12);
            let q = circle_average_converged(1.0, rho, s, 1e-12).unwrap();
            assert!((q / c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polygon_examples() {
        let c = poly(4, 0.0, 1, &[(1.5, 0.7, 0.0)]);
        let v = polygon_potential(&c, &ReducedPoint::new(3.0, 0.0, 0.0)).unwrap();
        assert!((v - 0.7 / 2.25).abs() < 1e-15);
        let c = poly(4, 0.0, 6, &[(1.5, 0.7, 0.3)]);
        let v = polygon_potential(&c, &ReducedPoint::new(0.0, 0.4, 2.0)).unwrap();
        assert!((v - 6.0 * 0.7 / (2.25 + 4.0)).abs() < 1e-14);
        let c = poly(4, 1.0, 4, &[]);
        assert!(polygon_potential(&c, &ReducedPoint::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn polygon_matches_law_of_cosines() {
        let k = 5;
        let c = poly(5, 0.3, k, &[(1.0, 0.2, 0.1), (2.5, -0.4, 1.0)]);
        let p = ReducedPoint::new(1.7, 0.9, 0.35);
        let mut want = 0.3 / (p.rho * p.rho + p.s * p.s);
        for &(r, m, ph) in &[(1.0, 0.2, 0.1), (2.5, -0.4, 1.0)] {
            for i in 0..k {
                let a = ph + 2.0 * PI * i as f64 / k as f64;
                want += m / (p.rho * p.rho + r * r - 2.0 * p.rho * r * (p.theta - a).cos() + p.s * p.s);
            }
        }
        assert!((polygon_potential(&c, &p).unwrap() / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn pole_itself_is_singular() {
        let c = poly(4, 0.0, 3, &[(1.0, 0.2, 0.5)]);
        let p = ReducedPoint::new(1.0, 0.5 + 2.0 * PI / 3.0, 0.0);
        // rounding of the angle may leave a tiny positive distance
        match polygon_potential(&c, &p) {
            Err(Error::Singular { .. }) => {}
            Ok(v) => assert!(v > 1e25),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn sector_periodicity() {
        let k = 7;
        let c = poly(5, 0.1, k, &[(1.0, 0.2, 0.3), (2.0, -0.1, 0.0)]);
        let pot = Potential::new(&c);
        let p = ReducedPoint::new(1.2, 0.2, 0.1);
        let q = ReducedPoint::new(1.2, 0.2 + 2.0 * PI / k as f64, 0.1);
        let (a, b) = (pot.total(&p).unwrap(), pot.total(&q).unwrap());
        assert!((a - b).abs() < 1e-13 * a.abs());
    }

    #[test]
    fn circular_total_and_signs() {
        let rings = vec![Polygon::new(1.0, -0.5), Polygon::new(2.0, -0.25)];
        let c = PoleConfiguration::new(4, -0.1, rings, Mode::Circular).unwrap();
        let p = ReducedPoint::new(0.7, 1.0, 0.2);
        let v = total_potential(&c, &p).unwrap();
        let want = -0.1 / p.norm_sq()
            - 0.5 * circle_potential(1.0, 0.7, 0.2).unwrap()
            - 0.25 * circle_potential(2.0, 0.7, 0.2).unwrap();
        assert!((v - want).abs() < 1e-15);
        assert!(v < 0.0);
        let q = ReducedPoint::new(0.7, 2.5, 0.2);
        assert_eq!(total_potential(&c, &q).unwrap(), v);
        let zero = PoleConfiguration::new(4, 0.0, vec![Polygon::new(1.0, 0.0)], Mode::Circular).unwrap();
        assert_eq!(total_potential(&zero, &p).unwrap(), 0.0);
    }

    #[test]
    fn ring_average_converges_to_circle() {
        let p = ReducedPoint::new(0.5, 0.1, 0.3);
        let exact = circle_potential(1.0, 0.5, 0.3).unwrap();
        let mut prev = f64::INFINITY;
        for k in [2usize, 4, 8, 16] {
            let c = poly(4, 0.0, k, &[(1.0, 1.0, 0.0)]);
            let e = (Potential::new(&c).ring_average(0, &p).unwrap() - exact).abs();
            assert!(e < prev / 4.0 || e < 1e-14);
            prev = e;
        }
    }
}
