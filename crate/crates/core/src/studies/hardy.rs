//! Optimality of the Hardy constant for circle-averaged potentials, seen on
//! the circular reduced grid along a family of spreading test functions.

use std::f64::consts::PI;

use crate::discretization::{DiscreteProblem, Field, MeshSpec, ReducedGrid};
use crate::error::{invalid, Result};
use crate::geometry::{Mode, PoleConfiguration, Polygon};

use super::ConvergenceTable;

/// `u(x) = (|x|/c)^{-(N-2)/2} cos(pi ln(|x|/c) / (2L))` for
/// `|ln(|x|/c)| < L`, zero elsewhere: supported in an annulus away from the
/// origin, with Hardy quotient `((N-2)/2)^2 + (pi/(2L))^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyTestFunction {
    pub dimension: usize,
    pub center: f64,
    pub half_width: f64,
}

impl HardyTestFunction {
    pub fn value(&self, t: f64) -> f64 {
        let s = (t / self.center).ln();
        if !(s.abs() < self.half_width) {
            return 0.0;
        }
        (t / self.center).powf(-(self.dimension as f64 - 2.0) / 2.0) * (PI * s / (2.0 * self.half_width)).cos()
    }

    /// `int |grad u|^2 / int |x|^{-2} u^2`.
    pub fn hardy_quotient(&self) -> f64 {
        let a = (self.dimension as f64 - 2.0) / 2.0;
        a * a + (PI / (2.0 * self.half_width)).powi(2)
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.center * (-self.half_width).exp(),
            self.center * self.half_width.exp(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyStudyOptions {
    /// Half width `L` of the test function's support in `ln |x|`.
    pub half_width: f64,
    /// Mesh growth ratio.
    pub ratio: f64,
    /// Smallest spacing at the ring, relative to its radius.
    pub h_pole: f64,
}

impl Default for HardyStudyOptions {
    fn default() -> Self {
        Self {
            half_width: 16.0,
            ratio: 1.08,
            h_pole: 1e-3,
        }
    }
}

/// `int |grad u_l|^2 / int V^r u_l^2` on the circular grid for
/// `u_l(x) = u(l x)`, one row per shrink factor `l` (strictly decreasing).
/// The test function is centered at the ring radius `r`.
pub fn hardy_optimality_study(n: usize, r: f64, shrink: &[f64], opts: &HardyStudyOptions) -> Result<ConvergenceTable> {
    if n < 3 {
        return invalid(format!("need N >= 3, got {n}"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("ring radius must be positive, got {r}"));
    }
    if shrink.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
        return invalid("shrink factors must lie in (0, 1]");
    }
    let u = HardyTestFunction {
        dimension: n,
        center: r,
        half_width: opts.half_width,
    };
    let cfg = PoleConfiguration::new(n, 0.0, vec![Polygon::new(r, 1.0)], Mode::Circular)?;
    let mut values = Vec::with_capacity(shrink.len());
    for &l in shrink {
        let (_, outer) = u.support();
        let spec = MeshSpec {
            truncation: Some(2.0 * outer / l),
            ratio: opts.ratio,
            // resolve the inner edge of the support of u(l x)
            h_origin: (1e-2 * (-opts.half_width).exp() / l).min(1e-3),
            h_pole: opts.h_pole,
            h_max: 1.0,
            n_theta: 1,
        };
        let grid = ReducedGrid::build(&spec, &cfg)?;
        let values_u: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let (i, _, k) = grid.unindex(idx);
                u.value(l * grid.rho[i].hypot(grid.s[k]))
            })
            .collect();
        let field = Field::from_values(&grid, values_u)?;
        let pb = DiscreteProblem::new(grid, cfg.clone())?;
        let num = pb.dirichlet_energy(field.values())?;
        let den: f64 = pb.potential_energies(field.values())?.iter().sum();
        values.push(num / den);
    }
    let parameters = shrink.iter().map(|l| 1.0 / l).collect();
    let a = (n as f64 - 2.0) / 2.0;
    ConvergenceTable::new("1/shrink", parameters, values, Some(a * a))
}
