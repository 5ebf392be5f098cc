//! Grid fields, CSV import/export and sampled closed-form profiles.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::closed_forms::RadialProfile;
use crate::error::{invalid, Error, Result};
use crate::geometry::PoleConfiguration;

use super::grid::{GridMode, ReducedGrid};
use super::problem::{DiscreteProblem, EnergyBreakdown};

/// Node values of a symmetric trial function, zero on the Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    cache: Option<EnergyBreakdown>,
}

impl Field {
    pub fn zeros(grid: &ReducedGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            cache: None,
        }
    }

    /// Wraps node values; boundary entries are reset to zero.
    pub fn from_values(grid: &ReducedGrid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("field values must be finite");
        }
        for (idx, v) in values.iter_mut().enumerate() {
            let (i, _, l) = grid.unindex(idx);
            if grid.is_boundary(i, l) {
                *v = 0.0;
            }
        }
        Ok(Self { values, cache: None })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access; invalidates cached energies.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.cache = None;
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Energy breakdown, computed once per mutation.
    pub fn breakdown(&mut self, problem: &DiscreteProblem) -> Result<&EnergyBreakdown> {
        if self.cache.is_none() {
            self.cache = Some(problem.breakdown(&self.values)?);
        }
        Ok(self.cache.as_ref().unwrap())
    }

    /// CSV with header `rho,theta,s,value` (no `theta` column for circular
    /// grids), rows ordered by `rho`, then `theta`, then `s`.
    pub fn write_csv<W: Write>(&self, grid: &ReducedGrid, mut w: W) -> std::io::Result<()> {
        let circ = grid.mode == GridMode::Circular;
        if circ {
            writeln!(w, "rho,s,value")?;
        } else {
            writeln!(w, "rho,theta,s,value")?;
        }
        for (idx, v) in self.values.iter().enumerate() {
            let (i, j, l) = grid.unindex(idx);
            if circ {
                writeln!(w, "{:.17e},{:.17e},{:.17e}", grid.rho[i], grid.s[l], v)?;
            } else {
                writeln!(
                    w,
                    "{:.17e},{:.17e},{:.17e},{:.17e}",
                    grid.rho[i], grid.theta[j], grid.s[l], v
                )?;
            }
        }
        Ok(())
    }

    /// Reads a CSV written by [`Field::write_csv`] for the same grid.
    pub fn read_csv<R: BufRead>(grid: &ReducedGrid, r: R) -> Result<Self> {
        let circ = grid.mode == GridMode::Circular;
        let cols = if circ { 3 } else { 4 };
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidParameter(format!("read error: {e}")))?;
            if lineno == 0 {
                let want = if circ { "rho,s,value" } else { "rho,theta,s,value" };
                if line.trim() != want {
                    return invalid(format!("unexpected header '{line}', expected '{want}'"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != cols {
                return invalid(format!("line {}: expected {cols} columns", lineno + 1));
            }
            let nums = parts
                .iter()
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
            let idx = values.len();
            if idx >= grid.len() {
                return invalid("more rows than grid nodes");
            }
            let (i, j, l) = grid.unindex(idx);
            let coords = if circ {
                vec![grid.rho[i], grid.s[l]]
            } else {
                vec![grid.rho[i], grid.theta[j], grid.s[l]]
            };
            for (a, b) in coords.iter().zip(&nums) {
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return invalid(format!("line {}: coordinates do not match the grid", lineno + 1));
                }
            }
            values.push(nums[cols - 1]);
        }
        Self::from_values(grid, values)
    }
}

/// Where a sampled profile is centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Center {
    Origin,
    /// The vertices of one ring (the tube around the circle on circular grids).
    Ring(usize),
}

/// Samples `profile` centered at the origin, or summed over the vertices of
/// one ring so the result is invariant under the sector rotation.
pub fn sample_closed_form(
    grid: &ReducedGrid,
    cfg: &PoleConfiguration,
    profile: &RadialProfile,
    center: Center,
) -> Result<Field> {
    let mut values = vec![0.0; grid.len()];
    match center {
        Center::Origin => {
            for (idx, v) in values.iter_mut().enumerate() {
                let (i, _, l) = grid.unindex(idx);
                *v = profile.value((grid.rho[i].powi(2) + grid.s[l].powi(2)).sqrt());
            }
        }
        Center::Ring(ell) => {
            let ring = cfg
                .polygons()
                .get(ell)
                .ok_or_else(|| Error::IndexOutOfRange(format!("ring {ell}")))?;
            let r = ring.radius;
            match grid.mode {
                GridMode::Sector { k } => {
                    for (idx, v) in values.iter_mut().enumerate() {
                        let (i, j, l) = grid.unindex(idx);
                        let (rho, th, s) = (grid.rho[i], grid.theta[j], grid.s[l]);
                        let mut sum = 0.0;
                        for q in 0..k {
                            let a = ring.phase + 2.0 * PI * q as f64 / k as f64;
                            let h = (0.5 * (th - a)).sin();
                            let d2 = (rho - r) * (rho - r) + 4.0 * rho * r * h * h + s * s;
                            if d2 > 0.0 {
                                sum += profile.value(d2.sqrt());
                            }
                        }
                        *v = sum;
                    }
                }
                GridMode::Circular => {
                    for (idx, v) in values.iter_mut().enumerate() {
                        let (i, _, l) = grid.unindex(idx);
                        let d = ((grid.rho[i] - r).powi(2) + grid.s[l].powi(2)).sqrt();
                        if d > 0.0 {
                            *v = profile.value(d);
                        }
                    }
                }
            }
        }
    }
    Field::from_values(grid, values)
}
