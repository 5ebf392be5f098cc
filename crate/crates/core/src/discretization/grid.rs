//! Tensor grids in reduced coordinates and their finite-volume weights.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::{Mode, PoleConfiguration};
use crate::quadrature::unit_sphere_area;

use super::mesh::{graded_points, Grading};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// One sector `[0, 2 pi/k)` of the first plane; fields vary in `theta`.
    Sector { k: usize },
    /// Fields independent of `theta`.
    Circular,
}

impl GridMode {
    pub fn of(cfg: &PoleConfiguration) -> Self {
        match cfg.mode() {
            Mode::Polygonal { k } => GridMode::Sector { k },
            Mode::Circular => GridMode::Circular,
        }
    }
}

/// Mesh parameters. Lengths are relative to the configuration scale
/// `L = max r_l` (or 1 without rings), except `truncation`, which is absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    /// Outer radius for both `rho` and `s`; defaults to `40 L`.
    pub truncation: Option<f64>,
    /// Geometric growth ratio of neighboring cells.
    pub ratio: f64,
    /// Smallest spacing next to the origin and the axis, relative to `L`.
    pub h_origin: f64,
    /// Smallest spacing next to each ring radius, relative to `L`.
    pub h_pole: f64,
    /// Largest spacing, relative to the truncation radius.
    pub h_max: f64,
    /// `theta` nodes per sector (Sector mode only).
    pub n_theta: usize,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            truncation: None,
            ratio: 1.08,
            h_origin: 1e-4,
            h_pole: 2e-3,
            h_max: 0.05,
            n_theta: 32,
        }
    }
}

/// Tensor grid `rho x theta x s`. Nodes in `rho` and `s` are positive; the
/// last node of each is the Dirichlet boundary. Node `(i, j, l)` owns the
/// dual cell between midpoints of its neighbors (the first cell reaches down
/// to 0).
#[derive(Debug, Clone)]
pub struct ReducedGrid {
    pub mode: GridMode,
    pub dimension: usize,
    pub spec: MeshSpec,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub s: Vec<f64>,
    pub rho_bounds: Vec<f64>,
    pub s_bounds: Vec<f64>,
    pub dtheta: f64,
    /// `|S^{N-3}|`.
    pub omega: f64,
    /// Angular factor of the measure per `theta` node: `k dtheta omega` or
    /// `2 pi omega`.
    pub factor: f64,
    /// `int rho d rho` over each dual `rho` cell.
    pub rho_dual: Vec<f64>,
    /// `int s^{N-3} ds` over each dual `s` cell.
    pub s_dual: Vec<f64>,
    /// `int rho d rho / h^2` along each `rho` edge.
    pub rho_edge: Vec<f64>,
    /// `int s^{N-3} ds / h^2` along each `s` edge.
    pub s_edge: Vec<f64>,
    /// `int d rho / rho` over each dual `rho` cell (first cell regularized).
    pub rho_inv: Vec<f64>,
}

impl ReducedGrid {
    pub fn build(spec: &MeshSpec, cfg: &PoleConfiguration) -> Result<Self> {
        Self::build_with_mode(spec, cfg, GridMode::of(cfg))
    }

    /// Builds the grid for `cfg`'s geometry in an explicitly chosen mode.
    pub fn build_with_mode(spec: &MeshSpec, cfg: &PoleConfiguration, mode: GridMode) -> Result<Self> {
        let n = cfg.dimension();
        if n < 3 {
            return invalid("grids need N >= 3");
        }
        let scale = if cfg.polygons().is_empty() {
            1.0
        } else {
            cfg.max_radius()
        };
        let trunc = spec.truncation.unwrap_or(40.0 * scale);
        if !(trunc > cfg.max_radius()) {
            return invalid(format!(
                "truncation radius {trunc} must enclose every ring (max radius {})",
                cfg.max_radius()
            ));
        }
        if !(spec.h_origin > 0.0 && spec.h_pole > 0.0 && spec.h_max > 0.0) {
            return invalid("mesh spacings must be positive");
        }
        let h_max = spec.h_max * trunc;
        let mut anchors = vec![(0.0, spec.h_origin * scale)];
        for p in cfg.polygons() {
            anchors.push((p.radius, spec.h_pole * scale));
        }
        let rho_pts = graded_points(
            &Grading {
                anchors,
                ratio: spec.ratio,
                h_max,
            },
            trunc,
        )?;
        let s_h0 = if cfg.polygons().is_empty() {
            spec.h_origin
        } else {
            spec.h_origin.min(spec.h_pole)
        };
        let s_pts = graded_points(
            &Grading {
                anchors: vec![(0.0, s_h0 * scale)],
                ratio: spec.ratio,
                h_max,
            },
            trunc,
        )?;
        let (theta, dtheta, factor_base) = match mode {
            GridMode::Sector { k } => {
                if spec.n_theta < 1 {
                    return invalid("need at least one theta node");
                }
                let dt = 2.0 * PI / (k as f64 * spec.n_theta as f64);
                let th = (0..spec.n_theta).map(|j| j as f64 * dt).collect();
                (th, dt, k as f64 * dt)
            }
            GridMode::Circular => (vec![0.0], 2.0 * PI, 2.0 * PI),
        };
        let rho = rho_pts[1..].to_vec();
        let s = s_pts[1..].to_vec();
        if rho.len() < 8 || s.len() < 8 {
            return invalid(format!(
                "grid too coarse: {} rho and {} s nodes (need at least 8)",
                rho.len(),
                s.len()
            ));
        }
        let omega = unit_sphere_area(n - 3);
        let rho_bounds = dual_bounds(&rho);
        let s_bounds = dual_bounds(&s);
        let nm2 = n as f64 - 2.0;
        let rho_dual = rho_bounds
            .windows(2)
            .map(|w| 0.5 * (w[1] * w[1] - w[0] * w[0]))
            .collect();
        let s_dual = s_bounds
            .windows(2)
            .map(|w| (w[1].powf(nm2) - w[0].powf(nm2)) / nm2)
            .collect();
        let rho_edge = rho
            .windows(2)
            .map(|w| {
                let h = w[1] - w[0];
                0.5 * (w[1] * w[1] - w[0] * w[0]) / (h * h)
            })
            .collect();
        let s_edge = s
            .windows(2)
            .map(|w| {
                let h = w[1] - w[0];
                (w[1].powf(nm2) - w[0].powf(nm2)) / nm2 / (h * h)
            })
            .collect();
        let rho_inv = (0..rho.len())
            .map(|i| {
                if i == 0 {
                    // u_theta vanishes linearly at the axis: int_0^{rho_1} (rho/rho_1)^2 d rho/rho
                    (rho_bounds[1] / rho[0]).ln() + 0.5
                } else {
                    (rho_bounds[i + 1] / rho_bounds[i]).ln()
                }
            })
            .collect();
        Ok(Self {
            mode,
            dimension: n,
            spec: MeshSpec {
                truncation: Some(trunc),
                ..*spec
            },
            rho,
            theta,
            s,
            rho_bounds,
            s_bounds,
            dtheta,
            omega,
            factor: factor_base * omega,
            rho_dual,
            s_dual,
            rho_edge,
            s_edge,
            rho_inv,
        })
    }

    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_s(&self) -> usize {
        self.s.len()
    }

    pub fn len(&self) -> usize {
        self.n_rho() * self.n_theta() * self.n_s()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn truncation(&self) -> f64 {
        *self.rho.last().unwrap()
    }

    /// Sector size `2 pi/k` (or `2 pi`).
    pub fn period(&self) -> f64 {
        match self.mode {
            GridMode::Sector { k } => 2.0 * PI / k as f64,
            GridMode::Circular => 2.0 * PI,
        }
    }

    /// Number of sector copies covering the plane.
    pub fn copies(&self) -> f64 {
        match self.mode {
            GridMode::Sector { k } => k as f64,
            GridMode::Circular => 1.0,
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n_theta() + j) * self.n_s() + l
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let ns = self.n_s();
        let nt = self.n_theta();
        (idx / (nt * ns), (idx / ns) % nt, idx % ns)
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, l: usize) -> bool {
        i + 1 == self.n_rho() || l + 1 == self.n_s()
    }

    /// Measure of node `(i, l)`'s dual cell (any `theta`).
    #[inline]
    pub fn mass(&self, i: usize, l: usize) -> f64 {
        self.factor * self.rho_dual[i] * self.s_dual[l]
    }

    /// Measure of the truncated region `{|z| < R, |y| < R}` in `R^N`.
    pub fn truncated_volume(&self) -> f64 {
        let r = self.truncation();
        let nm2 = self.dimension as f64 - 2.0;
        PI * r * r * self.omega * r.powf(nm2) / nm2
    }

    /// Sum of all dual-cell measures.
    pub fn total_mass(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.n_rho() {
            for l in 0..self.n_s() {
                sum += self.mass(i, l);
            }
        }
        sum * self.n_theta() as f64
    }
}

fn dual_bounds(nodes: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(nodes.len() + 1);
    b.push(0.0);
    for w in nodes.windows(2) {
        b.push(0.5 * (w[0] + w[1]));
    }
    b.push(*nodes.last().unwrap());
    b
}
