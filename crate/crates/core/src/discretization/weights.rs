//! Dual-cell integrals of the singular potentials against the reduced
//! measure, with recursive refinement toward singular points.

use rayon::prelude::*;

use crate::geometry::PoleConfiguration;
use crate::potentials::{circle_potential_unchecked, Potential, PotentialTerm, ReducedPoint};
use crate::quadrature::gauss_legendre;

use super::grid::{GridMode, ReducedGrid};

const DEPTH_2D: usize = 16;
const DEPTH_3D: usize = 9;

/// `int_cell V_term dmu` for every node and every potential term (masses
/// included). Boundary nodes get zero weight.
#[derive(Debug, Clone)]
pub struct PotentialWeights {
    pub terms: Vec<PotentialTerm>,
    pub weights: Vec<Vec<f64>>,
}

impl PotentialWeights {
    pub fn build(grid: &ReducedGrid, cfg: &PoleConfiguration) -> Self {
        let pot = Potential::new(cfg);
        let terms = pot.terms();
        let mut weights = Vec::with_capacity(terms.len());
        for &term in &terms {
            let w = match term {
                PotentialTerm::Central => {
                    let lam = cfg.lambda0();
                    if lam == 0.0 {
                        vec![0.0; grid.len()]
                    } else {
                        let base = meridian_weights(grid, &[(0.0, 0.0)], |rho, s| lam / (rho * rho + s * s));
                        spread(grid, &base)
                    }
                }
                PotentialTerm::CircleAverage(ell) => {
                    let p = cfg.polygons()[ell];
                    if p.mass == 0.0 {
                        vec![0.0; grid.len()]
                    } else {
                        let base = meridian_weights(grid, &[(p.radius, 0.0)], |rho, s| {
                            p.mass * circle_potential_unchecked(p.radius, rho, s)
                        });
                        spread(grid, &base)
                    }
                }
                PotentialTerm::PolygonPoles(ell) => polygon_weights(grid, cfg, &pot, ell),
            };
            weights.push(w);
        }
        Self { terms, weights }
    }

    /// Sum over all terms.
    pub fn total(&self) -> Vec<f64> {
        let n = self.weights.first().map_or(0, |w| w.len());
        let mut t = vec![0.0; n];
        for w in &self.weights {
            for (a, b) in t.iter_mut().zip(w) {
                *a += b;
            }
        }
        t
    }
}

/// Copies per-`(i, l)` weights to every `theta` node.
fn spread(grid: &ReducedGrid, base: &[f64]) -> Vec<f64> {
    let (nr, nt, ns) = (grid.n_rho(), grid.n_theta(), grid.n_s());
    let mut out = vec![0.0; grid.len()];
    for i in 0..nr {
        for j in 0..nt {
            for l in 0..ns {
                out[grid.index(i, j, l)] = base[i * ns + l];
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Cell<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
}

impl<const D: usize> Cell<D> {
    fn split(&self) -> Vec<Cell<D>> {
        let mut out = Vec::with_capacity(1 << D);
        for mask in 0..(1usize << D) {
            let mut c = *self;
            for d in 0..D {
                let mid = 0.5 * (self.lo[d] + self.hi[d]);
                if mask & (1 << d) == 0 {
                    c.hi[d] = mid;
                } else {
                    c.lo[d] = mid;
                }
            }
            out.push(c);
        }
        out
    }
}

fn tensor_gauss<const D: usize, F: Fn([f64; D]) -> f64>(f: &F, cell: &Cell<D>, nodes: &[f64], wts: &[f64]) -> f64 {
    let m = nodes.len();
    let total = m.pow(D as u32);
    let mut sum = 0.0;
    let mut vol = 1.0;
    for d in 0..D {
        vol *= 0.5 * (cell.hi[d] - cell.lo[d]);
    }
    for flat in 0..total {
        let mut x = [0.0; D];
        let mut w = 1.0;
        let mut rem = flat;
        for d in 0..D {
            let q = rem % m;
            rem /= m;
            let c = 0.5 * (cell.lo[d] + cell.hi[d]);
            let h = 0.5 * (cell.hi[d] - cell.lo[d]);
            x[d] = c + h * nodes[q];
            w *= wts[q];
        }
        let v = f(x);
        if v.is_finite() {
            sum += w * v;
        }
    }
    sum * vol
}

fn integrate_cell<const D: usize, F, N>(
    f: &F,
    near: &N,
    cell: Cell<D>,
    rule: &(Vec<f64>, Vec<f64>),
    depth: usize,
) -> f64
where
    F: Fn([f64; D]) -> f64,
    N: Fn(&Cell<D>) -> bool,
{
    if depth > 0 && near(&cell) {
        cell.split()
            .into_iter()
            .map(|c| integrate_cell(f, near, c, rule, depth - 1))
            .sum()
    } else {
        tensor_gauss(f, &cell, &rule.0, &rule.1)
    }
}

/// Per-`(i, l)` integrals `factor int V(rho, s) rho s^{N-3} d rho ds` over
/// the meridian dual cells, refined toward the given singular points.
fn meridian_weights<V>(grid: &ReducedGrid, singular: &[(f64, f64)], v: V) -> Vec<f64>
where
    V: Fn(f64, f64) -> f64 + Sync,
{
    let (nr, ns) = (grid.n_rho(), grid.n_s());
    let expo = grid.dimension as i32 - 3;
    let rule = gauss_legendre(3);
    let f = |x: [f64; 2]| v(x[0], x[1]) * x[0] * x[1].powi(expo);
    let near = |c: &Cell<2>| {
        let diam = ((c.hi[0] - c.lo[0]).powi(2) + (c.hi[1] - c.lo[1]).powi(2)).sqrt();
        singular.iter().any(|&(pr, ps)| {
            let dr = pr.clamp(c.lo[0], c.hi[0]) - pr;
            let ds = ps.clamp(c.lo[1], c.hi[1]) - ps;
            (dr * dr + ds * ds).sqrt() < diam
        })
    };
    let factor = grid.factor;
    (0..nr * ns)
        .into_par_iter()
        .map(|idx| {
            let (i, l) = (idx / ns, idx % ns);
            if grid.is_boundary(i, l) {
                return 0.0;
            }
            let cell = Cell {
                lo: [grid.rho_bounds[i], grid.s_bounds[l]],
                hi: [grid.rho_bounds[i + 1], grid.s_bounds[l + 1]],
            };
            factor * integrate_cell(&f, &near, cell, &rule, DEPTH_2D)
        })
        .collect()
}

/// Integrals of one polygon ring's pole sum over the 3D dual cells.
fn polygon_weights(grid: &ReducedGrid, cfg: &PoleConfiguration, pot: &Potential, ell: usize) -> Vec<f64> {
    let ring = cfg.polygons()[ell];
    if ring.mass == 0.0 {
        return vec![0.0; grid.len()];
    }
    let k = match grid.mode {
        GridMode::Sector { k } => k,
        GridMode::Circular => unreachable!("polygon terms need a sector grid"),
    };
    let period = grid.period();
    let base = ring.phase.rem_euclid(period);
    let images: Vec<f64> = (-1..=1).map(|m| base + m as f64 * period).collect();
    let r = ring.radius;
    let expo = grid.dimension as i32 - 3;
    let rule = gauss_legendre(2);
    let f = |x: [f64; 3]| {
        let p = ReducedPoint::new(x[0], x[1], x[2]);
        pot.ring(ell, &p).unwrap_or(0.0) * x[0] * x[2].powi(expo)
    };
    let near = |c: &Cell<3>| {
        let diam =
            ((c.hi[0] - c.lo[0]).powi(2) + (c.hi[0] * (c.hi[1] - c.lo[1])).powi(2) + (c.hi[2] - c.lo[2]).powi(2))
                .sqrt();
        images.iter().any(|&th| {
            let rc = r.clamp(c.lo[0], c.hi[0]);
            let tc = th.clamp(c.lo[1], c.hi[1]);
            let sc = c.lo[2].max(0.0);
            let h = (0.5 * (tc - th)).sin();
            let d2 = (rc - r) * (rc - r) + 4.0 * rc * r * h * h + sc * sc;
            d2.sqrt() < diam
        })
    };
    let factor = k as f64 * grid.omega;
    let half = 0.5 * grid.dtheta;
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j, l) = grid.unindex(idx);
            if grid.is_boundary(i, l) {
                return 0.0;
            }
            let th = grid.theta[j];
            let cell = Cell {
                lo: [grid.rho_bounds[i], th - half, grid.s_bounds[l]],
                hi: [grid.rho_bounds[i + 1], th + half, grid.s_bounds[l + 1]],
            };
            factor * integrate_cell(&f, &near, cell, &rule, DEPTH_3D)
        })
        .collect()
}
