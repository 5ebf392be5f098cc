//! Discrete quadratic forms, `L^{2*}` norm and Rayleigh quotient on a grid.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Mode, PoleConfiguration};
use crate::potentials::PotentialTerm;
use crate::quadrature::compensated_sum;

use super::grid::{GridMode, ReducedGrid};
use super::weights::PotentialWeights;

/// Energy split of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    /// `int |grad u|^2`.
    pub dirichlet: f64,
    /// `int lambda0 u^2/|x|^2`.
    pub central: f64,
    /// One entry per ring: `int V_l u^2`, mass included.
    pub potential: Vec<f64>,
    /// `(int |u|^{2*})^{2/2*}`.
    pub lp_norm: f64,
    /// `(dirichlet - central - sum potential) / lp_norm`.
    pub quotient: f64,
}

/// A grid together with the potential of one configuration.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub grid: ReducedGrid,
    pub cfg: PoleConfiguration,
    pub weights: PotentialWeights,
    vtotal: Vec<f64>,
    mass: Vec<f64>,
    exponent: f64,
}

impl DiscreteProblem {
    pub fn new(grid: ReducedGrid, cfg: PoleConfiguration) -> Result<Self> {
        if grid.dimension != cfg.dimension() {
            return invalid("grid and configuration dimensions differ");
        }
        match (grid.mode, cfg.mode()) {
            (GridMode::Sector { k }, Mode::Polygonal { k: kc }) if k != kc => {
                return invalid(format!("grid built for k = {k}, configuration has k = {kc}"));
            }
            (GridMode::Circular, Mode::Polygonal { .. }) if !cfg.polygons().is_empty() => {
                return invalid("polygon poles need a sector grid");
            }
            _ => {}
        }
        let weights = PotentialWeights::build(&grid, &cfg);
        let vtotal = weights.total();
        let mut mass = vec![0.0; grid.len()];
        for (idx, m) in mass.iter_mut().enumerate() {
            let (i, _, l) = grid.unindex(idx);
            if !grid.is_boundary(i, l) {
                *m = grid.mass(i, l);
            }
        }
        let exponent = crate::closed_forms::critical_exponent(grid.dimension);
        Ok(Self {
            grid,
            cfg,
            weights,
            vtotal,
            mass,
            exponent,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Critical exponent `2* = 2N/(N-2)`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Lumped node masses (zero on the Dirichlet boundary).
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Summed potential weights per node.
    pub fn potential_weights(&self) -> &[f64] {
        &self.vtotal
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return invalid(format!("field has {} values, grid has {} nodes", u.len(), self.len()));
        }
        Ok(())
    }

    fn row_len(&self) -> usize {
        self.grid.n_theta() * self.grid.n_s()
    }

    /// `out = K u`, the Dirichlet stiffness; boundary rows are zero.
    pub fn apply_stiffness(&self, u: &[f64], out: &mut [f64]) {
        let g = &self.grid;
        let (nr, nt, ns) = (g.n_rho(), g.n_theta(), g.n_s());
        let f = g.factor;
        let tc = g.factor / (g.dtheta * g.dtheta);
        out.par_chunks_mut(self.row_len()).enumerate().for_each(|(i, row)| {
            for j in 0..nt {
                for l in 0..ns {
                    let o = j * ns + l;
                    if g.is_boundary(i, l) {
                        row[o] = 0.0;
                        continue;
                    }
                    let idx = g.index(i, j, l);
                    let ui = u[idx];
                    let mut acc = 0.0;
                    let sd = g.s_dual[l];
                    if i > 0 {
                        acc += f * g.rho_edge[i - 1] * sd * (ui - u[g.index(i - 1, j, l)]);
                    }
                    acc += f * g.rho_edge[i] * sd * (ui - u[g.index(i + 1, j, l)]);
                    let rd = g.rho_dual[i];
                    if l > 0 {
                        acc += f * rd * g.s_edge[l - 1] * (ui - u[g.index(i, j, l - 1)]);
                    }
                    acc += f * rd * g.s_edge[l] * (ui - u[g.index(i, j, l + 1)]);
                    if nt > 1 {
                        let w = tc * sd * g.rho_inv[i];
                        let jp = (j + 1) % nt;
                        let jm = (j + nt - 1) % nt;
                        acc += w * (2.0 * ui - u[g.index(i, jp, l)] - u[g.index(i, jm, l)]);
                    }
                    row[o] = acc;
                }
            }
        });
        debug_assert_eq!(out.len(), nr * nt * ns);
    }

    /// `out = (K - V) u`.
    pub fn apply_operator(&self, u: &[f64], out: &mut [f64]) {
        self.apply_stiffness(u, out);
        out.par_iter_mut()
            .zip(u.par_iter())
            .zip(self.vtotal.par_iter())
            .for_each(|((o, &x), &v)| *o -= v * x);
    }

    /// Deterministic reduction: compensated sums per `rho` row, then over rows.
    pub(crate) fn reduce<F>(&self, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let rl = self.row_len();
        let rows: Vec<f64> = (0..self.grid.n_rho())
            .into_par_iter()
            .map(|i| compensated_sum((i * rl..(i + 1) * rl).map(&f)))
            .collect();
        compensated_sum(rows)
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.reduce(|i| a[i] * b[i])
    }

    /// `int |grad u|^2` as a sum over edges.
    pub fn dirichlet_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        let g = &self.grid;
        let nt = g.n_theta();
        let f = g.factor;
        let tc = g.factor / (g.dtheta * g.dtheta);
        let val = |idx: usize| {
            let (i, j, l) = g.unindex(idx);
            if g.is_boundary(i, l) {
                return 0.0;
            }
            let ui = u[idx];
            // edges toward larger rho, larger s and larger theta; boundary
            // neighbors carry the zero value
            let dr = ui - u[g.index(i + 1, j, l)];
            let ds = ui - u[g.index(i, j, l + 1)];
            let mut e = f * g.rho_edge[i] * g.s_dual[l] * dr * dr + f * g.rho_dual[i] * g.s_edge[l] * ds * ds;
            if nt > 1 {
                let dt = ui - u[g.index(i, (j + 1) % nt, l)];
                e += tc * g.s_dual[l] * g.rho_inv[i] * dt * dt;
            }
            e
        };
        Ok(self.reduce(val))
    }

    /// `int V_term u^2` for each term, in the order of `weights.terms`.
    pub fn potential_energies(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        Ok(self
            .weights
            .weights
            .iter()
            .map(|w| self.reduce(|i| w[i] * u[i] * u[i]))
            .collect())
    }

    /// `int |u|^{2*}`.
    pub fn lp_power(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        let p = self.exponent;
        Ok(self.reduce(|i| self.mass[i] * u[i].abs().powf(p)))
    }

    pub fn breakdown(&self, u: &[f64]) -> Result<EnergyBreakdown> {
        let dirichlet = self.dirichlet_energy(u)?;
        let pots = self.potential_energies(u)?;
        let n = self.lp_power(u)?;
        if !(n > 0.0) {
            return Err(Error::ZeroField);
        }
        let lp_norm = n.powf(2.0 / self.exponent);
        let mut central = 0.0;
        let mut potential = Vec::new();
        for (t, e) in self.weights.terms.iter().zip(&pots) {
            match t {
                PotentialTerm::Central => central = *e,
                _ => potential.push(*e),
            }
        }
        let quotient = (dirichlet - central - potential.iter().sum::<f64>()) / lp_norm;
        Ok(EnergyBreakdown {
            dirichlet,
            central,
            potential,
            lp_norm,
            quotient,
        })
    }

    pub fn rayleigh_quotient(&self, u: &[f64]) -> Result<f64> {
        Ok(self.breakdown(u)?.quotient)
    }

    /// `int u^2/|x|^2`, by the same cell quadrature as the central term.
    pub fn hardy_weights(&self) -> Vec<f64> {
        let unit =
            PoleConfiguration::central(self.cfg.dimension(), 1.0, Mode::Circular).expect("dimension already validated");
        PotentialWeights::build(&self.grid, &unit).weights.swap_remove(0)
    }

    /// Gradient of `R(u) = u.(K - V)u / n(u)^{2/2*}` and the quotient value.
    pub fn quotient_gradient(&self, u: &[f64], au: &[f64], grad: &mut [f64]) -> Result<f64> {
        let a = self.dot(u, au);
        let n = self.lp_power(u)?;
        if !(n > 0.0) {
            return Err(Error::ZeroField);
        }
        let p = self.exponent;
        let scale = 2.0 / n.powf(2.0 / p);
        let ratio = a / n;
        grad.par_iter_mut().enumerate().for_each(|(i, gi)| {
            let x = u[i];
            *gi = scale * (au[i] - ratio * self.mass[i] * x.abs().powf(p - 2.0) * x);
        });
        Ok(a / n.powf(2.0 / p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::MeshSpec;
    use crate::geometry::Polygon;

    fn coarse() -> MeshSpec {
        MeshSpec {
            ratio: 1.25,
            h_origin: 1e-2,
            h_pole: 1e-2,
            h_max: 0.1,
            n_theta: 5,
            truncation: Some(6.0),
        }
    }

    fn bump(g: &ReducedGrid) -> Vec<f64> {
        let mut u = vec![0.0; g.len()];
        for idx in 0..g.len() {
            let (i, j, l) = g.unindex(idx);
            if !g.is_boundary(i, l) {
                let (r, s) = (g.rho[i], g.s[l]);
                u[idx] = (-(r * r + s * s)).exp() * (1.0 + 0.2 * (g.theta[j] * 3.0).cos());
            }
        }
        u
    }

    #[test]
    fn energy_matches_operator() {
        let c = PoleConfiguration::new(4, 0.2, vec![Polygon::new(1.0, 0.05)], Mode::Polygonal { k: 3 }).unwrap();
        let g = ReducedGrid::build(&coarse(), &c).unwrap();
        let pb = DiscreteProblem::new(g, c).unwrap();
        let u = bump(&pb.grid);
        let mut ku = vec![0.0; u.len()];
        pb.apply_stiffness(&u, &mut ku);
        let e = pb.dirichlet_energy(&u).unwrap();
        assert!((pb.dot(&u, &ku) / e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let c = PoleConfiguration::new(5, 0.5, vec![Polygon::new(1.0, -0.3)], Mode::Circular).unwrap();
        let g = ReducedGrid::build(&coarse(), &c).unwrap();
        let pb = DiscreteProblem::new(g, c).unwrap();
        let u = bump(&pb.grid);
        let v: Vec<f64> = u.iter().map(|x| 3.0 * x).collect();
        let (a, b) = (pb.rayleigh_quotient(&u).unwrap(), pb.rayleigh_quotient(&v).unwrap());
        assert!((a / b - 1.0).abs() < 1e-12);
        assert!(matches!(pb.breakdown(&vec![0.0; u.len()]), Err(Error::ZeroField)));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = PoleConfiguration::new(4, 0.3, vec![Polygon::new(1.0, 0.05)], Mode::Polygonal { k: 4 }).unwrap();
        let g = ReducedGrid::build(&coarse(), &c).unwrap();
        let pb = DiscreteProblem::new(g, c).unwrap();
        let u = bump(&pb.grid);
        let mut au = vec![0.0; u.len()];
        pb.apply_operator(&u, &mut au);
        let mut grad = vec![0.0; u.len()];
        pb.quotient_gradient(&u, &au, &mut grad).unwrap();
        let mut d = vec![0.0; u.len()];
        for (idx, x) in d.iter_mut().enumerate() {
            let (i, _, l) = pb.grid.unindex(idx);
            if !pb.grid.is_boundary(i, l) {
                *x = ((idx * 7919) % 13) as f64 / 13.0 - 0.5;
            }
        }
        let h = 1e-6;
        let up: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + h * b).collect();
        let um: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - h * b).collect();
        let fd = (pb.rayleigh_quotient(&up).unwrap() - pb.rayleigh_quotient(&um).unwrap()) / (2.0 * h);
        let an = pb.dot(&grad, &d);
        assert!((fd / an - 1.0).abs() < 1e-5, "{fd} vs {an}");
    }

    #[test]
    fn sector_and_circular_agree_on_theta_independent_fields() {
        let cs = PoleConfiguration::new(4, 0.4, vec![Polygon::new(1.0, 0.0)], Mode::Polygonal { k: 6 }).unwrap();
        let cc = PoleConfiguration::new(4, 0.4, vec![Polygon::new(1.0, 0.0)], Mode::Circular).unwrap();
        let gs = ReducedGrid::build(&coarse(), &cs).unwrap();
        let gc = ReducedGrid::build(&coarse(), &cc).unwrap();
        let ps = DiscreteProblem::new(gs, cs).unwrap();
        let pc = DiscreteProblem::new(gc, cc).unwrap();
        let f = |g: &ReducedGrid| {
            let mut u = vec![0.0; g.len()];
            for idx in 0..g.len() {
                let (i, _, l) = g.unindex(idx);
                if !g.is_boundary(i, l) {
                    u[idx] = 1.0 / (1.0 + g.rho[i].powi(2) + g.s[l].powi(2));
                }
            }
            u
        };
        let (a, b) = (ps.breakdown(&f(&ps.grid)).unwrap(), pc.breakdown(&f(&pc.grid)).unwrap());
        assert!((a.quotient / b.quotient - 1.0).abs() < 1e-10);
        assert!((a.central / b.central - 1.0).abs() < 1e-10);
    }
}
