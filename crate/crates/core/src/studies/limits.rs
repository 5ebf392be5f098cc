//! The `k -> infinity` limit: sector-class levels against the circular
//! level, and the Riemann-sum error of the polygon potentials.

use rayon::prelude::*;

use crate::closed_forms::{level_ratio, HardyParameter};
use crate::discretization::MeshSpec;
use crate::error::{invalid, Result};
use crate::geometry::PoleConfiguration;
use crate::minimizer::{estimate_level_family, minimize_quotient, Init, MinimizeOptions, Symmetry};
use crate::potentials::{Potential, ReducedPoint};

use super::ConvergenceTable;

#[derive(Debug, Clone, PartialEq)]
pub struct KLimitReport {
    /// Sector levels by `k`.
    pub table: ConvergenceTable,
    pub circular_level: f64,
    /// `level_ratio(lambda0)` times the zero-potential circular level, for
    /// configurations without ring masses.
    pub lower_proxy: Option<f64>,
    /// Relative slack of the ordering checks.
    pub tolerance: f64,
    /// Whether each row satisfies `lower - eps <= S_k <= S_circ + eps`.
    pub sandwich: Vec<bool>,
    /// Whether each inner minimization (and the circular one, last) met the
    /// solver tolerance.
    pub converged: Vec<bool>,
    /// Relative Euler-Lagrange residuals, in the same order.
    pub residuals: Vec<f64>,
    /// Whether `|S_k - S_circ|` is non-increasing along the table.
    pub monotone_gap: bool,
}

/// Sector(`k`) levels of `cfg` with the total ring masses held fixed, next to
/// the circular level on the same meridian mesh.
pub fn k_limit_study(
    spec: &MeshSpec,
    cfg: &PoleConfiguration,
    k_list: &[usize],
    tolerance: f64,
    opts: &MinimizeOptions,
) -> Result<KLimitReport> {
    if k_list.is_empty() || k_list.windows(2).any(|w| w[1] <= w[0]) || k_list[0] == 0 {
        return invalid("k list must be positive and strictly increasing");
    }
    let circ_cfg = cfg.to_circular();
    let circ_spec = MeshSpec { n_theta: 1, ..*spec };
    let circ = minimize_quotient(&circ_spec, &circ_cfg, Init::Multistart, opts)?;
    let rows = k_list
        .par_iter()
        .map(|&k| {
            let ck = circ_cfg.with_k(k)?;
            minimize_quotient(spec, &ck, Init::Multistart, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let central_only = circ_cfg.total_masses().iter().all(|&m| m == 0.0);
    let lower_proxy = if central_only {
        let s0 = estimate_level_family(&circ_spec, &circ_cfg, 0.0, Symmetry::Circular, opts)?.level;
        Some(level_ratio(&HardyParameter::new(cfg.dimension(), cfg.lambda0())?)? * s0)
    } else {
        None
    };
    let eps = tolerance * circ.level;
    let levels: Vec<f64> = rows.iter().map(|r| r.level).collect();
    let sandwich = levels
        .iter()
        .map(|&s| s <= circ.level + eps && lower_proxy.is_none_or(|lo| s >= lo - eps))
        .collect();
    let mut converged: Vec<bool> = rows.iter().map(|r| r.converged).collect();
    converged.push(circ.converged);
    let mut residuals: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    residuals.push(circ.residual);
    let gaps: Vec<f64> = levels.iter().map(|s| (s - circ.level).abs()).collect();
    let monotone_gap = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12 * circ.level);
    let table = ConvergenceTable::new("k", k_list.iter().map(|&k| k as f64).collect(), levels, None)?;
    Ok(KLimitReport {
        table,
        circular_level: circ.level,
        lower_proxy,
        tolerance,
        sandwich,
        converged,
        residuals,
        monotone_gap,
    })
}

/// `|sum_l (Lambda_l/k) sum_i |y - a_i|^{-2} - sum_l Lambda_l V^{r_l}(y)|`
/// at a fixed point for each `k`, with the order of decay in `1/k`.
pub fn riemann_table(cfg: &PoleConfiguration, point: &ReducedPoint, k_list: &[usize]) -> Result<ConvergenceTable> {
    let circ = Potential::new(&cfg.to_circular());
    let mut exact = 0.0;
    for ell in 0..circ.ring_count() {
        exact += circ.ring(ell, point)?;
    }
    let errors = k_list
        .iter()
        .map(|&k| {
            let pk = Potential::new(&cfg.to_circular().with_k(k)?);
            let mut v = 0.0;
            for ell in 0..pk.ring_count() {
                v += pk.ring(ell, point)?;
            }
            Ok(exact + (v - exact).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    ConvergenceTable::new("k", k_list.iter().map(|&k| k as f64).collect(), errors, Some(exact))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::{Mode, Polygon};

    #[test]
    fn riemann_error_decays_at_least_quadratically() {
        let cfg = PoleConfiguration::new(
            4,
            0.2,
            vec![Polygon::new(1.0, 0.5), Polygon::new(2.0, -0.8)],
            Mode::Circular,
        )
        .unwrap();
        let p = ReducedPoint::new(0.5, 0.3, 0.3);
        let tab = riemann_table(&cfg, &p, &[2, 4, 8, 16, 32]).unwrap();
        assert!(tab.min_order().unwrap() >= 2.0);
        // the limit is the mean over the circle, here a fine direct sum
        let m = 4096;
        let mut direct = 0.0;
        for (r, lam) in [(1.0, 0.5), (2.0, -0.8)] {
            let mut acc = 0.0;
            for i in 0..m {
                let a = 2.0 * PI * i as f64 / m as f64;
                let d2 = p.rho * p.rho + r * r - 2.0 * p.rho * r * (p.theta - a).cos() + p.s * p.s;
                acc += 1.0 / d2;
            }
            direct += lam * acc / m as f64;
        }
        assert!((tab.reference.unwrap() / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn central_levels_are_sandwiched() {
        let spec = MeshSpec {
            ratio: 1.2,
            h_origin: 1e-3,
            h_pole: 1e-2,
            h_max: 1.0,
            n_theta: 4,
            truncation: Some(30.0),
        };
        let cfg = PoleConfiguration::new(4, 0.45, vec![Polygon::new(1.0, 0.0)], Mode::Circular).unwrap();
        let rep = k_limit_study(&spec, &cfg, &[2, 4], 0.01, &MinimizeOptions::default()).unwrap();
        assert!(rep.sandwich.iter().all(|&b| b), "{rep:?}");
        assert!(rep.converged.iter().all(|&b| b));
        let lo = rep.lower_proxy.unwrap();
        assert!(lo < rep.circular_level);
        assert!(k_limit_study(&spec, &cfg, &[4, 2], 0.01, &MinimizeOptions::default()).is_err());
    }
}
