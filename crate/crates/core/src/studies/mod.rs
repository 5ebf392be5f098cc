//! Numerical experiments checking the quantitative laws: interaction
//! scaling regimes and constants, Hardy optimality for circle potentials,
//! and the `k -> infinity` limit.

mod hardy;
mod interaction;
mod limits;
mod monte_carlo;

pub use hardy::{hardy_optimality_study, HardyStudyOptions, HardyTestFunction};
pub use interaction::{
    beta_constant, fit_interaction_scaling, fractional_exponent, gamma_constant, gamma_disambiguation, geometric_grid,
    gradient_interaction, interaction_integral, profile_l2_squared, regime_of, regime_threshold, GammaConvention,
    GammaReport, Regime, ScalingFitReport, DEFAULT_MU_POINTS, DEFAULT_MU_RANGE,
};
pub use limits::{k_limit_study, riemann_table, KLimitReport};
pub use monte_carlo::{beta_monte_carlo, MonteCarloEstimate};

use crate::error::{invalid, Result};

/// Values along an increasing parameter (`k`, or an inverse shrink factor).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub parameter_name: String,
    /// Strictly increasing.
    pub parameters: Vec<f64>,
    pub values: Vec<f64>,
    /// Known limit, when there is one.
    pub reference: Option<f64>,
    /// Aitken extrapolation from the last three values.
    pub extrapolated: Option<f64>,
    /// Observed orders in `1/parameter`: from consecutive triples, or from
    /// consecutive pairs against `reference` when it is known. `NaN` where
    /// the differences are below rounding level.
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    pub fn new(parameter_name: &str, parameters: Vec<f64>, values: Vec<f64>, reference: Option<f64>) -> Result<Self> {
        if parameters.len() != values.len() {
            return invalid("parameters and values differ in length");
        }
        if parameters.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("table parameters must be strictly increasing");
        }
        let extrapolated = aitken(&values);
        let scale = values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(reference.unwrap_or(0.0).abs());
        let floor = 1e-13 * scale.max(f64::MIN_POSITIVE);
        let orders = match reference {
            Some(r) => parameters
                .windows(2)
                .zip(values.windows(2))
                .map(|(k, v)| {
                    let (e0, e1) = ((v[0] - r).abs(), (v[1] - r).abs());
                    if e0 <= floor || e1 <= floor {
                        f64::NAN
                    } else {
                        (e0 / e1).ln() / (k[1] / k[0]).ln()
                    }
                })
                .collect(),
            None => parameters
                .windows(3)
                .zip(values.windows(3))
                .map(|(k, v)| {
                    let (d0, d1) = ((v[0] - v[1]).abs(), (v[1] - v[2]).abs());
                    if d0 <= floor || d1 <= floor {
                        f64::NAN
                    } else {
                        (d0 / d1).ln() / (k[1] / k[0]).ln()
                    }
                })
                .collect(),
        };
        Ok(Self {
            parameter_name: parameter_name.to_string(),
            parameters,
            values,
            reference,
            extrapolated,
            orders,
        })
    }

    /// Smallest order among the resolved entries.
    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().filter(|o| o.is_finite()).copied().reduce(f64::min)
    }
}

fn aitken(v: &[f64]) -> Option<f64> {
    if v.len() < 3 {
        return None;
    }
    let (a, b, c) = (v[v.len() - 3], v[v.len() - 2], v[v.len() - 1]);
    let den = (c - b) - (b - a);
    if den.abs() <= 1e-15 * c.abs().max(1e-300) {
        return Some(c);
    }
    Some(c - (c - b) * (c - b) / den)
}
