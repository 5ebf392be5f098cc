//! Monte-Carlo estimate of the interaction constant `beta`, independent of
//! the axially reduced quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::closed_forms::HardyParameter;
use crate::error::{invalid, Result};
use crate::quadrature::{compensated_sum, unit_sphere_area};

use super::interaction::{regime_of, Regime};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// `|value - mean|` in units of the standard error.
    pub fn sigmas_from(&self, value: f64) -> f64 {
        (value - self.mean).abs() / self.std_error
    }
}

const CHUNK: usize = 1 << 16;
/// Mixture weights: near `y = 0`, near `y = -e_1`, and the far field.
const WEIGHTS: [f64; 3] = [0.4, 0.3, 0.3];

/// Importance-sampled estimate of `int |y|^{-e} |y + e_1|^{-2} dy`,
/// `e = (N-2)(1+nu)`, which equals `beta` after the shift `y = x - e_1`.
///
/// Samples come from a mixture of `|y|^{-e}` on the unit ball,
/// `|y + e_1|^{-2}` on the unit ball about `-e_1`, and `|y|^{-e-2}` outside
/// the unit ball; all three keep the variance finite. Chunks draw from
/// separate ChaCha streams of `seed`, so the result does not depend on the
/// thread count.
pub fn beta_monte_carlo(p: &HardyParameter, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if regime_of(p) != Regime::Fractional {
        return invalid("beta needs N(N-4)/4 < lambda");
    }
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let n = p.dimension();
    let nf = n as f64;
    let e = (nf - 2.0) * (1.0 + p.nu());
    let b = e + 2.0;
    let area = unit_sphere_area(n - 1);
    // normalizations of the three radial densities
    let c_near = (nf - e) / area;
    let c_pole = (nf - 2.0) / area;
    let c_far = (b - nf) / area;
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut y = vec![0.0; n];
            let mut vals = Vec::with_capacity(count);
            for _ in 0..count {
                // uniform direction
                let mut norm2 = 0.0;
                for v in y.iter_mut() {
                    *v = rng.sample::<f64, _>(StandardNormal);
                    norm2 += *v * *v;
                }
                let inv = norm2.sqrt().recip();
                let u: f64 = rng.random();
                let pick: f64 = rng.random();
                let (radius, center) = if pick < WEIGHTS[0] {
                    (u.powf(1.0 / (nf - e)), 0.0)
                } else if pick < WEIGHTS[0] + WEIGHTS[1] {
                    (u.powf(1.0 / (nf - 2.0)), -1.0)
                } else {
                    ((1.0 - u).powf(-1.0 / (b - nf)), 0.0)
                };
                for v in y.iter_mut() {
                    *v *= inv * radius;
                }
                y[0] += center;
                let r2: f64 = y.iter().map(|v| v * v).sum();
                let r = r2.sqrt();
                let q2 = r2 + 2.0 * y[0] + 1.0;
                let f = r.powf(-e) / q2;
                let mut q = 0.0;
                if r < 1.0 {
                    q += WEIGHTS[0] * c_near * r.powf(-e);
                } else {
                    q += WEIGHTS[2] * c_far * r.powf(-b);
                }
                if q2 < 1.0 {
                    q += WEIGHTS[1] * c_pole / q2;
                }
                vals.push(f / q);
            }
            let s = compensated_sum(vals.iter().copied());
            let s2 = compensated_sum(vals.iter().map(|v| v * v));
            (s, s2)
        })
        .collect();
    let total = compensated_sum(partial.iter().map(|p| p.0));
    let total2 = compensated_sum(partial.iter().map(|p| p.1));
    let m = samples as f64;
    let mean = total / m;
    let var = (total2 / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::studies::beta_constant;

    #[test]
    fn agrees_with_the_quadrature_within_three_sigma() {
        for (n, lam) in [(6usize, 3.5), (5, 2.0), (4, 0.5)] {
            let p = HardyParameter::new(n, lam).unwrap();
            let mc = beta_monte_carlo(&p, 1 << 19, 11).unwrap();
            let beta = beta_constant(&p).unwrap();
            assert!(mc.sigmas_from(beta) < 3.0, "N={n}: {mc:?} vs {beta}");
            assert!(mc.std_error < 1e-2 * beta);
        }
    }

    #[test]
    fn independent_of_the_thread_count() {
        let p = HardyParameter::new(6, 3.5).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| beta_monte_carlo(&p, 200_000, 3).unwrap())
        };
        assert_eq!(run(1), run(3));
        assert_ne!(run(1).mean, beta_monte_carlo(&p, 200_000, 4).unwrap().mean);
    }

    #[test]
    fn rejects_divergent_parameters() {
        let p = HardyParameter::new(6, 1.0).unwrap();
        assert!(beta_monte_carlo(&p, 1000, 1).is_err());
        let p = HardyParameter::new(6, 3.5).unwrap();
        assert!(beta_monte_carlo(&p, 1, 1).is_err());
    }
}
