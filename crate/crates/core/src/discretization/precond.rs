//! Direct solver for the Dirichlet stiffness matrix: a real orthonormal
//! Fourier transform in `theta` decouples the sector grid into one banded
//! symmetric positive definite system per frequency.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::grid::ReducedGrid;

/// Banded Cholesky factor, row `r` holding `L[r][r-b..=r]`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors the symmetric matrix whose lower band is produced by
    /// `entry(r, c)` for `r - b <= c <= r`.
    pub fn factor<F: Fn(usize, usize) -> f64>(n: usize, b: usize, entry: F) -> Result<Self> {
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for r in 0..n {
            let c0 = r.saturating_sub(b);
            for c in c0..=r {
                let mut sum = entry(r, c);
                let k0 = c0.max(c.saturating_sub(b));
                for k in k0..c {
                    sum -= l[r * w + (k + b - r)] * l[c * w + (k + b - c)];
                }
                if c == r {
                    if !(sum > 0.0) {
                        return Err(Error::Indefinite(format!(
                            "pivot {sum:e} at row {r} of the stiffness factorization"
                        )));
                    }
                    l[r * w + b] = sum.sqrt();
                } else {
                    l[r * w + (c + b - r)] = sum / l[c * w + b];
                }
            }
        }
        Ok(Self { n, b, l })
    }

    /// Solves `L L^T x = rhs` in place.
    pub fn solve(&self, x: &mut [f64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for r in 0..n {
            let c0 = r.saturating_sub(b);
            let mut sum = x[r];
            for c in c0..r {
                sum -= self.l[r * w + (c + b - r)] * x[c];
            }
            x[r] = sum / self.l[r * w + b];
        }
        for r in (0..n).rev() {
            let mut sum = x[r];
            for c in r + 1..(r + b + 1).min(n) {
                sum -= self.l[c * w + (r + b - c)] * x[c];
            }
            x[r] = sum / self.l[r * w + b];
        }
    }
}

/// `P^{-1}` for the Dirichlet stiffness `P = K` (identity on boundary rows).
#[derive(Debug, Clone)]
pub struct StiffnessSolver {
    nr: usize,
    nt: usize,
    ns: usize,
    /// Whether the meridian ordering puts `s` innermost.
    s_inner: bool,
    /// Orthonormal basis rows, `basis[m * nt + j]`.
    basis: Vec<f64>,
    /// Factor index for each basis row.
    row_factor: Vec<usize>,
    factors: Vec<BandCholesky>,
}

impl StiffnessSolver {
    pub fn new(grid: &ReducedGrid) -> Result<Self> {
        let (nr, nt, ns) = (grid.n_rho(), grid.n_theta(), grid.n_s());
        let s_inner = ns <= nr;
        let (basis, freqs) = real_fourier_basis(nt);
        let mut distinct: Vec<usize> = freqs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let row_factor = freqs
            .iter()
            .map(|f| distinct.iter().position(|d| d == f).unwrap())
            .collect();
        let factors = distinct
            .par_iter()
            .map(|&freq| {
                let sigma = 2.0 - 2.0 * (2.0 * PI * freq as f64 / nt as f64).cos();
                meridian_factor(grid, sigma, s_inner)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nr,
            nt,
            ns,
            s_inner,
            basis,
            row_factor,
            factors,
        })
    }

    fn meridian_index(&self, i: usize, l: usize) -> usize {
        if self.s_inner {
            i * self.ns + l
        } else {
            l * self.nr + i
        }
    }

    /// `out = K^{-1} r` on interior nodes, `out = r` on boundary nodes.
    pub fn solve(&self, r: &[f64], out: &mut [f64]) {
        let (nr, nt, ns) = (self.nr, self.nt, self.ns);
        let plane = nr * ns;
        let mut modes = vec![0.0; nt * plane];
        for i in 0..nr {
            for l in 0..ns {
                let q = self.meridian_index(i, l);
                for m in 0..nt {
                    let row = &self.basis[m * nt..(m + 1) * nt];
                    let mut acc = 0.0;
                    for j in 0..nt {
                        acc += row[j] * r[(i * nt + j) * ns + l];
                    }
                    modes[m * plane + q] = acc;
                }
            }
        }
        modes
            .par_chunks_mut(plane)
            .enumerate()
            .for_each(|(m, x)| self.factors[self.row_factor[m]].solve(x));
        for i in 0..nr {
            for l in 0..ns {
                let q = self.meridian_index(i, l);
                for j in 0..nt {
                    let mut acc = 0.0;
                    for m in 0..nt {
                        acc += self.basis[m * nt + j] * modes[m * plane + q];
                    }
                    out[(i * nt + j) * ns + l] = acc;
                }
            }
        }
    }
}

/// Orthonormal real Fourier rows for `n` periodic points and their
/// frequencies: constant, then cosine/sine pairs, then the alternating row
/// for even `n`.
fn real_fourier_basis(n: usize) -> (Vec<f64>, Vec<usize>) {
    let mut basis = Vec::with_capacity(n * n);
    let mut freqs = Vec::with_capacity(n);
    let nf = n as f64;
    basis.extend(std::iter::repeat_n(1.0 / nf.sqrt(), n));
    freqs.push(0);
    let mut q = 1;
    while 2 * q < n {
        let a = (2.0 / nf).sqrt();
        basis.extend((0..n).map(|j| a * (2.0 * PI * (q * j) as f64 / nf).cos()));
        basis.extend((0..n).map(|j| a * (2.0 * PI * (q * j) as f64 / nf).sin()));
        freqs.push(q);
        freqs.push(q);
        q += 1;
    }
    if n.is_multiple_of(2) && n > 1 {
        basis.extend((0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt()));
        freqs.push(n / 2);
    }
    (basis, freqs)
}

/// Factor of `K_meridian + sigma * diag(theta weights)`.
fn meridian_factor(grid: &ReducedGrid, sigma: f64, s_inner: bool) -> Result<BandCholesky> {
    let (nr, ns) = (grid.n_rho(), grid.n_s());
    let f = grid.factor;
    let tc = grid.factor / (grid.dtheta * grid.dtheta);
    let theta_on = grid.n_theta() > 1;
    let (outer, inner) = if s_inner { (nr, ns) } else { (ns, nr) };
    let to_il = |q: usize| {
        let (a, b) = (q / inner, q % inner);
        if s_inner {
            (a, b)
        } else {
            (b, a)
        }
    };
    let rho_w = |i: usize, l: usize| f * grid.rho_edge[i] * grid.s_dual[l];
    let s_w = |i: usize, l: usize| f * grid.rho_dual[i] * grid.s_edge[l];
    let entry = |r: usize, c: usize| {
        let (i, l) = to_il(r);
        if r == c {
            if grid.is_boundary(i, l) {
                return 1.0;
            }
            let mut d = rho_w(i, l) + s_w(i, l);
            if i > 0 {
                d += rho_w(i - 1, l);
            }
            if l > 0 {
                d += s_w(i, l - 1);
            }
            if theta_on {
                d += sigma * tc * grid.s_dual[l] * grid.rho_inv[i];
            }
            return d;
        }
        let (i2, l2) = to_il(c);
        if grid.is_boundary(i, l) || grid.is_boundary(i2, l2) {
            return 0.0;
        }
        if l == l2 && i.abs_diff(i2) == 1 {
            -rho_w(i.min(i2), l)
        } else if i == i2 && l.abs_diff(l2) == 1 {
            -s_w(i, l.min(l2))
        } else {
            0.0
        }
    };
    BandCholesky::factor(outer * inner, inner, entry)
}
