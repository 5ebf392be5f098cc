//! Graded one-dimensional meshes.

use crate::error::{invalid, Result};

/// Local spacing `h(x) = min(h_max, min_a (h_a + (q - 1)|x - a|))`: geometric
/// growth with ratio `q` away from every anchor `a`.
#[derive(Debug, Clone)]
pub struct Grading {
    pub anchors: Vec<(f64, f64)>,
    pub ratio: f64,
    pub h_max: f64,
}

impl Grading {
    pub fn spacing(&self, x: f64) -> f64 {
        self.anchors
            .iter()
            .map(|&(a, h)| h + (self.ratio - 1.0) * (x - a).abs())
            .fold(self.h_max, f64::min)
    }
}

/// Points `0 = x_0 < x_1 < ... < x_n = length` following the grading, with
/// every anchor inside `[0, length]` hit exactly.
pub fn graded_points(g: &Grading, length: f64) -> Result<Vec<f64>> {
    if !(length > 0.0) {
        return invalid("mesh length must be positive");
    }
    if !(g.ratio > 1.0) || !(g.h_max > 0.0) {
        return invalid("grading ratio must exceed 1 and h_max must be positive");
    }
    if g.anchors.iter().any(|&(_, h)| !(h > 0.0)) {
        return invalid("anchor spacings must be positive");
    }
    let mut stops: Vec<f64> = g
        .anchors
        .iter()
        .map(|&(a, _)| a)
        .filter(|&a| a > 0.0 && a < length)
        .collect();
    stops.push(0.0);
    stops.push(length);
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();
    let mut out = vec![0.0];
    for w in stops.windows(2) {
        let seg = segment_points(g, w[0], w[1]);
        out.extend_from_slice(&seg[1..]);
    }
    Ok(out)
}

/// Equidistributes `1/h` on `[a, b]`: the cumulative `F(x) = int_a^x dt/h(t)`
/// is tabulated on a fine march and inverted at integer levels.
fn segment_points(g: &Grading, a: f64, b: f64) -> Vec<f64> {
    const REFINE: f64 = 16.0;
    let mut xs = vec![a];
    let mut fs = vec![0.0];
    let mut x = a;
    let mut f = 0.0;
    while x < b {
        let step = (g.spacing(x) / REFINE).min(b - x);
        let nx = if b - x - step < 1e-12 * (b - a) { b } else { x + step };
        // trapezoid on 1/h, which is piecewise smooth at this resolution
        f += 0.5 * (nx - x) * (1.0 / g.spacing(x) + 1.0 / g.spacing(nx));
        x = nx;
        xs.push(x);
        fs.push(f);
    }
    let total = *fs.last().unwrap();
    let n = total.round().max(1.0) as usize;
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(a);
    let mut idx = 0;
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        while fs[idx + 1] < target {
            idx += 1;
        }
        let t = (target - fs[idx]) / (fs[idx + 1] - fs[idx]);
        pts.push(xs[idx] + t * (xs[idx + 1] - xs[idx]));
    }
    pts.push(b);
    pts
}
