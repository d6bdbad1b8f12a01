//! Gauss-Legendre rules and adaptive tensor-product quadrature over boxes
//! with known interior breakpoints (the coefficient kernels are piecewise
//! polynomial; cells are split at every kernel kink).

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::sync::Mutex;

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1], computed by
/// Newton iteration on P_n with the Chebyshev initial guess.
fn gl_f64(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((-x, w)); // ascending in x
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

static GL_CACHE: Mutex<Vec<(usize, Vec<(f64, f64)>)>> = Mutex::new(Vec::new());

pub fn gauss_legendre<R: Real>(n: usize) -> Vec<(R, R)> {
    let mut cache = GL_CACHE.lock().unwrap();
    let rule = match cache.iter().find(|(m, _)| *m == n) {
        Some((_, r)) => r.clone(),
        None => {
            let r = gl_f64(n);
            cache.push((n, r.clone()));
            r
        }
    };
    rule.into_iter()
        .map(|(x, w)| (R::from_f64(x), R::from_f64(w)))
        .collect()
}

/// Integrate f over [a, b] with cells split at the given breakpoints,
/// n Gauss points per cell.
pub fn integrate_cells_1d<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    breakpoints: &[R],
    n: usize,
) -> R {
    let mut cuts: Vec<R> = vec![a, b];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let rule = gauss_legendre::<R>(n);
    let half = R::from_f64(0.5);
    let mut acc = R::zero();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let scale = (hi - lo) * half;
        let mid = (hi + lo) * half;
        for (t, wt) in rule.iter() {
            acc = acc + *wt * scale * f(mid + scale * *t);
        }
    }
    acc
}

/// Tensor-product quadrature of f over a box, per-direction breakpoints,
/// refined by doubling the Gauss order until two successive estimates agree
/// to `rel_tol` (relative). Errors out if the final pair still disagrees.
pub fn integrate_box_adaptive<R: Real>(
    f: &dyn Fn(&[R]) -> R,
    lo: &[R],
    hi: &[R],
    breakpoints: &[Vec<R>],
    rel_tol: f64,
) -> Result<R> {
    let d = lo.len();
    let mut prev: Option<R> = None;
    for n in [8usize, 16, 32, 64] {
        let est = tensor_fixed(f, lo, hi, breakpoints, n, d);
        if let Some(p) = prev {
            let denom = p.abs().max(R::from_f64(1e-30));
            if ((est - p).abs() / denom) < R::from_f64(rel_tol) {
                return Ok(est);
            }
        }
        prev = Some(est);
    }
    // final check at the largest order pair
    let p = prev.unwrap();
    let est = tensor_fixed(f, lo, hi, breakpoints, 96, d);
    let denom = p.abs().max(R::from_f64(1e-30));
    let diff = ((est - p).abs() / denom).to_f64().unwrap_or(f64::NAN);
    if diff < rel_tol * 10.0 {
        Ok(est)
    } else {
        Err(Error::QuadratureNonConvergence { diff })
    }
}

fn tensor_fixed<R: Real>(
    f: &dyn Fn(&[R]) -> R,
    lo: &[R],
    hi: &[R],
    breakpoints: &[Vec<R>],
    n: usize,
    d: usize,
) -> R {
    // per-direction point/weight lists over all cells
    let rule = gauss_legendre::<R>(n);
    let half = R::from_f64(0.5);
    let mut pts: Vec<Vec<(R, R)>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut cuts: Vec<R> = vec![lo[j], hi[j]];
        cuts.extend(
            breakpoints[j]
                .iter()
                .copied()
                .filter(|&x| x > lo[j] && x < hi[j]),
        );
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        let mut axis = Vec::new();
        for w in cuts.windows(2) {
            let scale = (w[1] - w[0]) * half;
            let mid = (w[1] + w[0]) * half;
            for (t, wt) in rule.iter() {
                axis.push((mid + scale * *t, *wt * scale));
            }
        }
        pts.push(axis);
    }
    let mut acc = R::zero();
    let mut idx = vec![0usize; d];
    let mut x = vec![R::zero(); d];
    'outer: loop {
        let mut w = R::one();
        for j in 0..d {
            let (xj, wj) = pts[j][idx[j]];
            x[j] = xj;
            w = w * wj;
        }
        acc = acc + w * f(&x);
        let mut j = d;
        loop {
            if j == 0 {
                break 'outer;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < pts[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // 8-point rule is exact through degree 15
        let rule = gauss_legendre::<f64>(8);
        let val: f64 = rule.iter().map(|(x, w)| w * x.powi(14)).sum();
        assert_abs_diff_eq!(val, 2.0 / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn cells_handle_kinks() {
        // |x - 0.3| on [0,1] = 0.3^2/2 + 0.7^2/2
        let f = |x: f64| (x - 0.3).abs();
        let v = integrate_cells_1d(&f, 0.0, 1.0, &[0.3], 8);
        assert_abs_diff_eq!(v, 0.29, epsilon = 1e-14);
    }

    #[test]
    fn box_adaptive_2d() {
        let f = |x: &[f64]| (std::f64::consts::PI * x[0]).sin() * x[1];
        let v = integrate_box_adaptive(&f, &[0.0, 0.0], &[1.0, 1.0], &[vec![], vec![]], 1e-12)
            .unwrap();
        assert_abs_diff_eq!(v, 2.0 / std::f64::consts::PI * 0.5, epsilon = 1e-12);
    }
}
