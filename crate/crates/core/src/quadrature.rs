//! One-dimensional quadrature rules.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-type initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss rule over the box `[lo, hi]`, optionally split into
/// `pieces` equal sub-boxes per axis.
pub fn integrate_box(
    lo: &[f64],
    hi: &[f64],
    order: usize,
    pieces: usize,
    f: &dyn Fn(&[f64]) -> f64,
) -> Result<f64> {
    let dim = lo.len();
    let (xs, ws) = gauss_legendre(order);
    let per_axis = order * pieces;
    let mut pts: Vec<Vec<(f64, f64)>> = Vec::with_capacity(dim);
    for k in 0..dim {
        let h = (hi[k] - lo[k]) / pieces as f64;
        let mut axis = Vec::with_capacity(per_axis);
        for p in 0..pieces {
            let a = lo[k] + p as f64 * h;
            for (x, w) in xs.iter().zip(&ws) {
                axis.push((a + 0.5 * h * (x + 1.0), 0.5 * h * w));
            }
        }
        pts.push(axis);
    }
    let total_pts = per_axis.pow(dim as u32);
    let mut sum = 0.0;
    let mut x = vec![0.0; dim];
    for flat in 0..total_pts {
        let mut rem = flat;
        let mut w = 1.0;
        for k in (0..dim).rev() {
            let (xk, wk) = pts[k][rem % per_axis];
            rem /= per_axis;
            x[k] = xk;
            w *= wk;
        }
        let val = f(&x);
        if !val.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand at {x:?}")));
        }
        sum += w * val;
    }
    Ok(sum)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::Quadrature("adaptive Simpson recursion limit reached".into()));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}
