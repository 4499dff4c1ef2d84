//! Conjugate gradients on the free-node subspace.

use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A_ff x_f = b_f` starting from `x` (entries with `free[i] = false`
/// are left untouched and treated as zero in search directions).
/// Returns the iteration count.
pub(crate) fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    free: &[bool],
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let mask = |v: &mut [f64]| {
        for (vi, f) in v.iter_mut().zip(free) {
            if !f {
                *vi = 0.0;
            }
        }
    };
    // effective right-hand side b_f − A_fp x_p sets the scale of the tolerance
    let pinned_part: Vec<f64> = x.iter().zip(free).map(|(v, f)| if *f { 0.0 } else { *v }).collect();
    let mut eff = vec![0.0; n];
    apply(&pinned_part, &mut eff);
    for i in 0..n {
        eff[i] = b[i] - eff[i];
    }
    mask(&mut eff);
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    mask(&mut r);
    let mut rr = dot(&r, &r);
    if !rr.is_finite() {
        return Err(Error::Solver("non-finite residual".into()));
    }
    let target = tol * dot(&eff, &eff).sqrt().max(rr.sqrt());
    if rr.sqrt() <= target {
        return Ok(0);
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        mask(&mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::Solver("non-finite curvature in CG".into()));
        }
        if pap <= 0.0 {
            // null direction of a semidefinite operator: nothing left to reduce
            return Ok(it);
        }
        let alpha = rr / pap;
        for i in 0..n {
            if free[i] {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            return Err(Error::Solver("non-finite residual".into()));
        }
        if rr_new.sqrt() <= target {
            return Ok(it);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    log::warn!("CG reached the iteration cap ({max_iter}) with residual {:.3e}", rr.sqrt());
    Ok(max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // tridiagonal (2, −1)
        let apply = |x: &[f64], out: &mut [f64]| {
            let n = x.len();
            for i in 0..n {
                out[i] = 2.0 * x[i] - if i > 0 { x[i - 1] } else { 0.0 } - if i + 1 < n { x[i + 1] } else { 0.0 };
            }
        };
        let b = vec![1.0; 6];
        let mut x = vec![0.0; 6];
        let it = conjugate_gradient(apply, &b, &mut x, &[true; 6], 1e-14, 100).unwrap();
        assert!(it <= 6);
        let mut r = vec![0.0; 6];
        apply(&x, &mut r);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pinned_entries_stay_fixed() {
        let apply = |x: &[f64], out: &mut [f64]| out.copy_from_slice(x);
        let mut x = vec![5.0, 0.0];
        conjugate_gradient(apply, &[1.0, 2.0], &mut x, &[false, true], 1e-14, 10).unwrap();
        assert_eq!(x, vec![5.0, 2.0]);
    }

    #[test]
    fn zero_operator_returns_init() {
        let apply = |_: &[f64], out: &mut [f64]| out.iter_mut().for_each(|o| *o = 0.0);
        let mut x = vec![0.3, -0.2];
        conjugate_gradient(apply, &[0.0, 0.0], &mut x, &[true, true], 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.3, -0.2]);
    }

    #[test]
    fn nan_is_reported() {
        let apply = |x: &[f64], out: &mut [f64]| out.copy_from_slice(x);
        let mut x = vec![f64::NAN];
        assert!(conjugate_gradient(apply, &[1.0], &mut x, &[true], 1e-12, 10).is_err());
    }
}
