//! Pointwise finite-difference stencils.
//!
//! `D^ξ u(α) = ⟨u(α+δξ) − u(α), ξ/|ξ|²⟩` is a plain difference (no division
//! by δ); the energies apply the matching powers of δ.

use crate::error::{Error, Result};
use crate::lattice::{norm_sq, LatticeDomain, LatticeVector, ScalarField, VectorField, MAX_DIM};

/// A choice of signs `(k_1, …, k_d) ∈ {−1, 1}^d` for the directed divergence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    dim: usize,
    signs: [i32; MAX_DIM],
}

impl SignPattern {
    pub fn new(signs: &[i32]) -> Self {
        assert!(signs.iter().all(|s| *s == 1 || *s == -1));
        let mut s = [1; MAX_DIM];
        s[..signs.len()].copy_from_slice(signs);
        SignPattern { dim: signs.len(), signs: s }
    }

    /// All `2^d` patterns in lexicographic order, `−1` before `+1`.
    pub fn all(dim: usize) -> Vec<SignPattern> {
        (0..1usize << dim)
            .map(|bits| {
                let mut s = [1; MAX_DIM];
                for (k, sk) in s.iter_mut().enumerate().take(dim) {
                    *sk = if bits >> (dim - 1 - k) & 1 == 1 { 1 } else { -1 };
                }
                SignPattern { dim, signs: s }
            })
            .collect()
    }

    pub fn signs(&self) -> &[i32] {
        &self.signs[..self.dim]
    }

    /// Direction `k_i e_i`.
    pub fn axis_vector(&self, i: usize) -> LatticeVector {
        let mut v = [0; MAX_DIM];
        v[i] = self.signs[i];
        v
    }
}

pub fn negate(xi: &LatticeVector) -> LatticeVector {
    [-xi[0], -xi[1], -xi[2]]
}

fn neighbor(domain: &LatticeDomain, node: usize, xi: &LatticeVector) -> Result<usize> {
    if !domain.is_active(node) {
        return Err(Error::OutOfRange { node, shift: [0; MAX_DIM] });
    }
    domain
        .active_shift(node, xi, 1)
        .ok_or(Error::OutOfRange { node, shift: *xi })
}

/// `⟨u(b) − u(a), ξ⟩ / |ξ|²` for the already resolved endpoints `a = α`, `b = α+δξ`.
#[inline]
pub(crate) fn projected_difference(u: &VectorField, a: usize, b: usize, xi: &LatticeVector) -> f64 {
    let ua = u.node(a);
    let ub = u.node(b);
    let mut s = 0.0;
    for k in 0..ua.len() {
        s += (ub[k] - ua[k]) * xi[k] as f64;
    }
    s / norm_sq(xi) as f64
}

/// `D_δ^ξ u(α)`.
pub fn diff_quot(domain: &LatticeDomain, u: &VectorField, node: usize, xi: &LatticeVector) -> Result<f64> {
    let b = neighbor(domain, node, xi)?;
    Ok(projected_difference(u, node, b, xi))
}

/// `|D_{δ,ξ} u(α)|² = |D^ξ u(α)|² + |D^{−ξ} u(α)|²`.
pub fn sym_pair_sq(domain: &LatticeDomain, u: &VectorField, node: usize, xi: &LatticeVector) -> Result<f64> {
    let plus = diff_quot(domain, u, node, xi)?;
    let minus = diff_quot(domain, u, node, &negate(xi))?;
    Ok(plus * plus + minus * minus)
}

/// `Δ_δ^ξ v(α) = v(α+δξ) − v(α)`.
pub fn delta_scalar(domain: &LatticeDomain, v: &ScalarField, node: usize, xi: &LatticeVector) -> Result<f64> {
    let b = neighbor(domain, node, xi)?;
    Ok(v.get(b) - v.get(node))
}

/// `div_δ^{k_1e_1,…,k_de_d} u(α) = Σ_i D_δ^{k_i e_i} u(α)`.
pub fn div_directed(domain: &LatticeDomain, u: &VectorField, node: usize, s: &SignPattern) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..domain.dim() {
        let e = s.axis_vector(i);
        total += diff_quot(domain, u, node, &e)?;
    }
    Ok(total)
}

/// Directed divergences for all sign patterns, in [`SignPattern::all`] order.
pub(crate) fn directed_divergences(domain: &LatticeDomain, u: &VectorField, node: usize) -> Result<Vec<f64>> {
    let d = domain.dim();
    // D^{±e_i} u(α) = ±(u_i(α ± δe_i) − u_i(α))
    let mut fwd = [0.0; MAX_DIM];
    let mut bwd = [0.0; MAX_DIM];
    for i in 0..d {
        let mut e = [0; MAX_DIM];
        e[i] = 1;
        fwd[i] = diff_quot(domain, u, node, &e)?;
        bwd[i] = diff_quot(domain, u, node, &negate(&e))?;
    }
    Ok(SignPattern::all(d)
        .iter()
        .map(|s| {
            (0..d)
                .map(|i| if s.signs[i] > 0 { fwd[i] } else { bwd[i] })
                .sum()
        })
        .collect())
}

/// `|Div_δ u(α)|² = Σ_s (div^s u(α))²`.
pub fn div_sq_total(domain: &LatticeDomain, u: &VectorField, node: usize) -> Result<f64> {
    Ok(directed_divergences(domain, u, node)?.iter().map(|x| x * x).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Positive,
    Negative,
}

#[inline]
pub fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

#[inline]
pub fn negative_part(x: f64) -> f64 {
    (-x).max(0.0)
}

/// `|Div_δ^± u(α)|² = Σ_s ((div^s u(α))^±)²`.
pub fn div_pm_sq(domain: &LatticeDomain, u: &VectorField, node: usize, part: Part) -> Result<f64> {
    let f = match part {
        Part::Positive => positive_part,
        Part::Negative => negative_part,
    };
    Ok(directed_divergences(domain, u, node)?
        .iter()
        .map(|x| f(*x).powi(2))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_domain, direction_set, DirichletRegion, NodeIndex};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn grid(dim: usize, n: usize) -> LatticeDomain {
        let delta = 1.0 / (n - 1) as f64;
        build_domain(dim, &vec![0.0; dim], &vec![1.0; dim], delta, &DirichletRegion::None).unwrap()
    }

    fn affine(a: [[f64; 3]; 3], c: [f64; 3]) -> impl Fn(&[f64]) -> [f64; 3] {
        move |x| {
            let mut out = c;
            for i in 0..3 {
                for j in 0..x.len() {
                    out[i] += a[i][j] * x[j];
                }
            }
            out
        }
    }

    fn random_field(d: &LatticeDomain, seed: u64) -> VectorField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..d.len() * d.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        VectorField::from_values(d.dim(), vals).unwrap()
    }

    fn center(d: &LatticeDomain) -> usize {
        let mid = d.extents()[0] / 2;
        d.index_of(&NodeIndex([mid; 3]))
    }

    #[test]
    fn sign_patterns_are_lexicographic() {
        let all = SignPattern::all(2);
        let signs: Vec<_> = all.iter().map(|s| s.signs().to_vec()).collect();
        assert_eq!(signs, vec![vec![-1, -1], vec![-1, 1], vec![1, -1], vec![1, 1]]);
        assert_eq!(SignPattern::all(3).len(), 8);
    }

    #[test]
    fn affine_difference_quotient() {
        let d = grid(2, 9);
        let delta = d.spacing();
        let a = [[0.3, -1.2, 0.0], [0.7, 2.0, 0.0], [0.0; 3]];
        let u = VectorField::from_fn(&d, affine(a, [0.5, -0.25, 0.0]));
        let node = center(&d);
        for xi in direction_set(2).unwrap().vectors() {
            let mut q = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    q += a[i][j] * xi[j] as f64 * xi[i] as f64;
                }
            }
            let expect = delta * q / norm_sq(xi) as f64;
            assert!((diff_quot(&d, &u, node, xi).unwrap() - expect).abs() < 1e-14);
            let pair = sym_pair_sq(&d, &u, node, xi).unwrap();
            assert!((pair - 2.0 * expect * expect).abs() < 1e-14);
        }
    }

    #[test]
    fn shear_field_values() {
        let d = grid(2, 5);
        let u = VectorField::from_fn(&d, |x| [x[1], 0.0, 0.0]);
        let node = center(&d);
        assert!(diff_quot(&d, &u, node, &[1, 0, 0]).unwrap().abs() < 1e-15);
        let v = diff_quot(&d, &u, node, &[1, 1, 0]).unwrap();
        assert!((v - d.spacing() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_difference() {
        let d = grid(3, 5);
        let v = ScalarField::from_fn(&d, |x| 2.0 * x[0] - x[1] + 0.5 * x[2]);
        let node = center(&d);
        let got = delta_scalar(&d, &v, node, &[1, -1, 1]).unwrap();
        assert!((got - d.spacing() * 3.5).abs() < 1e-14);
        assert_eq!(delta_scalar(&d, &ScalarField::constant(&d, 4.0), node, &[1, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn scalar_difference_antisymmetry() {
        let d = grid(2, 6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let v = ScalarField::from_values((0..d.len()).map(|_| rng.gen::<f64>()).collect());
        for node in d.range_nodes(&[1, 1, 0]) {
            let fwd = delta_scalar(&d, &v, node, &[1, 1, 0]).unwrap();
            let next = d.shift(node, &[1, 1, 0], 1).unwrap();
            let back = delta_scalar(&d, &v, next, &[-1, -1, 0]).unwrap();
            assert_eq!(fwd, -back);
        }
    }

    #[test]
    fn divergence_of_affine_fields() {
        for dim in [2, 3] {
            let d = grid(dim, 5);
            let delta = d.spacing();
            let a = [[1.5, 0.2, -0.3], [0.4, -0.5, 0.9], [0.1, 0.3, 2.0]];
            let tr: f64 = (0..dim).map(|i| a[i][i]).sum();
            let u = VectorField::from_fn(&d, affine(a, [1.0, 2.0, 3.0]));
            let node = center(&d);
            for s in SignPattern::all(dim) {
                let got = div_directed(&d, &u, node, &s).unwrap();
                assert!((got - delta * tr).abs() < 1e-14);
            }
            let total = div_sq_total(&d, &u, node).unwrap();
            let expect = (1 << dim) as f64 * (delta * tr).powi(2);
            assert!((total - expect).abs() < 1e-13);

            let id = VectorField::from_fn(&d, |x| [x[0], x[1], if x.len() > 2 { x[2] } else { 0.0 }]);
            let s = SignPattern::all(dim)[0];
            assert!((div_directed(&d, &id, node, &s).unwrap() - delta * dim as f64).abs() < 1e-14);
            assert_eq!(div_pm_sq(&d, &id, node, Part::Negative).unwrap(), 0.0);
            let neg = id.scaled(-1.0);
            assert_eq!(div_pm_sq(&d, &neg, node, Part::Positive).unwrap(), 0.0);
        }
    }

    #[test]
    fn rotation_is_divergence_free() {
        let d = grid(2, 5);
        let u = VectorField::from_fn(&d, |x| [-x[1], x[0], 0.0]);
        let node = center(&d);
        assert!(div_sq_total(&d, &u, node).unwrap() < 1e-28);
    }

    #[test]
    fn rigid_motions_are_in_the_kernel() {
        let d = grid(3, 5);
        let w = [[0.0, 0.7, -1.1], [-0.7, 0.0, 0.4], [1.1, -0.4, 0.0]];
        let u = VectorField::from_fn(&d, affine(w, [0.3, -2.0, 5.0]));
        let node = center(&d);
        for xi in direction_set(3).unwrap().vectors() {
            assert!(diff_quot(&d, &u, node, xi).unwrap().abs() < 1e-15);
        }
        for s in SignPattern::all(3) {
            assert!(div_directed(&d, &u, node, &s).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        let d = grid(2, 5);
        let u = VectorField::zeros(&d);
        assert!(matches!(diff_quot(&d, &u, 0, &[-1, 0, 0]), Err(Error::OutOfRange { .. })));
        assert!(div_sq_total(&d, &u, 0).is_err());
    }

    #[test]
    fn first_order_consistency_for_cubic_fields() {
        // u = (x^3 + xy, y^2 x): compare D^ξ/δ with ⟨Eu ξ, ξ⟩/|ξ|² at a fixed point
        let f = |x: &[f64]| [x[0].powi(3) + x[0] * x[1], x[1] * x[1] * x[0], 0.0];
        let grad = |x: &[f64]| [[3.0 * x[0] * x[0] + x[1], x[0]], [x[1] * x[1], 2.0 * x[0] * x[1]]];
        let mut errs = Vec::new();
        for n in [9usize, 17, 33] {
            let d = grid(2, n);
            let u = VectorField::from_fn(&d, f);
            let node = d.index_of(&NodeIndex([(n - 1) / 2, (n - 1) / 4, 0]));
            let p = d.position(node);
            let g = grad(&p[..2]);
            let mut worst: f64 = 0.0;
            for xi in direction_set(2).unwrap().vectors() {
                let mut q = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        q += g[i][j] * xi[i] as f64 * xi[j] as f64;
                    }
                }
                let exact = q / norm_sq(xi) as f64;
                let approx = diff_quot(&d, &u, node, xi).unwrap() / d.spacing();
                worst = worst.max((approx - exact).abs());
            }
            errs.push(worst);
        }
        for w in errs.windows(2) {
            let rate = w[0] / w[1];
            assert!(rate > 1.8 && rate < 2.2, "rate {rate}");
        }
    }

    #[test]
    fn split_identity_holds_on_random_fields() {
        for dim in [2, 3] {
            let d = grid(dim, 5);
            let u = random_field(&d, 11 + dim as u64);
            for node in d.range_div() {
                let total = div_sq_total(&d, &u, node).unwrap();
                let p = div_pm_sq(&d, &u, node, Part::Positive).unwrap();
                let m = div_pm_sq(&d, &u, node, Part::Negative).unwrap();
                assert!((p + m - total).abs() <= 1e-14 * total.max(1e-300));
                let direct: f64 = SignPattern::all(dim)
                    .iter()
                    .map(|s| div_directed(&d, &u, node, s).unwrap().powi(2))
                    .sum();
                assert!((direct - total).abs() <= 1e-14 * total);
            }
        }
    }

    proptest! {
        #[test]
        fn difference_quotient_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let d = grid(2, 5);
            let u = random_field(&d, seed);
            let w = random_field(&d, seed + 7919);
            let comb = u.combine(a, &w, b);
            for node in d.range_nodes(&[1, 1, 0]) {
                for xi in direction_set(2).unwrap().vectors() {
                    let lhs = diff_quot(&d, &comb, node, xi).unwrap();
                    let rhs = a * diff_quot(&d, &u, node, xi).unwrap() + b * diff_quot(&d, &w, node, xi).unwrap();
                    prop_assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn pair_is_sum_of_squares(seed in 0u64..1000) {
            let d = grid(3, 4);
            let u = random_field(&d, seed);
            for xi in direction_set(3).unwrap().vectors() {
                for node in d.range_nodes(xi) {
                    let p = diff_quot(&d, &u, node, xi).unwrap();
                    let m = diff_quot(&d, &u, node, &negate(xi)).unwrap();
                    prop_assert_eq!(sym_pair_sq(&d, &u, node, xi).unwrap(), p * p + m * m);
                }
            }
        }
    }
}
