//! Continuum Griffith reference values.
//!
//! `G(u) = λ∫|Eu|² + (λ/2 + θ)∫(div u)² + H^{d−1}(K)` (+ the boundary mismatch
//! measure for the Dirichlet problem), with bulk terms integrated region by
//! region with tensor Gauss rules.

use super::EnergyParams;
use crate::error::{Error, Result};
use crate::quadrature::integrate_box;
use crate::recovery::CrackGeometry;
use std::fmt;
use std::sync::Arc;

type SmoothFn = dyn Fn(&[f64]) -> ([f64; 3], [[f64; 3]; 3]) + Send + Sync;

/// Displacement on a region: affine, or a smooth map returning value and Jacobian.
#[derive(Clone)]
pub enum Displacement {
    Affine { grad: [[f64; 3]; 3], offset: [f64; 3] },
    Smooth(Arc<SmoothFn>),
}

impl fmt::Debug for Displacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Displacement::Affine { grad, offset } => f
                .debug_struct("Affine")
                .field("grad", grad)
                .field("offset", offset)
                .finish(),
            Displacement::Smooth(_) => f.write_str("Smooth(..)"),
        }
    }
}

impl Displacement {
    pub fn constant(value: [f64; 3]) -> Self {
        Displacement::Affine { grad: [[0.0; 3]; 3], offset: value }
    }

    pub fn affine(grad: [[f64; 3]; 3], offset: [f64; 3]) -> Self {
        Displacement::Affine { grad, offset }
    }

    pub fn smooth(f: impl Fn(&[f64]) -> ([f64; 3], [[f64; 3]; 3]) + Send + Sync + 'static) -> Self {
        Displacement::Smooth(Arc::new(f))
    }

    pub fn value(&self, x: &[f64]) -> [f64; 3] {
        match self {
            Displacement::Affine { grad, offset } => {
                let mut out = *offset;
                for (i, o) in out.iter_mut().enumerate() {
                    for (j, xj) in x.iter().enumerate() {
                        *o += grad[i][j] * xj;
                    }
                }
                out
            }
            Displacement::Smooth(f) => f(x).0,
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> [[f64; 3]; 3] {
        match self {
            Displacement::Affine { grad, .. } => *grad,
            Displacement::Smooth(f) => f(x).1,
        }
    }
}

/// Axis-aligned box `[lo, hi]` carrying a displacement.
#[derive(Clone, Debug)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub displacement: Displacement,
}

impl Region {
    // Lattice positions carry rounding, so faces are thickened slightly.
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (lo, hi))| {
            let tol = 1e-9 * (hi - lo).abs().max(1.0);
            *x >= *lo - tol && *x <= *hi + tol
        })
    }
}

/// Piecewise-smooth target on a box with an optional planar crack.
#[derive(Clone, Debug)]
pub struct GriffithReference {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub lengths: Vec<f64>,
    pub regions: Vec<Region>,
    pub crack: Option<CrackGeometry>,
    /// `H^{d−1}({tr u ≠ tr u₀} ∩ ∂_D Ω)` for the Dirichlet functional.
    pub dirichlet_mismatch: Option<f64>,
    pub quad_order: usize,
    pub quad_pieces: usize,
}

impl GriffithReference {
    /// A single smooth region covering the whole box.
    pub fn uniform(dim: usize, origin: &[f64], lengths: &[f64], displacement: Displacement) -> Self {
        let hi: Vec<f64> = origin.iter().zip(lengths).map(|(o, l)| o + l).collect();
        GriffithReference {
            dim,
            origin: origin.to_vec(),
            lengths: lengths.to_vec(),
            regions: vec![Region { lo: origin.to_vec(), hi, displacement }],
            crack: None,
            dirichlet_mismatch: None,
            quad_order: 6,
            quad_pieces: 2,
        }
    }

    /// Two regions separated by the hyperplane `x_d = crack.level`, with the
    /// crack `K` on that plane. `below` applies for `x_d < c`, `above` for `x_d ≥ c`.
    pub fn split(
        dim: usize,
        origin: &[f64],
        lengths: &[f64],
        crack: CrackGeometry,
        below: Displacement,
        above: Displacement,
    ) -> Self {
        let hi: Vec<f64> = origin.iter().zip(lengths).map(|(o, l)| o + l).collect();
        let mut mid_hi = hi.clone();
        mid_hi[dim - 1] = crack.level;
        let mut mid_lo = origin.to_vec();
        mid_lo[dim - 1] = crack.level;
        GriffithReference {
            dim,
            origin: origin.to_vec(),
            lengths: lengths.to_vec(),
            regions: vec![
                Region { lo: origin.to_vec(), hi: mid_hi, displacement: below },
                Region { lo: mid_lo, hi, displacement: above },
            ],
            crack: Some(crack),
            dirichlet_mismatch: None,
            quad_order: 6,
            quad_pieces: 2,
        }
    }

    pub fn box_hi(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.lengths).map(|(o, l)| o + l).collect()
    }

    /// Displacement at `x`. Points on the crack plane belong to the upper region.
    pub fn value(&self, x: &[f64]) -> [f64; 3] {
        if let Some(c) = &self.crack {
            let d = self.dim - 1;
            if x[d] >= c.level {
                if let Some(r) = self.regions.iter().rev().find(|r| r.contains(x)) {
                    return r.displacement.value(x);
                }
            }
        }
        self.regions
            .iter()
            .find(|r| r.contains(x))
            .map(|r| r.displacement.value(x))
            .unwrap_or([0.0; 3])
    }

    /// `H^{d−1}(K ∩ Ω)`.
    pub fn crack_measure(&self) -> f64 {
        self.crack
            .as_ref()
            .map_or(0.0, |c| c.measure_within(&self.origin, &self.box_hi()))
    }

    /// `∫|Eu|²` and `∫(div u)²` over all regions.
    pub fn bulk_integrals(&self) -> Result<(f64, f64)> {
        let d = self.dim;
        let mut sym = 0.0;
        let mut div = 0.0;
        for region in &self.regions {
            let pieces = split_at_crack(region, self.crack.as_ref(), d);
            for (lo, hi) in pieces {
                if lo.iter().zip(&hi).any(|(a, b)| b <= a) {
                    continue;
                }
                let disp = &region.displacement;
                sym += integrate_box(&lo, &hi, self.quad_order, self.quad_pieces, &|x| {
                    sym_grad_norm_sq(&disp.jacobian(x), d)
                })?;
                div += integrate_box(&lo, &hi, self.quad_order, self.quad_pieces, &|x| {
                    let g = disp.jacobian(x);
                    (0..d).map(|i| g[i][i]).sum::<f64>().powi(2)
                })?;
            }
        }
        Ok((sym, div))
    }

    /// Bulk part `λ∫|Eu|² + (λ/2+θ)∫(div u)²`.
    pub fn bulk(&self, params: &EnergyParams) -> Result<f64> {
        let (sym, div) = self.bulk_integrals()?;
        Ok(params.lambda * sym + (params.lambda / 2.0 + params.theta) * div)
    }
}

fn split_at_crack(region: &Region, crack: Option<&CrackGeometry>, dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let axis = dim - 1;
    match crack {
        Some(c) if c.level > region.lo[axis] && c.level < region.hi[axis] => {
            let mut hi1 = region.hi.clone();
            hi1[axis] = c.level;
            let mut lo2 = region.lo.clone();
            lo2[axis] = c.level;
            vec![(region.lo.clone(), hi1), (lo2, region.hi.clone())]
        }
        _ => vec![(region.lo.clone(), region.hi.clone())],
    }
}

/// `|Eu|²` for the Jacobian `g`.
pub fn sym_grad_norm_sq(g: &[[f64; 3]; 3], dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += (0.5 * (g[i][j] + g[j][i])).powi(2);
        }
    }
    s
}

/// Griffith value of the reference: bulk + crack measure (+ mismatch).
pub fn griffith_eval(reference: &GriffithReference, params: &EnergyParams) -> Result<f64> {
    if reference.quad_order == 0 || reference.quad_pieces == 0 {
        return Err(Error::Quadrature("quadrature order and pieces must be ≥ 1".into()));
    }
    let bulk = reference.bulk(params)?;
    let mismatch = reference.dirichlet_mismatch.unwrap_or(0.0);
    Ok(bulk + reference.crack_measure() + mismatch)
}
