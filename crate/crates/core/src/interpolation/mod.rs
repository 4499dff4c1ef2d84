//! Interpolants and lattice translations.
//!
//! Each cell `α + δ[0,1]^d` is split into the `d!` Freudenthal simplices
//! `α + δT`; nodal fields are extended affinely on each of them.

mod freudenthal;

pub use freudenthal::{freudenthal, locate, Simplex};

use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, NodeIndex, ScalarField, VectorField, MAX_DIM};

/// Piecewise-affine interpolant of a nodal field with `comps` components.
#[derive(Clone, Debug)]
pub struct PwAffine<'a> {
    domain: &'a LatticeDomain,
    comps: usize,
    values: Vec<f64>,
    simplices: Vec<Simplex>,
}

/// Value and gradient (`grad[c][k] = ∂_k f_c`) at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSample {
    pub value: Vec<f64>,
    pub grad: Vec<[f64; MAX_DIM]>,
    pub cell: usize,
    pub simplex: usize,
}

pub fn pw_affine_scalar<'a>(domain: &'a LatticeDomain, v: &ScalarField) -> Result<PwAffine<'a>> {
    domain.check_scalar(v)?;
    PwAffine::new(domain, 1, v.as_slice().to_vec())
}

pub fn pw_affine_vector<'a>(domain: &'a LatticeDomain, u: &VectorField) -> Result<PwAffine<'a>> {
    domain.check_vector(u)?;
    PwAffine::new(domain, domain.dim(), u.as_slice().to_vec())
}

impl<'a> PwAffine<'a> {
    fn new(domain: &'a LatticeDomain, comps: usize, values: Vec<f64>) -> Result<Self> {
        Ok(PwAffine { domain, comps, values, simplices: freudenthal(domain.dim())? })
    }

    /// Lower corner of the cell holding `x` and the local coordinates in `[0,1]^d`.
    fn cell_of(&self, x: &[f64]) -> Result<(usize, [f64; MAX_DIM])> {
        let d = self.domain.dim();
        let h = self.domain.spacing();
        let mut idx = [0usize; MAX_DIM];
        let mut local = [0.0; MAX_DIM];
        for k in 0..d {
            let n = self.domain.extents()[k];
            let s = (x[k] - self.domain.origin()[k]) / h;
            let tol = 1e-9;
            if !(s >= -tol && s <= (n - 1) as f64 + tol) {
                return Err(Error::OutsideRegion(x.to_vec()));
            }
            let i = (s.floor().max(0.0) as usize).min(n - 2);
            idx[k] = i;
            local[k] = (s - i as f64).clamp(0.0, 1.0);
        }
        let corner = self.domain.index_of(&NodeIndex(idx));
        for code in 0..(1usize << d) {
            let mut c = idx;
            for (k, ck) in c.iter_mut().enumerate().take(d) {
                *ck += code >> k & 1;
            }
            if !self.domain.is_active(self.domain.index_of(&NodeIndex(c))) {
                return Err(Error::OutsideRegion(x.to_vec()));
            }
        }
        Ok((corner, local))
    }

    fn vertex_node(&self, corner: usize, v: &[i32; MAX_DIM]) -> usize {
        self.domain.shift(corner, v, 1).expect("cell corner inside box")
    }

    pub fn sample(&self, x: &[f64]) -> Result<AffineSample> {
        let d = self.domain.dim();
        let (corner, local) = self.cell_of(x)?;
        let si = locate(&local[..d]);
        let t = &self.simplices[si];
        let lam = t.barycentric(&local[..d]);
        let nodes: Vec<usize> = t.vertices().iter().map(|v| self.vertex_node(corner, v)).collect();
        let mut value = vec![0.0; self.comps];
        for (l, &n) in lam.iter().zip(&nodes) {
            for (c, out) in value.iter_mut().enumerate() {
                *out += l * self.values[n * self.comps + c];
            }
        }
        let h = self.domain.spacing();
        let mut grad = vec![[0.0; MAX_DIM]; self.comps];
        for (k, &axis) in t.permutation().iter().enumerate() {
            for (c, g) in grad.iter_mut().enumerate() {
                g[axis] = (self.values[nodes[k + 1] * self.comps + c] - self.values[nodes[k] * self.comps + c]) / h;
            }
        }
        Ok(AffineSample { value, grad, cell: corner, simplex: si })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.sample(x)?.value)
    }

    /// Symmetrized gradient of a vector interpolant at `x`.
    pub fn sym_gradient(&self, x: &[f64]) -> Result<[[f64; MAX_DIM]; MAX_DIM]> {
        let d = self.domain.dim();
        if self.comps != d {
            return Err(Error::InvalidParams("symmetrized gradient needs a vector field".into()));
        }
        let g = self.sample(x)?.grad;
        let mut e = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..d {
            for j in 0..d {
                e[i][j] = 0.5 * (g[i][j] + g[j][i]);
            }
        }
        Ok(e)
    }

    /// Nodes of the simplex `corner + δT`, in vertex order.
    pub fn simplex_nodes(&self, corner: usize, simplex: usize) -> Vec<usize> {
        self.simplices[simplex].vertices().iter().map(|v| self.vertex_node(corner, v)).collect()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }
}

/// Piecewise-constant field on cells `α + [0,δ)^d`, indexed by lower corner.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    /// `None` for cells with an inactive corner or at the upper box faces.
    pub values: Vec<Option<f64>>,
    pub skipped: usize,
}

impl CellField {
    pub fn get(&self, corner: usize) -> Option<f64> {
        self.values[corner]
    }
}

/// `ṽ_min(α) = min_{β ∈ α + δ{0,1}^d} v(β)`.
pub fn vmin_cell(domain: &LatticeDomain, v: &ScalarField) -> Result<CellField> {
    domain.check_scalar(v)?;
    let d = domain.dim();
    let mut skipped = 0;
    let values = (0..domain.len())
        .map(|n| {
            let idx = domain.multi_index(n).0;
            if (0..d).any(|k| idx[k] + 1 >= domain.extents()[k]) {
                return None;
            }
            let mut m = f64::INFINITY;
            for code in 0..(1usize << d) {
                let mut c = idx;
                for (k, ck) in c.iter_mut().enumerate().take(d) {
                    *ck += code >> k & 1;
                }
                let node = domain.index_of(&NodeIndex(c));
                if !domain.is_active(node) {
                    skipped += 1;
                    return None;
                }
                m = m.min(v.get(node));
            }
            Some(m)
        })
        .collect();
    if skipped > 0 {
        log::debug!("vmin_cell skipped {skipped} cells with inactive corners");
    }
    Ok(CellField { values, skipped })
}

/// Node map of `T_y^δ`: node `α` reads from `α + δ⌊y⌋`, clamped to the box.
pub fn translation_map(domain: &LatticeDomain, y: &[f64]) -> Result<Vec<usize>> {
    let d = domain.dim();
    if y.len() != d || y.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParams("translation needs d finite components".into()));
    }
    let shift: Vec<i64> = y.iter().map(|c| c.floor() as i64).collect();
    Ok((0..domain.len())
        .map(|n| {
            let mut idx = domain.multi_index(n).0;
            for k in 0..d {
                let hi = domain.extents()[k] as i64 - 1;
                idx[k] = (idx[k] as i64 + shift[k]).clamp(0, hi) as usize;
            }
            domain.index_of(&NodeIndex(idx))
        })
        .collect())
}

/// `T_y^δ v` for a nodal field, which owns the whole cell `α + [0,δ)^d`.
/// For `y ∈ [0,1)^d` this is the identity.
pub fn translate_scalar(domain: &LatticeDomain, v: &ScalarField, y: &[f64]) -> Result<ScalarField> {
    domain.check_scalar(v)?;
    let map = translation_map(domain, y)?;
    Ok(ScalarField::from_values(map.iter().map(|&m| v.get(m)).collect()))
}

pub fn translate_vector(domain: &LatticeDomain, u: &VectorField, y: &[f64]) -> Result<VectorField> {
    domain.check_vector(u)?;
    let map = translation_map(domain, y)?;
    let d = domain.dim();
    let mut out = Vec::with_capacity(u.as_slice().len());
    for &m in &map {
        out.extend_from_slice(u.node(m));
    }
    VectorField::from_values(d, out)
}

/// `T_y^δ f` for a function defined off the lattice: node `α` gets `f(α + δy)`.
pub fn translate_fn(domain: &LatticeDomain, y: &[f64], f: impl Fn(&[f64]) -> [f64; MAX_DIM]) -> Result<VectorField> {
    let d = domain.dim();
    if y.len() != d {
        return Err(Error::InvalidParams("translation needs d components".into()));
    }
    let h = domain.spacing();
    Ok(VectorField::from_fn(domain, |x| {
        let p: Vec<f64> = x.iter().zip(y).map(|(x, y)| x + h * y).collect();
        f(&p)
    }))
}

/// Hat-function interpolant of samples on `{0, δ, 2δ, …}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HatInterpolant {
    values: Vec<f64>,
    delta: f64,
}

pub fn pc_to_affine_1d(values: &[f64], delta: f64) -> Result<HatInterpolant> {
    if values.len() < 2 {
        return Err(Error::InvalidParams("need at least two samples".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("spacing must be positive, got {delta}")));
    }
    Ok(HatInterpolant { values: values.to_vec(), delta })
}

impl HatInterpolant {
    pub fn len(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.delta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let s = t / self.delta;
        let last = self.values.len() - 1;
        if !(s >= -1e-9 && s <= last as f64 + 1e-9) {
            return Err(Error::OutsideRegion(vec![t]));
        }
        let i = (s.floor().max(0.0) as usize).min(last - 1);
        let w = (s - i as f64).clamp(0.0, 1.0);
        Ok((1.0 - w) * self.values[i] + w * self.values[i + 1])
    }

    pub fn slope(&self, t: f64) -> Result<f64> {
        self.eval(t)?;
        let last = self.values.len() - 1;
        let i = ((t / self.delta).floor().max(0.0) as usize).min(last - 1);
        Ok((self.values[i + 1] - self.values[i]) / self.delta)
    }
}
