use super::{LatticeDomain, MAX_DIM};
use crate::error::{Error, Result};

/// Node values `v : Ω_δ → ℝ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

/// Node values `u : Ω_δ → ℝ^d`, stored node-major (components contiguous).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    dim: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn constant(domain: &LatticeDomain, c: f64) -> Self {
        ScalarField { values: vec![c; domain.len()] }
    }

    pub fn from_fn(domain: &LatticeDomain, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = domain.dim();
        ScalarField {
            values: (0..domain.len()).map(|n| f(&domain.position(n)[..d])).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    #[inline]
    pub fn set(&mut self, node: usize, value: f64) {
        self.values[node] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Sets the phase field to 1 on every Dirichlet-masked node.
    pub fn apply_dirichlet(&mut self, domain: &LatticeDomain) -> Result<()> {
        domain.check_scalar(self)?;
        for node in 0..domain.len() {
            if domain.is_dirichlet(node) {
                self.values[node] = 1.0;
            }
        }
        Ok(())
    }

    /// Nodal `min(v, 1)`.
    pub fn clamp_max_one(&self) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| v.min(1.0)).collect(),
        }
    }
}

impl VectorField {
    pub fn from_values(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidParams(format!(
                "{} values do not split into {dim}-vectors",
                values.len()
            )));
        }
        Ok(VectorField { dim, values })
    }

    pub fn zeros(domain: &LatticeDomain) -> Self {
        VectorField {
            dim: domain.dim(),
            values: vec![0.0; domain.len() * domain.dim()],
        }
    }

    pub fn from_fn(domain: &LatticeDomain, f: impl Fn(&[f64]) -> [f64; MAX_DIM]) -> Self {
        let d = domain.dim();
        let mut values = Vec::with_capacity(domain.len() * d);
        for n in 0..domain.len() {
            let u = f(&domain.position(n)[..d]);
            values.extend_from_slice(&u[..d]);
        }
        VectorField { dim: d, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / self.dim
    }

    #[inline]
    pub fn node(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }

    #[inline]
    pub fn node_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest Euclidean node norm, `‖u‖_∞`.
    pub fn max_norm(&self) -> f64 {
        self.values
            .chunks(self.dim)
            .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        VectorField {
            dim: self.dim,
            values: self.values.iter().map(|x| c * x).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &VectorField, b: f64) -> VectorField {
        VectorField {
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// Overwrites Dirichlet-masked nodes with `datum(α)`.
    pub fn apply_dirichlet(
        &mut self,
        domain: &LatticeDomain,
        datum: impl Fn(&[f64]) -> [f64; MAX_DIM],
    ) -> Result<()> {
        domain.check_vector(self)?;
        let d = self.dim;
        for node in 0..domain.len() {
            if domain.is_dirichlet(node) {
                let u = datum(&domain.position(node)[..d]);
                self.node_mut(node).copy_from_slice(&u[..d]);
            }
        }
        Ok(())
    }

    /// Copies the Dirichlet-layer values of `reference` into `self`.
    pub fn copy_dirichlet_from(&mut self, domain: &LatticeDomain, reference: &VectorField) -> Result<()> {
        domain.check_vector(self)?;
        domain.check_vector(reference)?;
        for node in 0..domain.len() {
            if domain.is_dirichlet(node) {
                let src = reference.node(node).to_vec();
                self.node_mut(node).copy_from_slice(&src);
            }
        }
        Ok(())
    }
}
