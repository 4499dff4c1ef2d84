use super::{norm_sq, LatticeVector};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Interaction weights indexed by the length class of a direction:
/// `s1` for |ξ| = 1, `s2` for |ξ| = √2, `s3` for |ξ| = √3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl Kernel {
    /// Default weights. In `d = 2` the lattice sum reproduces
    /// `|M|² + ½(tr M)²` exactly; for `d = 3` see `IdentityCoefficients`.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Kernel { s1: 1.0, s2: 1.0, s3: 0.0 }),
            3 => Ok(Kernel { s1: 0.75, s2: 0.5, s3: 9.0 / 32.0 }),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn weight(&self, xi: &LatticeVector) -> f64 {
        match norm_sq(xi) {
            1 => self.s1,
            2 => self.s2,
            3 => self.s3,
            _ => 0.0,
        }
    }
}

/// The direction set `S_d` together with its kernel weights.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    vectors: Vec<LatticeVector>,
    kernel: Kernel,
}

/// `S_2 = {e1, e2, e1+e2, e1−e2}`; `S_3` adds the face diagonals of all
/// three coordinate planes and the four body diagonals `e1 ± e2 ± e3`.
pub fn direction_set(dim: usize) -> Result<DirectionSet> {
    DirectionSet::new(dim, Kernel::default_for(dim)?)
}

impl DirectionSet {
    pub fn new(dim: usize, kernel: Kernel) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut vectors = Vec::new();
        for i in 0..dim {
            let mut v = [0; 3];
            v[i] = 1;
            vectors.push(v);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                for sj in [1, -1] {
                    let mut v = [0; 3];
                    v[i] = 1;
                    v[j] = sj;
                    vectors.push(v);
                }
            }
        }
        if dim == 3 {
            for s2 in [1, -1] {
                for s3 in [1, -1] {
                    vectors.push([1, s2, s3]);
                }
            }
        }
        let set = DirectionSet { dim, vectors, kernel };
        for xi in &set.vectors {
            let w = kernel.weight(xi);
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "kernel weight for direction {xi:?} must be positive, got {w}"
                )));
            }
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[LatticeVector] {
        &self.vectors
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn weight(&self, xi: &LatticeVector) -> f64 {
        self.kernel.weight(xi)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}
