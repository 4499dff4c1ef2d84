//! The lattice quadratic-form identity
//!
//! `Σ_{ξ∈S_d} σ_{|ξ|}/|ξ|⁴ ⟨Mξ,ξ⟩² = c₁ Σ M_ii² + 2c₂ Σ_{i<j} M_ij² + c₃ (tr M)²`
//!
//! which links the elastic lattice sum to `|Eu|²` and `(div u)²`.

use crate::error::{Error, Result};
use crate::lattice::{norm_sq, DirectionSet, Kernel};

/// A `d×d` matrix stored in the upper-left corner of a 3×3 array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMatrix {
    pub dim: usize,
    pub entries: [[f64; 3]; 3],
}

impl SymMatrix {
    pub fn new(dim: usize, entries: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..dim {
            for j in 0..dim {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NonSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymMatrix { dim, entries })
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[i][i]).sum()
    }

    /// Frobenius norm squared.
    pub fn norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.entries[i][j].powi(2);
            }
        }
        s
    }

    pub fn quad(&self, xi: &[i32; 3]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.entries[i][j] * xi[i] as f64 * xi[j] as f64;
            }
        }
        s
    }
}

/// The constants `c_{1,σ,d}`, `c_{2,σ,d}`, `c_{3,σ,d}`.
///
/// [`IdentityCoefficients::new`] uses the closed form with the factor
/// `(d−1)(d−2)` on the `|ξ| = √3` terms. Enumerating the four vectors
/// `e₁ ± e₂ ± e₃` gives half that factor, see
/// [`IdentityCoefficients::enumerated`]; the two agree for `d = 2` only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl IdentityCoefficients {
    pub fn new(kernel: &Kernel, dim: usize) -> Self {
        Self::with_diagonal_factor(kernel, dim, 1.0)
    }

    /// Coefficients matching the direct sum over `S_d` exactly.
    pub fn enumerated(kernel: &Kernel, dim: usize) -> Self {
        Self::with_diagonal_factor(kernel, dim, 0.5)
    }

    fn with_diagonal_factor(kernel: &Kernel, dim: usize, factor: f64) -> Self {
        let d = dim as f64;
        let tri = factor * (d - 1.0) * (d - 2.0);
        IdentityCoefficients {
            c1: kernel.s1 + kernel.s2 / 2.0 * (d - 2.0),
            c2: kernel.s2 + 8.0 * kernel.s3 / 9.0 * tri,
            c3: kernel.s2 / 2.0 + 4.0 * kernel.s3 / 9.0 * tri,
        }
    }

    /// `min(c₁, c₂)`, the coercivity constant of the lattice sum.
    pub fn coercivity(&self) -> f64 {
        self.c1.min(self.c2)
    }

    pub fn closed_form(&self, m: &SymMatrix) -> f64 {
        let mut diag = 0.0;
        let mut off = 0.0;
        for i in 0..m.dim {
            diag += m.entries[i][i].powi(2);
            for j in (i + 1)..m.dim {
                off += m.entries[i][j].powi(2);
            }
        }
        self.c1 * diag + 2.0 * self.c2 * off + self.c3 * m.trace().powi(2)
    }
}

/// Direct lattice sum over `S_d`.
pub fn lattice_sum(m: &SymMatrix, dirs: &DirectionSet) -> f64 {
    dirs.vectors()
        .iter()
        .map(|xi| {
            let l = norm_sq(xi) as f64;
            dirs.weight(xi) / (l * l) * m.quad(xi).powi(2)
        })
        .sum()
}

/// Returns `(direct lattice sum, closed form of [`IdentityCoefficients::new`])`.
pub fn quadratic_form_identity(
    m: &[[f64; 3]; 3],
    dirs: &DirectionSet,
) -> Result<(f64, f64)> {
    let m = SymMatrix::new(dirs.dim(), *m)?;
    let coeffs = IdentityCoefficients::new(&dirs.kernel(), dirs.dim());
    Ok((lattice_sum(&m, dirs), coeffs.closed_form(&m)))
}
