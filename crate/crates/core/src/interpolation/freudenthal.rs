//! Freudenthal (Kuhn) triangulation of the unit cube.

use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, MAX_DIM};
use nalgebra::{DMatrix, DVector};

/// `conv{0, e_{π₁}, e_{π₁}+e_{π₂}, …, (1,…,1)}` for an axis permutation `π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    dim: usize,
    perm: Vec<usize>,
    vertices: Vec<LatticeVector>,
}

impl Simplex {
    fn from_perm(dim: usize, perm: Vec<usize>) -> Self {
        let mut vertices = Vec::with_capacity(dim + 1);
        let mut v = [0i32; MAX_DIM];
        vertices.push(v);
        for &axis in &perm {
            v[axis] += 1;
            vertices.push(v);
        }
        Simplex { dim, perm, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Axis order along the vertex chain.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn vertices(&self) -> &[LatticeVector] {
        &self.vertices
    }

    /// The `d(d+1)/2` edge vectors `s_j − s_i`, `i < j`, in lexicographic pair order.
    pub fn edges(&self) -> Vec<(usize, usize, LatticeVector)> {
        let mut out = Vec::new();
        for i in 0..=self.dim {
            for j in (i + 1)..=self.dim {
                let mut e = [0i32; MAX_DIM];
                for k in 0..self.dim {
                    e[k] = self.vertices[j][k] - self.vertices[i][k];
                }
                out.push((i, j, e));
            }
        }
        out
    }

    /// `|det(s₁−s₀, …, s_d−s₀)|`; the volume is this over `d!`.
    pub fn volume_numerator(&self) -> i64 {
        let d = self.dim;
        let m: Vec<Vec<i64>> = (1..=d)
            .map(|j| (0..d).map(|k| (self.vertices[j][k] - self.vertices[0][k]) as i64).collect())
            .collect();
        int_det(&m).abs()
    }

    pub fn volume(&self) -> f64 {
        self.volume_numerator() as f64 / factorial(self.dim) as f64
    }

    /// Barycentric coordinates of a point of the unit cube, vertex order.
    pub fn barycentric(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut lam = Vec::with_capacity(d + 1);
        lam.push(1.0 - x[self.perm[0]]);
        for k in 0..d - 1 {
            lam.push(x[self.perm[k]] - x[self.perm[k + 1]]);
        }
        lam.push(x[self.perm[d - 1]]);
        lam
    }

    /// Closed containment, `1 ≥ x_{π₁} ≥ … ≥ x_{π_d} ≥ 0` up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.barycentric(x).iter().all(|l| *l >= -tol)
    }

    /// Coordinates `ℓ_j` of `ξ⊗ξ` in the basis `{ν_j⊗ν_j}` of symmetric
    /// matrices, `ν_j` running over [`Simplex::edges`].
    pub fn edge_coordinates(&self, xi: &LatticeVector) -> Result<Vec<f64>> {
        let d = self.dim;
        let edges = self.edges();
        let n = edges.len();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        let mut row = 0;
        for p in 0..d {
            for q in p..d {
                for (col, (_, _, e)) in edges.iter().enumerate() {
                    a[(row, col)] = (e[p] * e[q]) as f64;
                }
                b[row] = (xi[p] * xi[q]) as f64;
                row += 1;
            }
        }
        a.lu()
            .solve(&b)
            .map(|x| x.iter().copied().collect())
            .ok_or_else(|| Error::InvalidParams("edge tensors are not a basis".into()))
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

fn int_det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => (0..m.len())
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * int_det(&minor)
            })
            .sum(),
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let rest: Vec<usize> = items.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v).collect();
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// The `d!` simplices, ordered by lexicographic permutation of the axes.
pub fn freudenthal(dim: usize) -> Result<Vec<Simplex>> {
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let axes: Vec<usize> = (0..dim).collect();
    Ok(permutations(&axes).into_iter().map(|p| Simplex::from_perm(dim, p)).collect())
}

/// Index into [`freudenthal`] of the simplex containing `x ∈ [0,1]^d`.
/// Ties go to the lexicographically first permutation.
pub fn locate(x: &[f64]) -> usize {
    let d = x.len();
    let mut perm: Vec<usize> = (0..d).collect();
    // stable: equal coordinates keep the smaller axis first
    perm.sort_by(|a, b| x[*b].partial_cmp(&x[*a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut rank = 0;
    let mut remaining: Vec<usize> = (0..d).collect();
    for (k, p) in perm.iter().enumerate() {
        let pos = remaining.iter().position(|r| r == p).expect("permutation");
        rank += pos * factorial(d - 1 - k) as usize;
        remaining.remove(pos);
    }
    rank
}
