//! The scaled lattice `δZ^d` clipped to a box, with activity and Dirichlet masks.
//!
//! Nodes are stored row-major with the last axis fastest. A node's flat index
//! is `Σ i_k · stride_k`; its position is `origin + δ·(i_1, …, i_d)`.

mod directions;
mod field;
pub mod io;

pub use directions::{direction_set, DirectionSet, Kernel};
pub use field::{ScalarField, VectorField};

use crate::error::{Error, Result};

/// Supported spatial dimensions are 2 and 3; the third slot is unused for d = 2.
pub const MAX_DIM: usize = 3;

/// Integer lattice vector. Components beyond the domain dimension are zero.
pub type LatticeVector = [i32; MAX_DIM];

/// Multi-index `(i_1, …, i_d)` of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeIndex(pub [usize; MAX_DIM]);

/// A face of the box: the lower or upper side along an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Face {
    Low(usize),
    High(usize),
}

/// Portion of the boundary carrying a Dirichlet condition.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum DirichletRegion {
    #[default]
    None,
    FullBoundary,
    Faces(Vec<Face>),
}

impl DirichletRegion {
    fn faces(&self, dim: usize) -> Vec<Face> {
        match self {
            DirichletRegion::None => Vec::new(),
            DirichletRegion::FullBoundary => (0..dim)
                .flat_map(|k| [Face::Low(k), Face::High(k)])
                .collect(),
            DirichletRegion::Faces(f) => f.clone(),
        }
    }
}

/// Node subset used for localized energies.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeMask(pub Vec<bool>);

impl NodeMask {
    pub fn from_fn(domain: &LatticeDomain, f: impl Fn(&[f64]) -> bool) -> Self {
        NodeMask(
            (0..domain.len())
                .map(|n| f(&domain.position(n)[..domain.dim()]))
                .collect(),
        )
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0[node]
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }
}

#[derive(Clone, Debug)]
pub struct LatticeDomain {
    dim: usize,
    origin: [f64; MAX_DIM],
    extents: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    spacing: f64,
    active: Vec<bool>,
    dirichlet: Vec<bool>,
    // per-axis number of collar layers on the low and high side
    collar_low: [usize; MAX_DIM],
    collar_high: [usize; MAX_DIM],
}

/// Builds the lattice of the box `origin + [0, lengths]` with spacing `spacing`.
///
/// Each axis carries `⌊L_k/δ⌋ + 1` nodes. A node is Dirichlet-masked when its
/// cell `α + [0,δ)^d` meets one of the declared faces.
pub fn build_domain(
    dim: usize,
    origin: &[f64],
    lengths: &[f64],
    spacing: f64,
    dirichlet: &DirichletRegion,
) -> Result<LatticeDomain> {
    LatticeDomain::build(dim, origin, lengths, spacing, dirichlet, 0)
}

/// Like [`build_domain`], but pads every Dirichlet side with `collar` extra
/// node layers (the extended domain). Collar nodes are active and Dirichlet-masked.
pub fn build_extended_domain(
    dim: usize,
    origin: &[f64],
    lengths: &[f64],
    spacing: f64,
    dirichlet: &DirichletRegion,
    collar: usize,
) -> Result<LatticeDomain> {
    LatticeDomain::build(dim, origin, lengths, spacing, dirichlet, collar)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

impl LatticeDomain {
    fn build(
        dim: usize,
        origin: &[f64],
        lengths: &[f64],
        spacing: f64,
        dirichlet: &DirichletRegion,
        collar: usize,
    ) -> Result<Self> {
        check_dim(dim)?;
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "spacing must be positive and finite, got {spacing}"
            )));
        }
        if origin.len() != dim || lengths.len() != dim {
            return Err(Error::InvalidDomain(format!(
                "origin and lengths need {dim} components"
            )));
        }
        let mut inner = [1usize; MAX_DIM];
        for k in 0..dim {
            let l = lengths[k];
            if !l.is_finite() || !origin[k].is_finite() {
                return Err(Error::InvalidDomain("non-finite box".into()));
            }
            // tolerate round-off when L is a multiple of δ
            let cells = (l / spacing * (1.0 + 1e-12) + 1e-9).floor();
            if cells < 1.0 {
                return Err(Error::InvalidDomain(format!(
                    "side {k} of length {l} holds fewer than 2 nodes at spacing {spacing}"
                )));
            }
            inner[k] = cells as usize + 1;
        }
        let faces = dirichlet.faces(dim);
        for f in &faces {
            let (Face::Low(k) | Face::High(k)) = *f;
            if k >= dim {
                return Err(Error::InvalidDomain(format!("face axis {k} out of range")));
            }
        }
        let mut collar_low = [0; MAX_DIM];
        let mut collar_high = [0; MAX_DIM];
        if collar > 0 {
            for f in &faces {
                match *f {
                    Face::Low(k) => collar_low[k] = collar,
                    Face::High(k) => collar_high[k] = collar,
                }
            }
        }
        let mut extents = [1usize; MAX_DIM];
        let mut o = [0.0; MAX_DIM];
        for k in 0..dim {
            extents[k] = inner[k] + collar_low[k] + collar_high[k];
            o[k] = origin[k] - collar_low[k] as f64 * spacing;
        }
        let strides = strides_for(dim, &extents);
        let n: usize = extents[..dim].iter().product();
        let mut dom = LatticeDomain {
            dim,
            origin: o,
            extents,
            strides,
            spacing,
            active: vec![true; n],
            dirichlet: vec![false; n],
            collar_low,
            collar_high,
        };
        for node in 0..n {
            let idx = dom.multi_index(node).0;
            let mut marked = false;
            for k in 0..dim {
                let i = idx[k];
                if i < collar_low[k] || i >= collar_low[k] + inner[k] {
                    marked = true;
                }
            }
            for f in &faces {
                match *f {
                    Face::Low(k) => marked |= idx[k] <= collar_low[k],
                    Face::High(k) => marked |= idx[k] + 1 >= collar_low[k] + inner[k],
                }
            }
            dom.dirichlet[node] = marked;
        }
        Ok(dom)
    }

    /// A box domain given directly by node counts, without Dirichlet layer.
    pub fn from_extents(
        dim: usize,
        origin: &[f64],
        extents: &[usize],
        spacing: f64,
    ) -> Result<Self> {
        check_dim(dim)?;
        if extents.len() != dim || extents.iter().any(|&n| n < 2) {
            return Err(Error::InvalidDomain("every extent must be at least 2".into()));
        }
        let lengths: Vec<f64> = extents.iter().map(|&n| (n - 1) as f64 * spacing).collect();
        let d = build_domain(dim, origin, &lengths, spacing, &DirichletRegion::None)?;
        if d.extents[..dim] != extents[..] {
            return Err(Error::InvalidDomain("extent round-off mismatch".into()));
        }
        Ok(d)
    }

    /// Deactivates every node for which `keep` returns false.
    ///
    /// Dirichlet flags of removed nodes are cleared.
    pub fn with_active_mask(mut self, keep: impl Fn(&[f64]) -> bool) -> Result<Self> {
        for node in 0..self.len() {
            let p = self.position(node);
            if !keep(&p[..self.dim]) {
                self.active[node] = false;
                self.dirichlet[node] = false;
            }
        }
        if !self.active.iter().any(|a| *a) {
            return Err(Error::InvalidDomain("active set is empty".into()));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.dim]
    }

    /// Number of nodes (active or not).
    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active[node]
    }

    pub fn is_dirichlet(&self, node: usize) -> bool {
        self.dirichlet[node]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.dirichlet[n]).collect()
    }

    pub fn active_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.active[n]).collect()
    }

    /// Number of collar layers added below and above along `axis`.
    pub fn collar(&self, axis: usize) -> (usize, usize) {
        (self.collar_low[axis], self.collar_high[axis])
    }

    /// Lower corner and side lengths of the box the lattice was built for
    /// (excluding any collar).
    pub fn inner_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = Vec::with_capacity(self.dim);
        let mut len = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            lo.push(self.origin[k] + self.collar_low[k] as f64 * self.spacing);
            let n = self.extents[k] - self.collar_low[k] - self.collar_high[k];
            len.push((n - 1) as f64 * self.spacing);
        }
        (lo, len)
    }

    pub fn index_of(&self, idx: &NodeIndex) -> usize {
        (0..self.dim).map(|k| idx.0[k] * self.strides[k]).sum()
    }

    pub fn multi_index(&self, node: usize) -> NodeIndex {
        let mut out = [0usize; MAX_DIM];
        let mut rem = node;
        for k in 0..self.dim {
            out[k] = rem / self.strides[k];
            rem %= self.strides[k];
        }
        NodeIndex(out)
    }

    pub fn position(&self, node: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(node);
        let mut p = [0.0; MAX_DIM];
        for k in 0..self.dim {
            p[k] = self.origin[k] + self.spacing * idx.0[k] as f64;
        }
        p
    }

    /// Flat index of `node + steps·ξ`, if it lies on the lattice (active or not).
    pub fn shift(&self, node: usize, xi: &LatticeVector, steps: i32) -> Option<usize> {
        let idx = self.multi_index(node);
        let mut flat = 0usize;
        for k in 0..self.dim {
            let j = idx.0[k] as i64 + xi[k] as i64 * steps as i64;
            if j < 0 || j >= self.extents[k] as i64 {
                return None;
            }
            flat += j as usize * self.strides[k];
        }
        Some(flat)
    }

    /// Like [`shift`](Self::shift) but only returns active targets.
    pub fn active_shift(&self, node: usize, xi: &LatticeVector, steps: i32) -> Option<usize> {
        self.shift(node, xi, steps).filter(|&n| self.active[n])
    }

    /// Segment test `[α − δξ, α + δξ] ⊂ A` on the lattice: every lattice point
    /// of the segment must be an active node of `A`.
    fn segment_inside(&self, node: usize, xi: &LatticeVector, subset: Option<&NodeMask>) -> bool {
        let inside = |n: usize| self.active[n] && subset.is_none_or(|s| s.contains(n));
        if !inside(node) {
            return false;
        }
        let g = xi[..self.dim]
            .iter()
            .fold(0i32, |acc, &c| gcd(acc, c.abs()))
            .max(1);
        let step: LatticeVector = [xi[0] / g, xi[1] / g, xi[2] / g];
        for j in 1..=g {
            for s in [-1, 1] {
                match self.shift(node, &step, s * j) {
                    Some(n) if inside(n) => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// `R_δ^ξ(Ω)`: active nodes whose segment `[α − δξ, α + δξ]` stays in the domain.
    pub fn range_nodes(&self, xi: &LatticeVector) -> Vec<usize> {
        self.range_nodes_in(xi, None)
    }

    /// `R_δ^ξ(A)` for a node subset `A` (localized energies).
    pub fn range_nodes_in(&self, xi: &LatticeVector, subset: Option<&NodeMask>) -> Vec<usize> {
        assert!(xi.iter().any(|c| *c != 0), "range_nodes needs a nonzero direction");
        (0..self.len())
            .filter(|&n| self.segment_inside(n, xi, subset))
            .collect()
    }

    /// Membership form of [`range_nodes_in`](Self::range_nodes_in).
    pub fn in_range(&self, node: usize, xi: &LatticeVector, subset: Option<&NodeMask>) -> bool {
        self.segment_inside(node, xi, subset)
    }

    /// `R_δ^div(Ω) = ∩_i R_δ^{e_i}(Ω)`.
    pub fn range_div(&self) -> Vec<usize> {
        self.range_div_in(None)
    }

    pub fn range_div_in(&self, subset: Option<&NodeMask>) -> Vec<usize> {
        (0..self.len())
            .filter(|&n| self.in_range_div(n, subset))
            .collect()
    }

    pub fn in_range_div(&self, node: usize, subset: Option<&NodeMask>) -> bool {
        (0..self.dim).all(|k| self.segment_inside(node, &unit(k), subset))
    }

    pub(crate) fn check_scalar(&self, f: &ScalarField) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::DomainMismatch {
                expected: self.len(),
                found: f.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_vector(&self, f: &VectorField) -> Result<()> {
        if f.dim() != self.dim || f.node_count() != self.len() {
            return Err(Error::DomainMismatch {
                expected: self.len() * self.dim,
                found: f.as_slice().len(),
            });
        }
        Ok(())
    }
}

/// The canonical basis vector `e_k`.
pub fn unit(k: usize) -> LatticeVector {
    let mut v = [0; MAX_DIM];
    v[k] = 1;
    v
}

pub fn norm_sq(xi: &LatticeVector) -> i32 {
    xi.iter().map(|c| c * c).sum()
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn strides_for(dim: usize, extents: &[usize; MAX_DIM]) -> [usize; MAX_DIM] {
    let mut s = [0usize; MAX_DIM];
    let mut acc = 1;
    for k in (0..dim).rev() {
        s[k] = acc;
        acc *= extents[k];
    }
    s
}
