//! Discrete energies on the lattice.
//!
//! With `D`, `Div` the stencils of [`crate::operators`]:
//!
//! * `F^ξ(u,v)   = ½ Σ_{α∈R^ξ} δ^{d−2} v(α)² |D_{δ,ξ}u(α)|²`
//! * `F(u,v)     = Σ_{ξ∈S_d} σ_{|ξ|} F^ξ(u,v)`
//! * `F^div(u,v) = 2^{−d} Σ_{α∈R^div} δ^{d−2} v(α)² |Div_δ u(α)|²`
//! * `F^{div,NI}(u,v)` replaces `|Div|²` by `v²|Div⁺|² + |Div⁻|²`
//! * `G(v)       = ½ Σ_α δ^d ((v−1)²/ε + ε Σ_k (Δ_k v/δ)²)`
//!
//! and the totals `λF + θF^div + G` (plain and Dirichlet) or
//! `λF + θF^{div,NI} + G` subject to `‖u‖_∞ ≤ M`.

mod griffith;
mod identity;

pub use griffith::{griffith_eval, Displacement, GriffithReference, Region};
pub use identity::{lattice_sum, quadratic_form_identity, IdentityCoefficients, SymMatrix};

use crate::error::{Error, Result};
use crate::lattice::{
    unit, DirectionSet, Kernel, LatticeDomain, LatticeVector, NodeMask, ScalarField,
    VectorField, MAX_DIM,
};
use crate::operators::{negate, negative_part, positive_part, projected_difference};
use crate::reduce::sum_range;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Dirichlet,
    Ni,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub lambda: f64,
    pub theta: f64,
    pub eps: f64,
    /// Bound on `‖u‖_∞` for the non-interpenetration variant.
    #[serde(default)]
    pub max_norm: Option<f64>,
    pub variant: Variant,
    /// Overrides the default kernel weights of the direction set.
    #[serde(default)]
    pub kernel: Option<Kernel>,
}

impl EnergyParams {
    pub fn new(lambda: f64, theta: f64, eps: f64) -> Self {
        EnergyParams {
            lambda,
            theta,
            eps,
            max_norm: None,
            variant: Variant::Plain,
            kernel: None,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_max_norm(mut self, m: f64) -> Self {
        self.max_norm = Some(m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("theta", self.theta), ("eps", self.eps)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        match (self.variant, self.max_norm) {
            (Variant::Ni, None) => Err(Error::InvalidParams("variant ni requires max_norm".into())),
            (_, Some(m)) if !(m >= 0.0) => Err(Error::InvalidParams(format!("max_norm must be ≥ 0, got {m}"))),
            _ => Ok(()),
        }
    }

    pub fn directions(&self, dim: usize) -> Result<DirectionSet> {
        match self.kernel {
            Some(k) => DirectionSet::new(dim, k),
            None => crate::lattice::direction_set(dim),
        }
    }
}

/// A total energy, or the tag for a pair outside the admissible class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyValue {
    Finite(f64),
    Infinite,
}

impl EnergyValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            EnergyValue::Finite(x) => Some(x),
            EnergyValue::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, EnergyValue::Finite(_))
    }
}

impl Serialize for EnergyValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EnergyValue::Finite(x) => s.serialize_some(x),
            EnergyValue::Infinite => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for EnergyValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match Option::<f64>::deserialize(d)? {
            Some(x) => EnergyValue::Finite(x),
            None => EnergyValue::Infinite,
        })
    }
}

/// Itemized energy. `total` is `null` in JSON when the pair is inadmissible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub f_elastic_raw: f64,
    pub f_div_raw: f64,
    pub g_mm: f64,
    pub lambda: f64,
    pub theta: f64,
    pub total: EnergyValue,
    pub admissible: bool,
}

impl EnergyBreakdown {
    /// `λ·F`.
    pub fn f_elastic(&self) -> f64 {
        self.lambda * self.f_elastic_raw
    }

    /// `θ·F^div` (or `θ·F^{div,NI}`).
    pub fn f_div(&self) -> f64 {
        self.theta * self.f_div_raw
    }

    pub fn total_value(&self) -> Option<f64> {
        self.total.finite()
    }
}

fn check_fields(domain: &LatticeDomain, u: Option<&VectorField>, v: Option<&ScalarField>) -> Result<()> {
    if let Some(u) = u {
        domain.check_vector(u)?;
    }
    if let Some(v) = v {
        domain.check_scalar(v)?;
    }
    Ok(())
}

/// `|D_{δ,ξ}u(α)|²` if `α ∈ R^ξ(A)`.
#[inline]
pub(crate) fn pair_sq_at(
    domain: &LatticeDomain,
    u: &VectorField,
    node: usize,
    xi: &LatticeVector,
    subset: Option<&NodeMask>,
) -> Option<f64> {
    if !domain.in_range(node, xi, subset) {
        return None;
    }
    let fwd = domain.shift(node, xi, 1)?;
    let bwd = domain.shift(node, xi, -1)?;
    let p = projected_difference(u, node, fwd, xi);
    let m = projected_difference(u, node, bwd, &negate(xi));
    Some(p * p + m * m)
}

/// Directed divergences at `α` if `α ∈ R^div(A)`, for all sign patterns.
#[inline]
pub(crate) fn divergences_at(
    domain: &LatticeDomain,
    u: &VectorField,
    node: usize,
    subset: Option<&NodeMask>,
) -> Option<([f64; 8], usize)> {
    if !domain.in_range_div(node, subset) {
        return None;
    }
    let d = domain.dim();
    let mut fwd = [0.0; MAX_DIM];
    let mut bwd = [0.0; MAX_DIM];
    let here = u.node(node);
    for i in 0..d {
        let e = unit(i);
        let f = domain.shift(node, &e, 1)?;
        let b = domain.shift(node, &e, -1)?;
        fwd[i] = u.node(f)[i] - here[i];
        bwd[i] = here[i] - u.node(b)[i];
    }
    let count = 1usize << d;
    let mut out = [0.0; 8];
    for (bits, slot) in out.iter_mut().enumerate().take(count) {
        // same ordering as SignPattern::all: bit (d−1−k) set ⇔ k_k = +1
        let mut s = 0.0;
        for k in 0..d {
            s += if bits >> (d - 1 - k) & 1 == 1 { fwd[k] } else { bwd[k] };
        }
        *slot = s;
    }
    Some((out, count))
}

fn dpow(delta: f64, p: i32) -> f64 {
    delta.powi(p)
}

/// `F^ξ(u, v)` over `R^ξ(Ω)` or `R^ξ(A)`.
pub fn f_xi(
    domain: &LatticeDomain,
    u: &VectorField,
    v: &ScalarField,
    xi: &LatticeVector,
    subset: Option<&NodeMask>,
) -> Result<f64> {
    check_fields(domain, Some(u), Some(v))?;
    let scale = 0.5 * dpow(domain.spacing(), domain.dim() as i32 - 2);
    let s = sum_range(domain.len(), |n| match pair_sq_at(domain, u, n, xi, subset) {
        Some(p) => v.get(n).powi(2) * p,
        None => 0.0,
    });
    Ok(scale * s)
}

/// `F(u, v) = Σ_ξ σ_{|ξ|} F^ξ(u, v)`.
pub fn f_total(
    domain: &LatticeDomain,
    u: &VectorField,
    v: &ScalarField,
    dirs: &DirectionSet,
    subset: Option<&NodeMask>,
) -> Result<f64> {
    let mut total = 0.0;
    for xi in dirs.vectors() {
        total += dirs.weight(xi) * f_xi(domain, u, v, xi, subset)?;
    }
    Ok(total)
}

/// `F^div(u, v)`.
pub fn f_div(domain: &LatticeDomain, u: &VectorField, v: &ScalarField, subset: Option<&NodeMask>) -> Result<f64> {
    check_fields(domain, Some(u), Some(v))?;
    let d = domain.dim();
    let scale = dpow(domain.spacing(), d as i32 - 2) / (1u32 << d) as f64;
    let s = sum_range(domain.len(), |n| match divergences_at(domain, u, n, subset) {
        Some((divs, c)) => v.get(n).powi(2) * divs[..c].iter().map(|x| x * x).sum::<f64>(),
        None => 0.0,
    });
    Ok(scale * s)
}

/// `F^{div+}(u, v)`: the positive parts, weighted by `v²`.
pub fn f_div_plus(domain: &LatticeDomain, u: &VectorField, v: &ScalarField) -> Result<f64> {
    check_fields(domain, Some(u), Some(v))?;
    let d = domain.dim();
    let scale = dpow(domain.spacing(), d as i32 - 2) / (1u32 << d) as f64;
    let s = sum_range(domain.len(), |n| match divergences_at(domain, u, n, None) {
        Some((divs, c)) => v.get(n).powi(2) * divs[..c].iter().map(|x| positive_part(*x).powi(2)).sum::<f64>(),
        None => 0.0,
    });
    Ok(scale * s)
}

/// `F^{div−}(u)`: the negative parts, not weighted by the phase field.
pub fn f_div_minus(domain: &LatticeDomain, u: &VectorField) -> Result<f64> {
    check_fields(domain, Some(u), None)?;
    let d = domain.dim();
    let scale = dpow(domain.spacing(), d as i32 - 2) / (1u32 << d) as f64;
    let s = sum_range(domain.len(), |n| match divergences_at(domain, u, n, None) {
        Some((divs, c)) => divs[..c].iter().map(|x| negative_part(*x).powi(2)).sum::<f64>(),
        None => 0.0,
    });
    Ok(scale * s)
}

/// `F^{div,NI}(u, v) = F^{div+}(u, v) + F^{div−}(u)`.
pub fn f_div_ni(domain: &LatticeDomain, u: &VectorField, v: &ScalarField) -> Result<f64> {
    Ok(f_div_plus(domain, u, v)? + f_div_minus(domain, u)?)
}

/// Per-node summand of `G` (without the `½δ^d` prefactor folded in).
#[inline]
pub(crate) fn g_node(domain: &LatticeDomain, v: &ScalarField, n: usize, eps: f64, subset: Option<&NodeMask>) -> f64 {
    let inside = |m: usize| domain.is_active(m) && subset.is_none_or(|s| s.contains(m));
    if !inside(n) {
        return 0.0;
    }
    let delta = domain.spacing();
    let vn = v.get(n);
    let mut grad = 0.0;
    for k in 0..domain.dim() {
        if let Some(m) = domain.shift(n, &unit(k), 1) {
            if inside(m) {
                grad += ((v.get(m) - vn) / delta).powi(2);
            }
        }
    }
    (vn - 1.0).powi(2) / eps + eps * grad
}

/// Discrete Modica–Mortola term `G_ε(v)`.
pub fn g_mm(domain: &LatticeDomain, v: &ScalarField, eps: f64, subset: Option<&NodeMask>) -> Result<f64> {
    check_fields(domain, None, Some(v))?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
    }
    let scale = 0.5 * dpow(domain.spacing(), domain.dim() as i32);
    Ok(scale * sum_range(domain.len(), |n| g_node(domain, v, n, eps, subset)))
}

/// Dirichlet admissibility: `u = u_0` and `v = 1` on the Dirichlet layer, exactly.
pub fn dirichlet_admissible(
    domain: &LatticeDomain,
    u: &VectorField,
    v: &ScalarField,
    datum: &VectorField,
) -> bool {
    domain
        .dirichlet_nodes()
        .into_iter()
        .all(|n| v.get(n) == 1.0 && u.node(n) == datum.node(n))
}

/// Evaluates the total energy of the chosen variant.
///
/// `datum` is the sampled boundary displacement, required for
/// [`Variant::Dirichlet`] and ignored otherwise.
pub fn energy(
    domain: &LatticeDomain,
    u: &VectorField,
    v: &ScalarField,
    params: &EnergyParams,
    datum: Option<&VectorField>,
) -> Result<EnergyBreakdown> {
    params.validate()?;
    check_fields(domain, Some(u), Some(v))?;
    let dirs = params.directions(domain.dim())?;
    let f_el = f_total(domain, u, v, &dirs, None)?;
    let g = g_mm(domain, v, params.eps, None)?;
    let (f_dv, admissible) = match params.variant {
        Variant::Plain => (f_div(domain, u, v, None)?, true),
        Variant::Dirichlet => {
            let datum = datum.ok_or_else(|| {
                Error::InvalidParams("variant dirichlet requires a boundary datum".into())
            })?;
            domain.check_vector(datum)?;
            (f_div(domain, u, v, None)?, dirichlet_admissible(domain, u, v, datum))
        }
        Variant::Ni => {
            let m = params.max_norm.expect("validated");
            (f_div_ni(domain, u, v)?, u.max_norm() <= m)
        }
    };
    let total = if admissible {
        EnergyValue::Finite(params.lambda * f_el + params.theta * f_dv + g)
    } else {
        EnergyValue::Infinite
    };
    Ok(EnergyBreakdown {
        f_elastic_raw: f_el,
        f_div_raw: f_dv,
        g_mm: g,
        lambda: params.lambda,
        theta: params.theta,
        total,
        admissible,
    })
}
