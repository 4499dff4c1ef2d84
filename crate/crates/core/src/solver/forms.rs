//! Matrix-free bond forms for the two substeps.

use crate::energy::{divergences_at, pair_sq_at, EnergyParams, Variant};
use crate::error::Result;
use crate::lattice::{norm_sq, unit, LatticeDomain, ScalarField, VectorField, MAX_DIM};
use crate::operators::{negate, negative_part, positive_part};

struct Bond {
    a: usize,
    b: usize,
    g: [f64; MAX_DIM],
    w: f64,
}

struct DivSite {
    node: usize,
    fwd: [usize; MAX_DIM],
    bwd: [usize; MAX_DIM],
    w_plus: f64,
    w_minus: f64,
}

/// `Σ_bonds w⟨u(b) − u(a), ξ/|ξ|²⟩² + Σ_sites Σ_s (w₊(Div_s⁺)² + w₋(Div_s⁻)²)`,
/// i.e. `λF(·, v) + θF^div(·, v)` (or its NI counterpart) as a function of `u`.
pub(crate) struct ElasticForm {
    dim: usize,
    bonds: Vec<Bond>,
    sites: Vec<DivSite>,
}

impl ElasticForm {
    pub fn new(domain: &LatticeDomain, v: &ScalarField, params: &EnergyParams) -> Result<Self> {
        let d = domain.dim();
        let dirs = params.directions(d)?;
        let scale_el = 0.5 * domain.spacing().powi(d as i32 - 2) * params.lambda;
        let scale_div = domain.spacing().powi(d as i32 - 2) / (1u32 << d) as f64 * params.theta;
        let mut bonds = Vec::new();
        for xi in dirs.vectors() {
            let w0 = scale_el * dirs.weight(xi);
            let l2 = norm_sq(xi) as f64;
            for node in domain.range_nodes(xi) {
                let w = w0 * v.get(node).powi(2);
                for x in [*xi, negate(xi)] {
                    let b = domain.shift(node, &x, 1).expect("range node");
                    let g = [x[0] as f64 / l2, x[1] as f64 / l2, x[2] as f64 / l2];
                    bonds.push(Bond { a: node, b, g, w });
                }
            }
        }
        let ni = params.variant == Variant::Ni;
        let sites = domain
            .range_div()
            .into_iter()
            .map(|node| {
                let mut fwd = [0; MAX_DIM];
                let mut bwd = [0; MAX_DIM];
                for k in 0..d {
                    fwd[k] = domain.shift(node, &unit(k), 1).expect("range node");
                    bwd[k] = domain.shift(node, &unit(k), -1).expect("range node");
                }
                let wv = scale_div * v.get(node).powi(2);
                DivSite { node, fwd, bwd, w_plus: wv, w_minus: if ni { scale_div } else { wv } }
            })
            .collect();
        Ok(ElasticForm { dim: d, bonds, sites })
    }

    fn site_divs(&self, s: &DivSite, u: &[f64]) -> [f64; 8] {
        let d = self.dim;
        let mut out = [0.0; 8];
        for (bits, slot) in out.iter_mut().enumerate().take(1 << d) {
            let mut acc = 0.0;
            for k in 0..d {
                acc += if bits >> k & 1 == 1 {
                    u[s.fwd[k] * d + k] - u[s.node * d + k]
                } else {
                    u[s.node * d + k] - u[s.bwd[k] * d + k]
                };
            }
            *slot = acc;
        }
        out
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let d = self.dim;
        let mut total = 0.0;
        for b in &self.bonds {
            let p: f64 = (0..d).map(|k| (u[b.b * d + k] - u[b.a * d + k]) * b.g[k]).sum();
            total += b.w * p * p;
        }
        for s in &self.sites {
            for x in &self.site_divs(s, u)[..1 << d] {
                total += s.w_plus * positive_part(*x).powi(2) + s.w_minus * negative_part(*x).powi(2);
            }
        }
        total
    }

    /// Gradient of [`value`](Self::value); for the quadratic variants this is
    /// the operator `A u` with `value = ½⟨Au, u⟩`.
    pub fn gradient(&self, u: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|x| *x = 0.0);
        for b in &self.bonds {
            let p: f64 = (0..d).map(|k| (u[b.b * d + k] - u[b.a * d + k]) * b.g[k]).sum();
            let c = 2.0 * b.w * p;
            for k in 0..d {
                out[b.b * d + k] += c * b.g[k];
                out[b.a * d + k] -= c * b.g[k];
            }
        }
        for s in &self.sites {
            let divs = self.site_divs(s, u);
            for (bits, x) in divs[..1 << d].iter().enumerate() {
                let c = 2.0 * (s.w_plus * positive_part(*x) - s.w_minus * negative_part(*x));
                if c == 0.0 {
                    continue;
                }
                for k in 0..d {
                    if bits >> k & 1 == 1 {
                        out[s.fwd[k] * d + k] += c;
                        out[s.node * d + k] -= c;
                    } else {
                        out[s.node * d + k] += c;
                        out[s.bwd[k] * d + k] -= c;
                    }
                }
            }
        }
    }
}

/// `Σ_α a_α v_α² + G_ε(v)` as a quadratic in `v`.
pub(crate) struct PhaseForm {
    pub diag: Vec<f64>,
    edges: Vec<(usize, usize)>,
    mass: f64,
    stiff: f64,
}

impl PhaseForm {
    pub fn new(domain: &LatticeDomain, u: &VectorField, params: &EnergyParams) -> Result<Self> {
        let d = domain.dim();
        let dirs = params.directions(d)?;
        let h = domain.spacing();
        let scale_el = 0.5 * h.powi(d as i32 - 2) * params.lambda;
        let scale_div = h.powi(d as i32 - 2) / (1u32 << d) as f64 * params.theta;
        let ni = params.variant == Variant::Ni;
        let diag = (0..domain.len())
            .map(|n| {
                let mut a = 0.0;
                for xi in dirs.vectors() {
                    if let Some(p) = pair_sq_at(domain, u, n, xi, None) {
                        a += scale_el * dirs.weight(xi) * p;
                    }
                }
                if let Some((divs, c)) = divergences_at(domain, u, n, None) {
                    let s: f64 = divs[..c]
                        .iter()
                        .map(|x| if ni { positive_part(*x).powi(2) } else { x * x })
                        .sum();
                    a += scale_div * s;
                }
                a
            })
            .collect();
        let mut edges = Vec::new();
        for n in 0..domain.len() {
            if !domain.is_active(n) {
                continue;
            }
            for k in 0..d {
                if let Some(m) = domain.active_shift(n, &unit(k), 1) {
                    edges.push((n, m));
                }
            }
        }
        Ok(PhaseForm {
            diag,
            edges,
            mass: h.powi(d as i32) / params.eps,
            stiff: params.eps * h.powi(d as i32 - 2),
        })
    }

    /// `(2a + δ^d/ε) x + εδ^{d−2} L x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (2.0 * self.diag[i] + self.mass) * x[i];
        }
        for &(a, b) in &self.edges {
            let t = self.stiff * (x[a] - x[b]);
            out[a] += t;
            out[b] -= t;
        }
    }

    /// Right-hand side `δ^d/ε`.
    pub fn rhs(&self) -> f64 {
        self.mass
    }
}
