//! Recovery pairs `(u_ε, v_ε)` for targets with a planar crack on `{x_d = c}`.
//!
//! The displacement is cut off in a thin tube around the crack,
//! `u_ε = u(1 − φ_ε)`, and the phase field follows the one-dimensional
//! optimal profile across the crack plane:
//! `v_ε(x) = ψ_ε(x') h_ε(|x_d − c|) + 1 − ψ_ε(x')`.
//!
//! Tubes, with `r_δ = √d·δ`:
//!
//! | set  | tangential         | normal                      |
//! |------|--------------------|-----------------------------|
//! | `B`  | `K_{ε/2}`          | `γ/2`                       |
//! | `B'` | `K_ε`              | `γ`                         |
//! | `A`  | `K_{ε + r_δ}`      | `γ + r_δ`                   |
//! | `A'` | `K_{2ε + r_δ}`     | `γ + r_δ + εT`              |

use crate::energy::{f_div, f_total, EnergyParams, GriffithReference};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, ScalarField, VectorField};
use crate::quadrature::adaptive_simpson;
use serde::{Deserialize, Serialize};

/// Planar crack `K ⊂ {x_d = level}`; `K = Π_k [lo_k, hi_k]` in the first `d−1`
/// coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrackGeometry {
    pub level: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CrackGeometry {
    pub fn new(level: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(Error::InvalidParams("crack extent needs d−1 ∈ {1,2} bounds".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(b > a)) || !level.is_finite() {
            return Err(Error::InvalidParams("crack must have positive measure".into()));
        }
        Ok(CrackGeometry { level, lo, hi })
    }

    /// A crack cutting straight through the box at height `level`.
    pub fn full_width(origin: &[f64], lengths: &[f64], level: f64) -> Result<Self> {
        let d = origin.len();
        let lo = origin[..d - 1].to_vec();
        let hi = (0..d - 1).map(|k| origin[k] + lengths[k]).collect();
        CrackGeometry::new(level, lo, hi)
    }

    /// Euclidean distance from the tangential coordinates `x'` to `K`.
    pub fn tangential_distance(&self, x_tan: &[f64]) -> f64 {
        x_tan
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (lo, hi))| {
                let d = if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `H^{d−1}(K ∩ box)`.
    pub fn measure_within(&self, box_lo: &[f64], box_hi: &[f64]) -> f64 {
        let d = box_lo.len();
        if self.level <= box_lo[d - 1] || self.level >= box_hi[d - 1] {
            return 0.0;
        }
        (0..d - 1)
            .map(|k| (self.hi[k].min(box_hi[k]) - self.lo[k].max(box_lo[k])).max(0.0))
            .product()
    }
}

/// Smooth 1D profile with `f(0) = 0`, `f = 1` on `[T, ∞)` and
/// `∫₀^T (f−1)² + f'² ≤ 1 + η`.
///
/// Built from `1 − e^{−t}` on `[0, T−1]`, then a quintic Hermite patch on
/// `[T−1, T]` matching value, slope and curvature at both ends, with
/// `T = −2 ln(η/8)`.
#[derive(Clone, Debug)]
pub struct OptimalProfile {
    eta: f64,
    support: f64,
    // patch coefficients of f − 1 in s = t − (T − 1), degree 0..=5
    patch: [f64; 6],
    integral: f64,
}

const CERT_TOL: f64 = 1e-10;

/// Builds and certifies the profile for slack `η ∈ (0, 1)`.
pub fn build_profile(eta: f64) -> Result<OptimalProfile> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParams(format!("eta must lie in (0,1), got {eta}")));
    }
    let support = -2.0 * (eta / 8.0).ln();
    let a = (-(support - 1.0)).exp();
    // f − 1 = −e^{−t}: value −a, slope a, curvature −a at s = 0; zero jet at s = 1
    let (p0, p1, p2) = (-a, a, -a);
    let h0 = [1.0, 0.0, 0.0, -10.0, 15.0, -6.0];
    let h1 = [0.0, 1.0, 0.0, -6.0, 8.0, -3.0];
    let h2 = [0.0, 0.0, 0.5, -1.5, 1.5, -0.5];
    let mut patch = [0.0; 6];
    for i in 0..6 {
        patch[i] = p0 * h0[i] + p1 * h1[i] + p2 * h2[i];
    }
    let mut profile = OptimalProfile { eta, support, patch, integral: f64::NAN };
    let integrand = |t: f64| {
        let (f, df) = profile.eval_with_slope(t);
        (f - 1.0).powi(2) + df * df
    };
    let head = adaptive_simpson(&integrand, 0.0, support - 1.0, CERT_TOL / 2.0)?;
    let tail = adaptive_simpson(&integrand, support - 1.0, support, CERT_TOL / 2.0)?;
    let integral = head + tail;
    if !(integral + CERT_TOL <= 1.0 + eta) {
        return Err(Error::Certification(format!(
            "∫(f−1)² + f'² = {integral} exceeds 1 + η = {}",
            1.0 + eta
        )));
    }
    profile.integral = integral;
    Ok(profile)
}

impl OptimalProfile {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `T_η`, beyond which the profile equals 1.
    pub fn support(&self) -> f64 {
        self.support
    }

    /// The certified value of `∫₀^T (f−1)² + f'²`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_slope(t).0
    }

    /// `(f(t), f'(t))`.
    pub fn eval_with_slope(&self, t: f64) -> (f64, f64) {
        let start = self.support - 1.0;
        if t <= 0.0 {
            (0.0, if t == 0.0 { 1.0 } else { 0.0 })
        } else if t < start {
            let e = (-t).exp();
            (1.0 - e, e)
        } else if t < self.support {
            let s = t - start;
            let mut p = 0.0;
            let mut dp = 0.0;
            for i in (0..6).rev() {
                p = p * s + self.patch[i];
            }
            for i in (1..6).rev() {
                dp = dp * s + i as f64 * self.patch[i];
            }
            (1.0 + p, dp)
        } else {
            (1.0, 0.0)
        }
    }

    /// Second derivative, used to check the `C²` junctions.
    pub fn curvature(&self, t: f64) -> f64 {
        let start = self.support - 1.0;
        if t < start {
            -(-t).exp()
        } else if t < self.support {
            let s = t - start;
            let mut ddp = 0.0;
            for i in (2..6).rev() {
                ddp = ddp * s + (i * (i - 1)) as f64 * self.patch[i];
            }
            ddp
        } else {
            0.0
        }
    }
}

/// `γ_ε = coeff · ε^exponent`; any positive exponent above 1 keeps `γ_ε/ε → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRule {
    pub coeff: f64,
    pub exponent: f64,
}

impl Default for GammaRule {
    fn default() -> Self {
        GammaRule { coeff: 1.0, exponent: 2.0 }
    }
}

impl GammaRule {
    pub fn gamma(&self, eps: f64) -> f64 {
        self.coeff * eps.powf(self.exponent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub eta: f64,
    #[serde(default)]
    pub gamma: GammaRule,
    /// Permits cracks whose tube reaches `∂Ω` (e.g. a crack across the full box).
    #[serde(default)]
    pub allow_boundary_crack: bool,
    /// Translation `y ∈ [0,1)^d`: the displacement is sampled at `α + δy`.
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
}

impl RecoveryOptions {
    pub fn new(eta: f64) -> Self {
        RecoveryOptions {
            eta,
            gamma: GammaRule::default(),
            allow_boundary_crack: false,
            shift: None,
        }
    }
}

/// The recovery pair together with the construction constants.
#[derive(Clone, Debug)]
pub struct RecoveryPair {
    pub u: VectorField,
    pub v: ScalarField,
    pub gamma: f64,
    pub collar: f64,
    pub profile: OptimalProfile,
}

/// Smooth step: 1 for `r ≤ inner`, 0 for `r ≥ outer`, `C^∞` in between.
pub fn smooth_step(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner {
        return 1.0;
    }
    if r >= outer {
        return 0.0;
    }
    let s = (r - inner) / (outer - inner);
    let bump = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = bump(1.0 - s);
    a / (a + bump(s))
}

/// Builds `(u_ε, v_ε)` on `domain` for the target `reference`, whose crack
/// must be set. `v_ε` is clamped to `[0, 1]`.
pub fn build_recovery(
    domain: &LatticeDomain,
    reference: &GriffithReference,
    params: &EnergyParams,
    opts: &RecoveryOptions,
) -> Result<RecoveryPair> {
    let crack = reference
        .crack
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("recovery needs a crack".into()))?;
    let d = domain.dim();
    if reference.dim != d || crack.lo.len() != d - 1 {
        return Err(Error::InvalidParams("target and lattice dimensions differ".into()));
    }
    let delta = domain.spacing();
    let eps = params.eps;
    if !(delta < eps) {
        return Err(Error::InvalidParams(format!(
            "recovery needs δ < ε (δ = {delta}, ε = {eps})"
        )));
    }
    let profile = build_profile(opts.eta)?;
    let gamma = opts.gamma.gamma(eps);
    if !(gamma > 0.0) {
        return Err(Error::InvalidParams("γ_ε must be positive".into()));
    }
    let collar = (d as f64).sqrt() * delta;
    let t_layer = gamma + collar;
    let t_outer = t_layer + eps * profile.support();

    if !opts.allow_boundary_crack {
        let lo = &reference.origin;
        let hi = reference.box_hi();
        let reach = 2.0 * eps + collar;
        let mut inside = crack.level - t_outer > lo[d - 1] && crack.level + t_outer < hi[d - 1];
        for k in 0..d - 1 {
            inside &= crack.lo[k] - reach > lo[k] && crack.hi[k] + reach < hi[k];
        }
        if !inside {
            return Err(Error::InvalidParams(
                "crack tube A'_ε is not compactly contained in the domain".into(),
            ));
        }
    }

    let shift: Vec<f64> = match &opts.shift {
        Some(y) if y.len() == d => y.clone(),
        Some(_) => return Err(Error::InvalidParams("shift needs d components".into())),
        None => vec![0.0; d],
    };

    let h = |t: f64| {
        if t < t_layer {
            0.0
        } else if t <= t_outer {
            profile.eval((t - t_layer) / eps)
        } else {
            1.0
        }
    };
    let cutoff_u = |x: &[f64]| {
        let tan = crack.tangential_distance(&x[..d - 1]);
        let nor = (x[d - 1] - crack.level).abs();
        smooth_step(tan, eps / 2.0, eps) * smooth_step(nor, gamma / 2.0, gamma)
    };

    let u = VectorField::from_fn(domain, |x| {
        let y: Vec<f64> = x.iter().zip(&shift).map(|(x, s)| x + delta * s).collect();
        let val = reference.value(&y);
        let keep = 1.0 - cutoff_u(&y);
        [val[0] * keep, val[1] * keep, val[2] * keep]
    });
    let v = ScalarField::from_fn(domain, |x| {
        let psi = smooth_step(
            crack.tangential_distance(&x[..d - 1]),
            eps + collar,
            2.0 * eps + collar,
        );
        let t = (x[d - 1] - crack.level).abs();
        (psi * h(t) + 1.0 - psi).clamp(0.0, 1.0)
    });
    Ok(RecoveryPair { u, v, gamma, collar, profile })
}

/// `v̄ = min(v, 1)` nodewise.
pub fn clamp_min_one(v: &ScalarField) -> ScalarField {
    v.clamp_max_one()
}

/// Elastic part `λF(ū,1) + θF^div(ū,1)` for every translation `y` on the
/// `3^d` grid `{0, 1/3, 2/3}^d`; returns the best `y` and its value.
pub fn best_translation(
    domain: &LatticeDomain,
    reference: &GriffithReference,
    params: &EnergyParams,
    opts: &RecoveryOptions,
) -> Result<(Vec<f64>, f64)> {
    let d = domain.dim();
    let dirs = params.directions(d)?;
    let one = ScalarField::constant(domain, 1.0);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(d as u32) {
        let y: Vec<f64> = (0..d).map(|k| ((code / 3usize.pow(k as u32)) % 3) as f64 / 3.0).collect();
        let mut o = opts.clone();
        o.shift = Some(y.clone());
        let pair = build_recovery(domain, reference, params, &o)?;
        let e = params.lambda * f_total(domain, &pair.u, &one, &dirs, None)?
            + params.theta * f_div(domain, &pair.u, &one, None)?;
        if best.as_ref().is_none_or(|(_, b)| e < *b) {
            best = Some((y, e));
        }
    }
    Ok(best.expect("grid is nonempty"))
}
