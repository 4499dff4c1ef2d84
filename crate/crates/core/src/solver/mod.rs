//! Alternate minimization of the discrete energies.
//!
//! At fixed `v` the plain and Dirichlet energies are quadratic in `u`, and at
//! fixed `u` every variant is quadratic in `v`; both substeps are solved by
//! conjugate gradients with pinned nodes eliminated. The NI energy is only
//! `C¹` in `u` and is minimized over `‖u‖_∞ ≤ M` by projected gradient descent.

mod cg;
mod forms;

use crate::energy::{energy, EnergyBreakdown, EnergyParams, Variant};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, ScalarField, VectorField};
use crate::reduce::{self, Reduction};
use cg::conjugate_gradient;
use forms::{ElasticForm, PhaseForm};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Stop when the relative decrease of one outer iteration falls below this.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub ni_max_iter: usize,
    /// Relative decrease threshold of the projected-gradient loop.
    pub ni_tol: f64,
    /// Projected-gradient norm threshold of the projected-gradient loop.
    pub ni_grad_tol: f64,
    pub deterministic: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            outer_tol: 1e-8,
            max_outer: 100,
            cg_tol: 1e-12,
            cg_max_iter: 20_000,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            ni_max_iter: 50_000,
            ni_tol: 1e-16,
            ni_grad_tol: 1e-11,
            deterministic: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.outer_tol, self.cg_tol, self.armijo, self.ni_grad_tol];
        if positive.iter().any(|x| !(*x > 0.0)) || self.ni_tol < 0.0 {
            return Err(Error::InvalidParams("solver tolerances must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) || self.armijo >= 1.0 {
            return Err(Error::InvalidParams("line search needs 0 < c < 1 and 0 < β < 1".into()));
        }
        if self.max_outer == 0 || self.cg_max_iter == 0 || self.ni_max_iter == 0 || self.max_backtracks == 0 {
            return Err(Error::InvalidParams("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Breakdown at the start and after every outer iteration.
    pub trace: Vec<EnergyBreakdown>,
    pub converged: bool,
    pub outer_iterations: usize,
    pub cg_iterations: usize,
    pub ni_iterations: usize,
    /// Substeps discarded because they would have raised the energy.
    pub rejected_substeps: usize,
    pub wall_clock_s: f64,
}

/// Nodes the substeps may change: active, and off the Dirichlet layer when pinned.
fn free_nodes(domain: &LatticeDomain, pin_dirichlet: bool) -> Vec<bool> {
    (0..domain.len())
        .map(|n| domain.is_active(n) && !(pin_dirichlet && domain.is_dirichlet(n)))
        .collect()
}

fn expand(mask: &[bool], comps: usize) -> Vec<bool> {
    mask.iter().flat_map(|&m| std::iter::repeat_n(m, comps)).collect()
}

fn with_datum(domain: &LatticeDomain, u: &VectorField, datum: Option<&VectorField>) -> Result<VectorField> {
    let mut out = u.clone();
    if let Some(datum) = datum {
        out.copy_dirichlet_from(domain, datum)?;
    }
    Ok(out)
}

/// Minimizes `λF(·, v) + θF^div(·, v)` over `u`, starting from `u_init`.
///
/// With a datum, Dirichlet nodes are set to it and held fixed; inactive
/// nodes are never changed. Returns the minimizer and the CG iteration count.
pub fn minimize_u(
    domain: &LatticeDomain,
    v: &ScalarField,
    params: &EnergyParams,
    u_init: &VectorField,
    datum: Option<&VectorField>,
    config: &SolverConfig,
) -> Result<(VectorField, usize)> {
    params.validate()?;
    domain.check_scalar(v)?;
    domain.check_vector(u_init)?;
    if params.variant == Variant::Ni {
        return Err(Error::InvalidParams("minimize_u handles the plain and dirichlet variants".into()));
    }
    if params.variant == Variant::Dirichlet && datum.is_none() {
        return Err(Error::InvalidParams("variant dirichlet requires a boundary datum".into()));
    }
    let form = ElasticForm::new(domain, v, params)?;
    let free = expand(&free_nodes(domain, datum.is_some()), domain.dim());
    let mut x = with_datum(domain, u_init, datum)?.as_slice().to_vec();
    let b = vec![0.0; x.len()];
    let iters = conjugate_gradient(|p, out| form.gradient(p, out), &b, &mut x, &free, config.cg_tol, config.cg_max_iter)?;
    Ok((VectorField::from_values(domain.dim(), x)?, iters))
}

/// Minimizes the energy over `v` at fixed `u`, then clamps to `[0, 1]`.
/// With `pin_dirichlet`, `v = 1` on the Dirichlet layer.
pub fn minimize_v(
    domain: &LatticeDomain,
    u: &VectorField,
    params: &EnergyParams,
    pin_dirichlet: bool,
    config: &SolverConfig,
) -> Result<(ScalarField, usize)> {
    params.validate()?;
    domain.check_vector(u)?;
    let form = PhaseForm::new(domain, u, params)?;
    let free = free_nodes(domain, pin_dirichlet);
    let mut x = vec![1.0; domain.len()];
    let b: Vec<f64> = free.iter().map(|&f| if f { form.rhs() } else { 0.0 }).collect();
    let iters = conjugate_gradient(|p, out| form.apply(p, out), &b, &mut x, &free, config.cg_tol, config.cg_max_iter)?;
    let worst = x.iter().map(|v| (v - v.clamp(0.0, 1.0)).abs()).fold(0.0, f64::max);
    if worst > 1e-10 {
        log::warn!("v-substep left [0,1] by {worst:.3e} before clamping");
    }
    Ok((ScalarField::from_values(x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()), iters))
}

/// Projection onto `{|u(α)| ≤ M}` node by node, exact in floating point.
fn project_ball(u: &mut [f64], dim: usize, m: f64, free: &[bool]) {
    for (node, chunk) in u.chunks_mut(dim).enumerate() {
        if !free[node * dim] {
            continue;
        }
        let norm = chunk.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= m {
            continue;
        }
        if m == 0.0 {
            chunk.iter_mut().for_each(|x| *x = 0.0);
            continue;
        }
        let mut s = m / norm;
        loop {
            let trial: Vec<f64> = chunk.iter().map(|x| x * s).collect();
            if trial.iter().map(|x| x * x).sum::<f64>().sqrt() <= m {
                chunk.copy_from_slice(&trial);
                break;
            }
            s *= 1.0 - f64::EPSILON;
        }
    }
}

/// Minimizes `λF(·, v) + θF^{div,NI}(·, v)` over `‖u‖_∞ ≤ M` by projected
/// gradient descent with Barzilai–Borwein trial steps and Armijo backtracking.
///
/// A datum pins the Dirichlet layer as in [`minimize_u`]. Returns the result
/// and the number of accepted steps.
pub fn minimize_u_ni(
    domain: &LatticeDomain,
    v: &ScalarField,
    params: &EnergyParams,
    u_init: &VectorField,
    datum: Option<&VectorField>,
    config: &SolverConfig,
) -> Result<(VectorField, usize)> {
    params.validate()?;
    domain.check_scalar(v)?;
    domain.check_vector(u_init)?;
    let m = match (params.variant, params.max_norm) {
        (Variant::Ni, Some(m)) => m,
        _ => return Err(Error::InvalidParams("minimize_u_ni needs variant ni with max_norm".into())),
    };
    let d = domain.dim();
    let form = ElasticForm::new(domain, v, params)?;
    let free = expand(&free_nodes(domain, datum.is_some()), d);
    let mut u = with_datum(domain, u_init, datum)?.as_slice().to_vec();
    for (node, chunk) in u.chunks(d).enumerate() {
        if !free[node * d] && chunk.iter().map(|x| x * x).sum::<f64>().sqrt() > m {
            return Err(Error::InvalidParams(format!("pinned node {node} violates ‖u‖ ≤ M")));
        }
    }
    project_ball(&mut u, d, m, &free);

    let masked_grad = |x: &[f64], out: &mut [f64]| {
        form.gradient(x, out);
        for (g, f) in out.iter_mut().zip(&free) {
            if !f {
                *g = 0.0;
            }
        }
    };
    let mut g = vec![0.0; u.len()];
    masked_grad(&u, &mut g);
    let mut j = form.value(&u);
    let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut step = if gnorm > 0.0 { 1.0 / gnorm.max(1.0) } else { 1.0 };
    let mut accepted = 0;
    let mut trial = vec![0.0; u.len()];
    let mut g_new = vec![0.0; u.len()];
    for _ in 0..config.ni_max_iter {
        // stationarity: projected gradient step of unit length
        for i in 0..u.len() {
            trial[i] = u[i] - g[i];
        }
        project_ball(&mut trial, d, m, &free);
        let pg = trial.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if pg <= config.ni_grad_tol {
            break;
        }
        let mut t = step;
        let mut found = false;
        let mut j_new = j;
        for _ in 0..config.max_backtracks {
            for i in 0..u.len() {
                trial[i] = u[i] - t * g[i];
            }
            project_ball(&mut trial, d, m, &free);
            let descent: f64 = (0..u.len()).map(|i| g[i] * (trial[i] - u[i])).sum();
            j_new = form.value(&trial);
            if j_new <= j + config.armijo * descent && j_new <= j {
                found = true;
                break;
            }
            t *= config.backtrack;
        }
        if !found {
            let moved = trial.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if moved <= 1e-14 * (1.0 + u.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
                break;
            }
            return Err(Error::Solver("Armijo line search failed".into()));
        }
        masked_grad(&trial, &mut g_new);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..u.len() {
            let s = trial[i] - u[i];
            ss += s * s;
            sy += s * (g_new[i] - g[i]);
        }
        step = if sy > 0.0 { ss / sy } else { 2.0 * t };
        let decrease = j - j_new;
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        j = j_new;
        accepted += 1;
        if decrease <= config.ni_tol * j.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok((VectorField::from_values(d, u)?, accepted))
}

fn total_of(b: &EnergyBreakdown) -> f64 {
    b.total_value().unwrap_or(f64::INFINITY)
}

/// Staggered minimization: u-substep, then v-substep, until the relative
/// decrease of an outer iteration is below `config.outer_tol`.
///
/// The datum is required for [`Variant::Dirichlet`] and optional for
/// [`Variant::Ni`]; it fixes `u` and `v = 1` on the Dirichlet layer.
/// A substep that would raise the energy is discarded and logged.
pub fn alternate_minimize(
    domain: &LatticeDomain,
    params: &EnergyParams,
    u0: &VectorField,
    v0: &ScalarField,
    datum: Option<&VectorField>,
    config: &SolverConfig,
) -> Result<(VectorField, ScalarField, SolveReport)> {
    params.validate()?;
    config.validate()?;
    let previous_mode = reduce::mode();
    if config.deterministic {
        reduce::set_mode(Reduction::Deterministic);
    }
    let result = alternate_inner(domain, params, u0, v0, datum, config);
    reduce::set_mode(previous_mode);
    result
}

fn alternate_inner(
    domain: &LatticeDomain,
    params: &EnergyParams,
    u0: &VectorField,
    v0: &ScalarField,
    datum: Option<&VectorField>,
    config: &SolverConfig,
) -> Result<(VectorField, ScalarField, SolveReport)> {
    let start = Instant::now();
    let datum = match params.variant {
        Variant::Dirichlet => Some(datum.ok_or_else(|| {
            Error::InvalidParams("variant dirichlet requires a boundary datum".into())
        })?),
        Variant::Ni => datum,
        Variant::Plain => None,
    };
    let pin = datum.is_some();
    let mut u = with_datum(domain, u0, datum)?;
    let mut v = v0.clone();
    domain.check_scalar(&v)?;
    if pin {
        v.apply_dirichlet(domain)?;
    }
    let eval = |u: &VectorField, v: &ScalarField| energy(domain, u, v, params, datum);
    let mut current = eval(&u, &v)?;
    if !current.admissible {
        return Err(Error::InvalidParams("initial pair is not admissible".into()));
    }
    let mut report = SolveReport {
        trace: vec![current.clone()],
        converged: false,
        outer_iterations: 0,
        cg_iterations: 0,
        ni_iterations: 0,
        rejected_substeps: 0,
        wall_clock_s: 0.0,
    };
    for outer in 1..=config.max_outer {
        let before = total_of(&current);
        let (u_new, its) = match params.variant {
            Variant::Ni => {
                let (u_new, its) = minimize_u_ni(domain, &v, params, &u, datum, config)?;
                report.ni_iterations += its;
                (u_new, its)
            }
            _ => {
                let (u_new, its) = minimize_u(domain, &v, params, &u, datum, config)?;
                report.cg_iterations += its;
                (u_new, its)
            }
        };
        let trial = eval(&u_new, &v)?;
        if total_of(&trial) <= total_of(&current) {
            u = u_new;
            current = trial;
        } else {
            report.rejected_substeps += 1;
            log::info!("outer {outer}: u-substep rejected after {its} iterations ({} > {})", total_of(&trial), total_of(&current));
        }
        let (v_new, its) = minimize_v(domain, &u, params, pin, config)?;
        report.cg_iterations += its;
        let trial = eval(&u, &v_new)?;
        if total_of(&trial) <= total_of(&current) {
            v = v_new;
            current = trial;
        } else {
            report.rejected_substeps += 1;
            log::info!("outer {outer}: v-substep rejected ({} > {})", total_of(&trial), total_of(&current));
        }
        report.trace.push(current.clone());
        report.outer_iterations = outer;
        let after = total_of(&current);
        let rel = (before - after) / before.abs().max(f64::MIN_POSITIVE);
        log::debug!("outer {outer}: total {after:.12e}, relative decrease {rel:.3e}");
        if rel < config.outer_tol {
            report.converged = true;
            break;
        }
    }
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok((u, v, report))
}

/// Default initialization: `u` equal to the datum on the Dirichlet layer and
/// to the nearest datum value elsewhere (zero without a datum), `v ≡ 1`.
pub fn default_init(domain: &LatticeDomain, datum: Option<&VectorField>) -> (VectorField, ScalarField) {
    let d = domain.dim();
    let mut u = VectorField::zeros(domain);
    if let Some(datum) = datum {
        let layer: Vec<(usize, [f64; 3])> = domain.dirichlet_nodes().into_iter().map(|n| (n, domain.position(n))).collect();
        if !layer.is_empty() {
            for n in 0..domain.len() {
                let x = domain.position(n);
                let nearest = layer
                    .iter()
                    .min_by(|a, b| {
                        let da: f64 = (0..d).map(|k| (a.1[k] - x[k]).powi(2)).sum();
                        let db: f64 = (0..d).map(|k| (b.1[k] - x[k]).powi(2)).sum();
                        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .map(|(m, _)| *m)
                    .expect("nonempty layer");
                let src = datum.node(nearest).to_vec();
                u.node_mut(n).copy_from_slice(&src);
            }
        }
    }
    (u, ScalarField::constant(domain, 1.0))
}
