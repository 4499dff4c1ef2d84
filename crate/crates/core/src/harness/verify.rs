//! Self-check suites with a machine-readable report.

use crate::energy::{f_div, f_div_ni, lattice_sum, EnergyParams, IdentityCoefficients, SymMatrix, Variant};
use crate::error::{Error, Result};
use crate::interpolation::{freudenthal, locate, pw_affine_vector};
use crate::lattice::{
    build_domain, build_extended_domain, direction_set, norm_sq, DirectionSet, DirichletRegion, Face, Kernel,
    ScalarField, VectorField,
};
use crate::recovery::build_profile;
use crate::solver::{alternate_minimize, default_init, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SUITES: [&str; 5] = ["matrix1", "split", "freudenthal", "profile", "monotone"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    /// Largest observed error of the suite's comparisons.
    pub max_error: f64,
    pub tolerance: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

struct Tally {
    checks: usize,
    failures: usize,
    max_error: f64,
    tolerance: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new(tolerance: f64) -> Self {
        Tally { checks: 0, failures: 0, max_error: 0.0, tolerance, notes: Vec::new() }
    }

    fn error(&mut self, err: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if err.is_finite() {
            self.max_error = self.max_error.max(err);
        }
        if !(err <= self.tolerance) {
            self.failures += 1;
            if self.notes.len() < 5 {
                self.notes.push(what());
            }
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < 5 {
                self.notes.push(what());
            }
        }
    }

    fn finish(self, name: &str, summary: &str) -> SuiteResult {
        let passed = self.failures == 0;
        let message = if passed { summary.to_string() } else { self.notes.join("; ") };
        SuiteResult {
            name: name.into(),
            passed,
            checks: self.checks,
            failures: self.failures,
            max_error: self.max_error,
            tolerance: self.tolerance,
            message,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn random_sym(rng: &mut impl Rng, dim: usize) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in i..dim {
            let x = rng.gen_range(-2.0..2.0);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    m
}

fn random_vector(rng: &mut impl Rng, n: usize, d: usize, amp: f64) -> VectorField {
    VectorField::from_values(d, (0..n * d).map(|_| rng.gen_range(-amp..amp)).collect()).expect("sized")
}

fn matrix1(rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut t = Tally::new(1e-12);
    for d in [2, 3] {
        let default = direction_set(d)?;
        for _ in 0..100 {
            let m = SymMatrix::new(d, random_sym(rng, d))?;
            let kernel = Kernel { s1: rng.gen_range(0.1..2.0), s2: rng.gen_range(0.1..2.0), s3: rng.gen_range(0.1..2.0) };
            let dirs = DirectionSet::new(d, kernel)?;
            let lhs = lattice_sum(&m, &dirs);
            let rhs = IdentityCoefficients::enumerated(&kernel, d).closed_form(&m);
            t.error(rel(lhs, rhs), || format!("d={d} random kernel: {lhs} vs {rhs}"));
            if d == 2 {
                let lhs = lattice_sum(&m, &default);
                let rhs = m.norm_sq() + 0.5 * m.trace().powi(2);
                t.error(rel(lhs, rhs), || format!("d=2 default kernel: {lhs} vs {rhs}"));
            }
        }
    }
    Ok(t.finish("matrix1", "lattice sum matches the closed form over the enumerated direction set"))
}

fn split(rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut t = Tally::new(1e-14);
    for d in [2, 3] {
        let n = if d == 2 { 9 } else { 5 };
        let dom = build_domain(d, &vec![0.0; d], &vec![1.0; d], 1.0 / (n - 1) as f64, &DirichletRegion::None)?;
        let one = ScalarField::constant(&dom, 1.0);
        for _ in 0..50 {
            let u = random_vector(rng, dom.len(), d, 1.0);
            let a = f_div_ni(&dom, &u, &one)?;
            let b = f_div(&dom, &u, &one, None)?;
            t.error(rel(a, b), || format!("d={d}: {a} vs {b}"));
        }
    }
    Ok(t.finish("split", "F_div_ni(u,1) = F_div(u,1)"))
}

fn freudenthal_suite(rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut t = Tally::new(1e-12);
    for d in [2, 3] {
        let simplices = freudenthal(d)?;
        let fact: usize = (1..=d).product();
        t.check(simplices.len() == fact, || format!("d={d}: {} simplices", simplices.len()));
        let vol: i64 = simplices.iter().map(|s| s.volume_numerator()).sum();
        t.check(vol == fact as i64, || format!("d={d}: volume numerators sum to {vol}"));
        let mut uncovered = 0;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            if !simplices[locate(&x)].contains(&x, 1e-12) {
                uncovered += 1;
            }
        }
        t.check(uncovered == 0, || format!("d={d}: {uncovered} uncovered points"));

        let dom = build_domain(d, &vec![0.0; d], &vec![1.0; d], 0.2, &DirichletRegion::None)?;
        let u = random_vector(rng, dom.len(), d, 1.0);
        let p = pw_affine_vector(&dom, &u)?;
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s = p.sample(&x)?;
            let e = p.sym_gradient(&x)?;
            let nodes = p.simplex_nodes(s.cell, s.simplex);
            for (i, j, edge) in p.simplices()[s.simplex].edges() {
                let len = (norm_sq(&edge) as f64).sqrt();
                let nu: Vec<f64> = edge[..d].iter().map(|c| *c as f64 / len).collect();
                let mut lhs = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        lhs += e[a][b] * nu[a] * nu[b];
                    }
                }
                let rhs = (0..d).map(|k| (u.node(nodes[j])[k] - u.node(nodes[i])[k]) * nu[k]).sum::<f64>()
                    / (len * dom.spacing());
                t.error((lhs - rhs).abs() / (1.0 + rhs.abs()), || format!("d={d} edge identity: {lhs} vs {rhs}"));
            }
        }
    }
    Ok(t.finish("freudenthal", "d! simplices, unit volume, full cover, edge identity"))
}

fn profile() -> Result<SuiteResult> {
    let mut t = Tally::new(1e-10);
    let p = build_profile(0.1)?;
    t.check(p.integral() <= 1.1, || format!("integral {} exceeds 1.1", p.integral()));
    t.error((p.eval(0.0)).abs(), || format!("f(0) = {}", p.eval(0.0)));
    t.error((p.eval(p.support()) - 1.0).abs(), || "f(T) ≠ 1".into());
    Ok(t.finish("profile", &format!("∫(f−1)²+f'² = {:.12} ≤ 1.1", p.integral())))
}

fn monotone(rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut t = Tally::new(1e-12);
    let d = build_extended_domain(
        2,
        &[0.0, 0.0],
        &[1.0, 0.5],
        1.0 / 12.0,
        &DirichletRegion::Faces(vec![Face::Low(0), Face::High(0)]),
        1,
    )?;
    for variant in [Variant::Dirichlet, Variant::Dirichlet, Variant::Ni] {
        let s = rng.gen_range(0.05..1.0);
        let datum = VectorField::from_fn(&d, |x| [if x[0] < 0.5 { -s / 2.0 } else { s / 2.0 }, 0.0, 0.0]);
        let params = EnergyParams::new(1.0, 1.0, 0.15).with_variant(variant).with_max_norm(1.0);
        let (u0, _) = default_init(&d, Some(&datum));
        let v0 = ScalarField::from_values((0..d.len()).map(|_| rng.gen_range(0.0..1.0)).collect());
        let cfg = SolverConfig { max_outer: 20, ..SolverConfig::default() };
        let (u, v, report) = alternate_minimize(&d, &params, &u0, &v0, Some(&datum), &cfg)?;
        for w in report.trace.windows(2) {
            let (a, b) = (w[0].total_value().unwrap_or(f64::INFINITY), w[1].total_value().unwrap_or(f64::INFINITY));
            t.error((b - a).max(0.0), || format!("{variant:?}: trace rises from {a} to {b}"));
        }
        let pinned = d.dirichlet_nodes().into_iter().all(|n| u.node(n) == datum.node(n) && v.get(n) == 1.0);
        t.check(pinned, || format!("{variant:?}: Dirichlet layer moved"));
    }
    Ok(t.finish("monotone", "staggered traces are nonincreasing and pinned nodes stay fixed"))
}

/// Runs the selected suites (all when `selectors` is empty or contains `all`).
/// An unknown selector is an error; a failing suite is a report entry.
pub fn run_verify(selectors: &[String], seed: u64) -> Result<VerifyReport> {
    let mut chosen: Vec<&str> = Vec::new();
    for s in selectors {
        if s == "all" {
            chosen.extend(SUITES);
        } else if let Some(name) = SUITES.iter().find(|n| **n == s.as_str()) {
            chosen.push(name);
        } else {
            return Err(Error::Config(format!(
                "unknown verify suite \"{s}\" (known: {})",
                SUITES.join(", ")
            )));
        }
    }
    if chosen.is_empty() {
        chosen.extend(SUITES);
    }
    let mut seen = std::collections::HashSet::new();
    chosen.retain(|n| seen.insert(*n));

    let mut suites = Vec::new();
    for name in &chosen {
        // per-suite streams, independent of which other suites run
        let k = SUITES.iter().position(|n| n == name).expect("known suite");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let result = match *name {
            "matrix1" => matrix1(&mut rng),
            "split" => split(&mut rng),
            "freudenthal" => freudenthal_suite(&mut rng),
            "profile" => profile(),
            "monotone" => monotone(&mut rng),
            _ => unreachable!("selector validated"),
        };
        suites.push(result.unwrap_or_else(|e| SuiteResult {
            name: name.to_string(),
            passed: false,
            checks: 0,
            failures: 1,
            max_error: f64::NAN,
            tolerance: f64::NAN,
            message: format!("suite aborted: {e}"),
        }));
    }
    Ok(VerifyReport { passed: suites.iter().all(|s| s.passed), seed, suites })
}
