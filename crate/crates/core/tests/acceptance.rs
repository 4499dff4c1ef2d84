//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero on any unexpected failure.
//!
//! Criterion 1 has a known failure in `d = 3`: with the 13 directions of `S_3`
//! the direct lattice sum carries half the `|ξ| = √3` contribution of the
//! printed closed form. The criterion is evaluated as stated and reported as
//! FAIL; the run only treats it as expected when the mismatch is exactly that
//! factor (the lattice sum agrees with the enumerated coefficients).

use latfrac::energy::{
    energy, f_div, f_div_minus, f_div_ni, f_total, g_mm, lattice_sum, EnergyParams, IdentityCoefficients, SymMatrix, Variant,
};
use latfrac::interpolation::{freudenthal, pw_affine_vector, Simplex};
use latfrac::lattice::{
    build_domain, build_extended_domain, direction_set, norm_sq, DirectionSet, DirichletRegion, Face, Kernel,
    LatticeDomain, ScalarField, VectorField,
};
use latfrac::energy::{Displacement, GriffithReference};
use latfrac::recovery::{build_profile, build_recovery, CrackGeometry, RecoveryOptions};
use latfrac::solver::{alternate_minimize, default_init, minimize_u, minimize_u_ni, SolverConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::time::Instant;

enum Status {
    Pass,
    Fail,
    /// Fails as stated, for the documented reason only.
    KnownFail,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn pass_if(ok: bool, detail: String) -> Outcome {
    Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn unit_box(dim: usize, h: f64) -> LatticeDomain {
    build_domain(dim, &vec![0.0; dim], &vec![1.0; dim], h, &DirichletRegion::None).unwrap()
}

fn random_sym(rng: &mut impl Rng, dim: usize) -> SymMatrix {
    let mut m = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in i..dim {
            let x = rng.gen_range(-2.0..2.0);
            m[i][j] = x;
            m[j][i] = x;
        }
    }
    SymMatrix::new(dim, m).unwrap()
}

fn random_vector(rng: &mut impl Rng, d: &LatticeDomain, amp: f64) -> VectorField {
    VectorField::from_values(d.dim(), (0..d.len() * d.dim()).map(|_| rng.gen_range(-amp..amp)).collect()).unwrap()
}

fn random_scalar(rng: &mut impl Rng, d: &LatticeDomain, lo: f64) -> ScalarField {
    ScalarField::from_values((0..d.len()).map(|_| rng.gen_range(lo..1.0)).collect())
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let tol = 1e-12;
    let mut worst = [[0.0f64; 2]; 2]; // [d index][default, random kernel]
    let mut enumerated_worst = 0.0f64;
    let mut sqrt3_gap_worst = 0.0f64;
    for (di, d) in [2usize, 3].into_iter().enumerate() {
        let default = direction_set(d).unwrap();
        for _ in 0..100 {
            let m = random_sym(&mut rng, d);
            let lhs = lattice_sum(&m, &default);
            let rhs = m.norm_sq() + 0.5 * m.trace().powi(2);
            worst[di][0] = worst[di][0].max(rel(lhs, rhs));

            let kernel = Kernel { s1: rng.gen_range(0.1..2.0), s2: rng.gen_range(0.1..2.0), s3: rng.gen_range(0.1..2.0) };
            let dirs = DirectionSet::new(d, kernel).unwrap();
            let lhs = lattice_sum(&m, &dirs);
            let printed = IdentityCoefficients::new(&kernel, d).closed_form(&m);
            worst[di][1] = worst[di][1].max(rel(lhs, printed));

            if d == 3 {
                let enumerated = IdentityCoefficients::enumerated(&kernel, d).closed_form(&m);
                enumerated_worst = enumerated_worst.max(rel(lhs, enumerated));
                // printed − lattice must equal the √3 terms counted once more
                let only3 = Kernel { s1: 0.0, s2: 0.0, s3: kernel.s3 };
                let extra = IdentityCoefficients::enumerated(&only3, d).closed_form(&m);
                sqrt3_gap_worst = sqrt3_gap_worst.max(((printed - lhs) - extra).abs() / printed.abs().max(1.0));
            }
        }
    }
    let d2_ok = worst[0][0] <= tol && worst[0][1] <= tol;
    let d3_ok = worst[1][0] <= tol && worst[1][1] <= tol;
    let detail = format!(
        "d=2 max rel err {:.1e}/{:.1e}; d=3 max rel err {:.1e}/{:.1e} (default σ / closed form); \
         d=3 lattice sum vs enumerated coefficients {:.1e}, residual after the √3 double count {:.1e}",
        worst[0][0], worst[0][1], worst[1][0], worst[1][1], enumerated_worst, sqrt3_gap_worst
    );
    let status = if d2_ok && d3_ok {
        Status::Pass
    } else if d2_ok && enumerated_worst <= tol && sqrt3_gap_worst <= 1e-11 {
        Status::KnownFail
    } else {
        Status::Fail
    };
    Outcome { status, detail }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst_last = 0.0f64;
    let mut worst_order = f64::INFINITY;
    for _ in 0..5 {
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (lambda, theta) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let e12 = 0.5 * (a[1] + a[2]);
        let sym = a[0] * a[0] + a[3] * a[3] + 2.0 * e12 * e12;
        let div = a[0] + a[3];
        let density = lambda * (sym + 0.5 * div * div) + theta * div * div;
        let params = EnergyParams::new(lambda, theta, 0.1);
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let h = 1.0 / n as f64;
            let dom = unit_box(2, h);
            let u = VectorField::from_fn(&dom, |x| [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1], 0.0]);
            let b = energy(&dom, &u, &ScalarField::constant(&dom, 1.0), &params, None).unwrap();
            let interior = dom.range_div().len() as f64 * h * h;
            errs.push((b.total_value().unwrap() / interior - density).abs() / density);
        }
        worst_last = worst_last.max(errs[2]);
        for w in errs.windows(2) {
            worst_order = worst_order.min((w[0] / w[1]).log2());
        }
    }
    pass_if(
        worst_last <= 0.05 && worst_order >= 0.8,
        format!("rel err at δ=1/64 ≤ {worst_last:.3e}, observed order ≥ {worst_order:.2}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for (d, n) in [(2, 9), (3, 5)] {
        let dom = unit_box(d, 1.0 / (n - 1) as f64);
        let one = ScalarField::constant(&dom, 1.0);
        for _ in 0..50 {
            let u = random_vector(&mut rng, &dom, 1.0);
            worst = worst.max(rel(f_div_ni(&dom, &u, &one).unwrap(), f_div(&dom, &u, &one, None).unwrap()));
        }
    }
    pass_if(worst <= 1e-14, format!("max rel err {worst:.1e} over 100 fields"))
}

fn dense_barycentric(t: &Simplex, x: &[f64]) -> Vec<f64> {
    let d = t.dim();
    let mut a = DMatrix::zeros(d + 1, d + 1);
    let mut b = DVector::zeros(d + 1);
    for (j, v) in t.vertices().iter().enumerate() {
        for k in 0..d {
            a[(k, j)] = v[k] as f64;
        }
        a[(d, j)] = 1.0;
    }
    for k in 0..d {
        b[k] = x[k];
    }
    b[d] = 1.0;
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut notes = Vec::new();
    let mut ok = true;
    let mut edge_worst = 0.0f64;
    for d in [2usize, 3] {
        let s = freudenthal(d).unwrap();
        let fact: usize = (1..=d).product();
        let vol: i64 = s.iter().map(|t| t.volume_numerator()).sum();
        let mut uncovered = 0;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            if !s.iter().any(|t| dense_barycentric(t, &x).iter().all(|l| *l >= -1e-12)) {
                uncovered += 1;
            }
        }
        ok &= s.len() == fact && vol == fact as i64 && uncovered == 0;
        notes.push(format!("d={d}: {} simplices, volume {vol}/{fact}, {uncovered} uncovered", s.len()));

        let dom = unit_box(d, 0.2);
        let u = random_vector(&mut rng, &dom, 1.0);
        let p = pw_affine_vector(&dom, &u).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
            let smp = p.sample(&x).unwrap();
            let e = p.sym_gradient(&x).unwrap();
            let nodes = p.simplex_nodes(smp.cell, smp.simplex);
            for (i, j, edge) in p.simplices()[smp.simplex].edges() {
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
                edge_worst = edge_worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
            }
        }
    }
    ok &= edge_worst <= 1e-12;
    notes.push(format!("edge identity max err {edge_worst:.1e}"));
    pass_if(ok, notes.join("; "))
}

fn criterion_5() -> Outcome {
    match build_profile(0.1) {
        Ok(p) => pass_if(p.integral() <= 1.1, format!("certified ∫(f−1)²+f'² = {:.12}", p.integral())),
        Err(e) => pass_if(false, e.to_string()),
    }
}

fn criterion_6() -> Outcome {
    let params = |eps: f64| EnergyParams::new(1.0, 1.0, eps);
    let mut totals = Vec::new();
    for eps in [0.1, 0.07, 0.05] {
        let delta = eps * eps;
        let dom = unit_box(2, delta);
        let crack = CrackGeometry::full_width(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap();
        let target = GriffithReference::split(
            2,
            &[0.0, 0.0],
            &[1.0, 1.0],
            crack,
            Displacement::constant([0.0; 3]),
            Displacement::constant([0.0, 1.0, 0.0]),
        );
        let mut opts = RecoveryOptions::new(0.1);
        opts.allow_boundary_crack = true;
        let pair = build_recovery(&dom, &target, &params(eps), &opts).unwrap();
        let b = energy(&dom, &pair.u, &pair.v, &params(eps), None).unwrap();
        totals.push(b.total_value().unwrap());
    }
    let in_window = totals.iter().all(|t| (0.85..=1.25).contains(t));
    let gaps: Vec<f64> = totals.iter().map(|t| (t - 1.0).abs()).collect();
    let trend = gaps.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    pass_if(
        in_window && trend,
        format!("totals {:.4} / {:.4} / {:.4} at ε = 0.1 / 0.07 / 0.05", totals[0], totals[1], totals[2]),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut rises = 0;
    let mut worst_rise = 0.0f64;
    let mut pin_failures = 0;
    let mut outer = 0;
    for k in 0..20 {
        let width = rng.gen_range(0.3..0.6);
        let h = 1.0 / [12.0, 16.0, 20.0][rng.gen_range(0..3)];
        let dom = build_extended_domain(
            2,
            &[0.0, 0.0],
            &[1.0, width],
            h,
            &DirichletRegion::Faces(vec![Face::Low(0), Face::High(0)]),
            1,
        )
        .unwrap();
        let t = rng.gen_range(0.05..2.0);
        let shear = rng.gen_range(-0.2..0.2);
        let datum = VectorField::from_fn(&dom, |x| {
            let s = if x[0] < 0.5 { -0.5 } else { 0.5 };
            [s * t, s * shear * t, 0.0]
        });
        let variant = if k % 4 == 3 { Variant::Ni } else { Variant::Dirichlet };
        let params = EnergyParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(2.0 * h..0.3))
            .with_variant(variant)
            .with_max_norm(t);
        let (u0, _) = default_init(&dom, Some(&datum));
        let v0 = random_scalar(&mut rng, &dom, 0.0);
        let cfg = SolverConfig { max_outer: 40, ..SolverConfig::default() };
        let (u, v, report) = alternate_minimize(&dom, &params, &u0, &v0, Some(&datum), &cfg).unwrap();
        outer += report.outer_iterations;
        for w in report.trace.windows(2) {
            let rise = w[1].total_value().unwrap() - w[0].total_value().unwrap();
            worst_rise = worst_rise.max(rise);
            if rise > 1e-12 {
                rises += 1;
            }
        }
        let pinned = dom.dirichlet_nodes().into_iter().all(|n| u.node(n) == datum.node(n) && v.get(n) == 1.0);
        if !pinned {
            pin_failures += 1;
        }
    }
    pass_if(
        rises == 0 && pin_failures == 0,
        format!("20 instances, {outer} outer iterations, max trace increase {worst_rise:.1e}, {pin_failures} pinning failures"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst = 0.0f64;
    let mut feasible = true;
    let mut inactive = true;
    let cfg = SolverConfig::default();
    for _ in 0..4 {
        let dom = build_extended_domain(2, &[0.0, 0.0], &[1.0, 1.0], 1.0 / 10.0, &DirichletRegion::FullBoundary, 1).unwrap();
        // expansion: positive diagonal dominating a small shear
        let (a, b, s) = (rng.gen_range(0.1..0.4), rng.gen_range(0.1..0.4), rng.gen_range(-0.05..0.05));
        let datum = VectorField::from_fn(&dom, |x| [a * x[0] + s * x[1], s * x[0] + b * x[1], 0.0]);
        let mut v = random_scalar(&mut rng, &dom, 0.6);
        v.apply_dirichlet(&dom).unwrap();
        let m = rng.gen_range(1.0..2.0);
        let quad = EnergyParams::new(1.0, 1.0, 0.1).with_variant(Variant::Dirichlet);
        let ni = EnergyParams::new(1.0, 1.0, 0.1).with_variant(Variant::Ni).with_max_norm(m);
        let (u_q, _) = minimize_u(&dom, &v, &quad, &VectorField::zeros(&dom), Some(&datum), &cfg).unwrap();
        // precondition: no compressed site at the quadratic minimizer
        inactive &= f_div_minus(&dom, &u_q).unwrap() == 0.0;
        let (u_n, _) = minimize_u_ni(&dom, &v, &ni, &VectorField::zeros(&dom), Some(&datum), &cfg).unwrap();
        feasible &= u_n.max_norm() <= m;
        let err = u_q.as_slice().iter().zip(u_n.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    // feasibility with an active bound
    let dom = unit_box(2, 1.0 / 8.0);
    for _ in 0..3 {
        let m = rng.gen_range(0.05..0.3);
        let ni = EnergyParams::new(1.0, 1.0, 0.1).with_variant(Variant::Ni).with_max_norm(m);
        let v = random_scalar(&mut rng, &dom, 0.0);
        let u = random_vector(&mut rng, &dom, m / 2.0);
        let (out, _) = minimize_u_ni(&dom, &v, &ni, &u, None, &cfg).unwrap();
        feasible &= out.max_norm() <= m;
    }
    pass_if(
        worst <= 1e-6 && feasible && inactive,
        format!("max nodal diff {worst:.1e}, negative parts inactive: {inactive}, ‖u‖∞ ≤ M on output: {feasible}"),
    )
}

// Double loops straight from the formulas, with their own direction lists.
struct Naive {
    dim: usize,
    n: i64,
    h: f64,
}

impl Naive {
    fn flat(&self, a: &[i64]) -> Option<usize> {
        let mut f = 0usize;
        for &i in a {
            if !(0..self.n).contains(&i) {
                return None;
            }
            f = f * self.n as usize + i as usize;
        }
        Some(f)
    }

    fn nodes(&self) -> Vec<Vec<i64>> {
        let n = self.n;
        match self.dim {
            2 => (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).collect(),
            _ => (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| vec![i, j, k]))).collect(),
        }
    }

    fn directions(&self) -> Vec<(Vec<i64>, f64)> {
        if self.dim == 2 {
            vec![(vec![1, 0], 1.0), (vec![0, 1], 1.0), (vec![1, 1], 1.0), (vec![1, -1], 1.0)]
        } else {
            let mut out = vec![(vec![1, 0, 0], 0.75), (vec![0, 1, 0], 0.75), (vec![0, 0, 1], 0.75)];
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                for s in [1, -1] {
                    let mut x = vec![0; 3];
                    x[a] = 1;
                    x[b] = s;
                    out.push((x, 0.5));
                }
            }
            for (s, t) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                out.push((vec![1, s, t], 9.0 / 32.0));
            }
            out
        }
    }

    fn f(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.dim;
        let mut total = 0.0;
        for (xi, sigma) in self.directions() {
            let l2: f64 = xi.iter().map(|x| (x * x) as f64).sum();
            for a in self.nodes() {
                let fwd: Vec<i64> = a.iter().zip(&xi).map(|(a, x)| a + x).collect();
                let bwd: Vec<i64> = a.iter().zip(&xi).map(|(a, x)| a - x).collect();
                let (Some(p), Some(f), Some(b)) = (self.flat(&a), self.flat(&fwd), self.flat(&bwd)) else { continue };
                let mut s = 0.0;
                for (q, sign) in [(f, 1.0), (b, -1.0)] {
                    let dot: f64 = (0..d).map(|k| (u[q * d + k] - u[p * d + k]) * sign * xi[k] as f64).sum();
                    s += (dot / l2).powi(2);
                }
                total += sigma * 0.5 * self.h.powi(d as i32 - 2) * v[p] * v[p] * s;
            }
        }
        total
    }

    fn f_div(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.dim;
        let mut total = 0.0;
        for a in self.nodes() {
            if a.iter().any(|&i| i == 0 || i == self.n - 1) {
                continue;
            }
            let p = self.flat(&a).unwrap();
            for pattern in 0..(1 << d) {
                let mut div = 0.0;
                for k in 0..d {
                    let sign = if pattern >> k & 1 == 1 { 1 } else { -1 };
                    let mut b = a.clone();
                    b[k] += sign;
                    div += (u[self.flat(&b).unwrap() * d + k] - u[p * d + k]) * sign as f64;
                }
                total += self.h.powi(d as i32 - 2) * v[p] * v[p] * div * div / (1 << d) as f64;
            }
        }
        total
    }

    fn g(&self, v: &[f64], eps: f64) -> f64 {
        let mut total = 0.0;
        for a in self.nodes() {
            let p = self.flat(&a).unwrap();
            let mut grad = 0.0;
            for k in 0..self.dim {
                let mut b = a.clone();
                b[k] += 1;
                if let Some(q) = self.flat(&b) {
                    grad += ((v[q] - v[p]) / self.h).powi(2);
                }
            }
            total += 0.5 * self.h.powi(self.dim as i32) * ((v[p] - 1.0).powi(2) / eps + eps * grad);
        }
        total
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst = [0.0f64; 3];
    for (d, n) in [(2usize, 5usize), (3, 4)] {
        let dom = unit_box(d, 1.0 / (n - 1) as f64);
        let naive = Naive { dim: d, n: n as i64, h: dom.spacing() };
        let dirs = direction_set(d).unwrap();
        for _ in 0..10 {
            let u = random_vector(&mut rng, &dom, 1.0);
            let v = random_scalar(&mut rng, &dom, 0.0);
            let eps = rng.gen_range(0.05..1.0);
            worst[0] = worst[0].max(rel(f_total(&dom, &u, &v, &dirs, None).unwrap(), naive.f(u.as_slice(), v.as_slice())));
            worst[1] = worst[1].max(rel(f_div(&dom, &u, &v, None).unwrap(), naive.f_div(u.as_slice(), v.as_slice())));
            worst[2] = worst[2].max(rel(g_mm(&dom, &v, eps, None).unwrap(), naive.g(v.as_slice(), eps)));
        }
    }
    pass_if(
        worst.iter().all(|w| *w <= 1e-13),
        format!("max rel err F {:.1e}, F_div {:.1e}, G {:.1e}", worst[0], worst[1], worst[2]),
    )
}

fn main() {
    // `cargo test` passes harness flags; a name filter selects criteria by number
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(u32, &str, f64, fn() -> Outcome); 9] = [
        (1, "coefficient identity", 1.0, criterion_1),
        (2, "operator/energy consistency", 5.0, criterion_2),
        (3, "split identity", 1.0, criterion_3),
        (4, "Freudenthal triangulation", 2.0, criterion_4),
        (5, "optimal profile", 1.0, criterion_5),
        (6, "recovery upper bound", 60.0, criterion_6),
        (7, "solver monotonicity", 120.0, criterion_7),
        (8, "NI equivalence", 30.0, criterion_8),
        (9, "brute-force oracles", 1.0, criterion_9),
    ];
    let optimized = !cfg!(debug_assertions);
    let mut unexpected = 0;
    let mut out = std::io::stdout().lock();
    for (id, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.to_string() == *f || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        // runtime budgets refer to optimized builds
        let over_budget = optimized && secs > budget;
        let label = match (&outcome.status, over_budget) {
            (Status::Pass, false) => "PASS",
            (Status::KnownFail, _) => "FAIL (known)",
            _ => "FAIL",
        };
        if matches!(outcome.status, Status::Fail) || over_budget {
            unexpected += 1;
        }
        let budget_note = if optimized { format!("budget {budget} s") } else { "budget not enforced in debug builds".into() };
        writeln!(out, "acceptance {id} [{name}]: {label}: {} ({secs:.2} s, {budget_note})", outcome.detail).unwrap();
    }
    out.flush().unwrap();
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
