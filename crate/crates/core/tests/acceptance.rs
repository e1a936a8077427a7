//! One PASS/FAIL line per acceptance criterion.

use std::time::{Duration, Instant};

use mabuchi_core::criterion::{certify, Instance, Verdict};
use mabuchi_core::dingfun::{
    energy_pair, eval_d, eval_f, lambda_estimate, normalize, ConvexPotential, Family, QuadConfig,
};
use mabuchi_core::geom::{Halfspace, MomentPolytope};
use mabuchi_core::masolver::{solve, Discretization, SolverConfig, Status};
use mabuchi_core::mesh::Mesh;
use mabuchi_core::quad::{integrate, mc_joint, Poly};
use mabuchi_core::{linalg, CartanType, RootDatum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn a1_exact(t: Q) -> Instance<Q> {
    let d = RootDatum::<Q>::explicit(vec![vec![Q::one()]], vec![vec![q(2, 1)]]).unwrap();
    let p = MomentPolytope::cube(&[t / q(2, 1)], &d).unwrap();
    Instance::new(d, p).unwrap()
}

fn a1(t: f64) -> Instance<f64> {
    a1_exact(Q::from_float(t).unwrap()).to_f64()
}

fn toric_interval() -> Instance<f64> {
    let d = RootDatum::<f64>::toric(1).unwrap();
    let p = MomentPolytope::cube(&[1.0], &d).unwrap();
    Instance::new(d, p).unwrap()
}

fn toric_square_exact() -> Instance<Q> {
    let d = RootDatum::<Q>::toric(2).unwrap();
    let p = MomentPolytope::cube(&[Q::one(), Q::one()], &d).unwrap();
    Instance::new(d, p).unwrap()
}

fn b2_exact() -> Instance<Q> {
    let d = RootDatum::<Q>::named(&[CartanType::B(2)], 0).unwrap();
    let p = MomentPolytope::cube(&[q(4, 1), q(4, 1)], &d).unwrap();
    Instance::new(d, p).unwrap()
}

struct Report {
    pass: bool,
    details: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report { pass: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details.push(detail);
    }
}

fn run(index: usize, budget: Duration, body: impl FnOnce(&mut Report)) -> bool {
    let start = Instant::now();
    let mut report = Report::new();
    body(&mut report);
    let elapsed = start.elapsed();
    report.check(elapsed <= budget, format!("runtime {:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs()));
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!("criterion {index}: {verdict} ({})", report.details.join("; "));
    report.pass
}

fn closed_form_family(r: &mut Report) {
    let expected = [(q(4, 1), Verdict::NotExists), (q(16, 3), Verdict::NotExists), (q(6, 1), Verdict::Exists)];
    for (t, want) in expected {
        let inst = a1_exact(t.clone());
        let cert = certify(&inst, &Q::zero()).unwrap();
        let b_x = cert.b_x[0].clone();
        let exact = b_x == t.clone() * q(3, 4);
        let label = format!("t={t}: b_X={b_x}");
        let boundary_case = t == q(16, 3);
        let ok = if boundary_case {
            let float = certify(&inst.to_f64(), &1e-9).unwrap();
            cert.boundary && float.verdict == Verdict::Inconclusive
        } else {
            cert.verdict == want
        };
        r.check(exact && ok, format!("{label} verdict={}{}", cert.verdict.as_str(), if cert.boundary { " boundary" } else { "" }));
    }
}

fn random_toric_polytope(rng: &mut ChaCha8Rng) -> (RootDatum<Q>, MomentPolytope<Q>) {
    let rank = rng.gen_range(1..=3);
    let d = RootDatum::<Q>::toric(rank).unwrap();
    loop {
        let mut hs = Vec::new();
        for i in 0..rank {
            let mut e = vec![Q::zero(); rank];
            e[i] = Q::one();
            hs.push(Halfspace::new(e.clone(), q(rng.gen_range(1..=12), rng.gen_range(1..=4))));
            let neg: Vec<Q> = e.iter().map(|v| -v.clone()).collect();
            hs.push(Halfspace::new(neg, q(rng.gen_range(1..=12), rng.gen_range(1..=4))));
        }
        for _ in 0..rng.gen_range(0..=2) {
            let normal: Vec<Q> = (0..rank).map(|_| q(rng.gen_range(-3..=3), 1)).collect();
            if normal.iter().all(|v| v.is_zero()) {
                continue;
            }
            hs.push(Halfspace::new(normal, q(rng.gen_range(1..=12), rng.gen_range(1..=3))));
        }
        if let Ok(p) = MomentPolytope::build(hs, &d) {
            return (d, p);
        }
    }
}

fn toric_vanishing(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_b = 0.0f64;
    let mut nonzero = 0;
    for _ in 0..20 {
        let (d, p) = random_toric_polytope(&mut rng);
        let inst = Instance::new(d, p).unwrap();
        let cert = certify(&inst, &Q::zero()).unwrap();
        for v in &cert.b_x {
            worst_b = worst_b.max(v.to_f64().unwrap().abs());
            nonzero += usize::from(!v.is_zero());
        }
        let weighted = inst.weighted_density();
        for t in &inst.datum.toric_basis {
            let g = linalg::mat_vec(&inst.datum.gram, t);
            let res = integrate(&Poly::linear(&g, Q::zero()).mul(&weighted), &inst.polytope.triangulation);
            nonzero += usize::from(!res.is_zero());
        }
    }
    r.check(nonzero == 0 && worst_b < 1e-12, format!("20 polytopes, max |b_X|={worst_b:e}, nonzero entries={nonzero}"));
}

fn extremal_fixture(r: &mut Report) {
    let d = RootDatum::<Q>::toric(1).unwrap();
    let hs = vec![Halfspace::new(vec![Q::one()], q(3, 4)), Halfspace::new(vec![-Q::one()], q(1, 2))];
    let inst = Instance::new(d.clone(), MomentPolytope::build(hs, &d).unwrap()).unwrap();
    let e = &inst.extremal;
    let x = e.x[0].to_f64().unwrap();
    let c = e.c_x.to_f64().unwrap();
    let cap = e.cap_c_x.to_f64().unwrap();
    let fut = mabuchi_core::extremal::futaki(&d, &inst.table, &[Q::one()], &Q::zero()).unwrap();
    let fut = fut.to_f64().unwrap();
    let ok = (x - 0.48).abs() < 1e-12 && (c - 0.4).abs() < 1e-12 && (cap - 1.6).abs() < 1e-12 && (fut + 0.625).abs() < 1e-12;
    r.check(ok, format!("X={x} c_X={c} C_X={cap} Fut(e1)={fut}"));
}

fn monte_carlo(r: &mut Report) {
    let fixtures = [("A1 t=6", a1_exact(q(6, 1))), ("B2 cube 4", b2_exact()), ("toric square", toric_square_exact())];
    for (name, exact) in fixtures {
        let inst = exact.to_f64();
        let rank = inst.datum.rank;
        let weighted = inst.weighted_density();
        let mut funcs = vec![inst.density.clone()];
        for i in 0..rank {
            let mut e = vec![0.0; rank];
            e[i] = 1.0;
            funcs.push(Poly::linear(&e, 0.0).mul(&inst.density));
        }
        for i in 0..rank {
            let mut e = vec![0.0; rank];
            e[i] = 1.0;
            funcs.push(Poly::linear(&e, 0.0).mul(&weighted));
        }
        let mc = mc_joint(&funcs, &inst.polytope, 17, 1_000_000).unwrap();
        let cert = certify(&exact, &Q::zero()).unwrap();
        let mut worst = 0.0f64;
        let mut compare = |est: mabuchi_core::quad::Estimate, want: f64| {
            let z = if est.stderr > 0.0 { (est.value - want).abs() / est.stderr } else if (est.value - want).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
        };
        compare(mc.estimate(0), cert.volume.to_f64().unwrap());
        for i in 0..rank {
            compare(mc.ratio(&[(1 + i, 1.0)], 0), cert.b[i].to_f64().unwrap());
            compare(mc.ratio(&[(1 + rank + i, 1.0)], 0), cert.b_x[i].to_f64().unwrap());
        }
        r.check(worst <= 3.0, format!("{name} max deviation {worst:.2} se"));
    }
}

fn random_potential(inst: &Instance<f64>, mesh: &Mesh, rng: &mut ChaCha8Rng) -> ConvexPotential {
    let datum = &inst.datum;
    let a = rng.gen_range(0.1..1.5);
    let b = rng.gen_range(0.0..1.0);
    let h = rng.gen_range(0.0..1.0);
    let xi: Vec<f64> = (0..datum.rank).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let cut = rng.gen_range(0.0..1.0);
    let dirs: Vec<Vec<f64>> = datum.weyl_elements.iter().map(|w| linalg::mat_vec(&linalg::transpose(w), &xi)).collect();
    let values = mesh
        .nodes
        .iter()
        .map(|y| {
            let n = datum.pair(y, y);
            let hinge: f64 = dirs.iter().map(|d| (linalg::dot(d, y) - cut).max(0.0)).sum();
            a * n + b * (1.0 + n).sqrt() + h * hinge
        })
        .collect();
    ConvexPotential::new(datum, mesh.nodes.clone(), values).unwrap()
}

fn with_affine(u: &ConvexPotential, inst: &Instance<f64>, rng: &mut ChaCha8Rng) -> ConvexPotential {
    let mut slope = vec![0.0; inst.datum.rank];
    for t in &inst.datum.toric_basis {
        let g = linalg::mat_vec(&inst.datum.gram, t);
        slope = linalg::add(&slope, &linalg::scale(&g, &rng.gen_range(-1.0..1.0)));
    }
    let k = rng.gen_range(-3.0..3.0);
    u.map(|y, v| v + linalg::dot(&slope, y) + k).unwrap()
}

fn functional_fixtures() -> Vec<(Instance<f64>, usize)> {
    let square = toric_square_exact().to_f64();
    vec![(a1(6.0), 40), (toric_interval(), 40), (square, 6)]
}

fn functional_identities(r: &mut Report) {
    let cfg = QuadConfig::default();
    let fixtures = functional_fixtures();
    let meshes: Vec<Mesh> = fixtures.iter().map(|(i, d)| Mesh::chamber(&i.polytope, *d).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut shift_err, mut norm_err) = (0.0f64, 0.0f64);
    let mut scaling_slack = f64::INFINITY;
    for n in 0..50 {
        let k = n % fixtures.len();
        let inst = &fixtures[k].0;
        let raw = with_affine(&random_potential(inst, &meshes[k], &mut rng), inst, &mut rng);
        let f = eval_f(&raw, &inst.datum, &cfg).unwrap();
        let kappa = rng.gen_range(-5.0..5.0);
        let g = eval_f(&raw.map(|_, v| v + kappa).unwrap(), &inst.datum, &cfg).unwrap();
        shift_err = shift_err.max((f - g).abs());
        let u = normalize(&raw, &inst.datum).unwrap();
        norm_err = norm_err.max((eval_d(&raw, inst, &cfg).unwrap() - eval_d(&u, inst, &cfg).unwrap()).abs());
        let fu = eval_f(&u, &inst.datum, &cfg).unwrap();
        let dim = inst.datum.manifold_dim as f64;
        for c in [0.1, 1.0, 10.0] {
            let fc = eval_f(&u.map(|_, v| v / (1.0 + c)).unwrap(), &inst.datum, &cfg).unwrap();
            scaling_slack = scaling_slack.min(fu - fc - dim * (1.0 + c).ln());
        }
    }
    r.check(shift_err <= 1e-12, format!("F shift error {shift_err:.1e}"));
    r.check(norm_err <= 1e-9, format!("D normalization error {norm_err:.1e}"));
    r.check(scaling_slack >= -1e-6, format!("scaling inequality min slack {scaling_slack:.3e}"));

    let (mut chain, mut lower, mut upper) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for n in 0..50 {
        let k = n % fixtures.len();
        let inst = &fixtures[k].0;
        let u0 = random_potential(inst, &meshes[k], &mut rng);
        let u1 = random_potential(inst, &meshes[k], &mut rng);
        let e = energy_pair(&u0, &u1, inst, 16).unwrap();
        let dim = inst.datum.manifold_dim as f64;
        let dx = e.i_x - e.j_x;
        chain = chain.min(e.i_x).min((dim + 2.0) * dx - e.i_x).min((dim + 1.0) * e.i_x - (dim + 2.0) * dx);
        lower = lower.min(dx - inst.extremal.c_x * e.i);
        upper = upper.min(inst.extremal.cap_c_x * e.i - dx);
    }
    r.check(chain >= -1e-6, format!("energy chain min slack {chain:.3e}"));
    r.check(lower >= -1e-6, format!("c_X I <= I_X - J_X min slack {lower:.3e}"));
    r.check(upper >= -1e-6, format!("I_X - J_X <= C_X I min slack {upper:.3e}"));
}

fn lambda_positivity(r: &mut Report) {
    let cases = [
        ("A1 t=6", a1(6.0), 24),
        ("toric square", toric_square_exact().to_f64(), 6),
        ("B2 cube 4", b2_exact().to_f64(), 6),
        ("A1 t=4", a1(4.0), 24),
        ("A1 t=5", a1(5.0), 24),
    ];
    for (name, inst, divisions) in cases {
        let verdict = certify(&inst, &1e-9).unwrap().verdict;
        let est = lambda_estimate(&inst, Family::Mixed, 500, 9, divisions).unwrap();
        let ok = match verdict {
            Verdict::Exists => est.lambda_min > 0.0,
            Verdict::NotExists => est.lambda_min <= 0.0,
            Verdict::Inconclusive => true,
        };
        r.check(ok, format!("{name} {} lambda={:.3e}", verdict.as_str(), est.lambda_min));
    }
}

fn solver_consistency(r: &mut Report) {
    for (name, inst) in [("toric [-1,1]", toric_interval()), ("A1 t=6", a1(6.0))] {
        let base = SolverConfig::default();
        let fine = SolverConfig { divisions: Some(2 * base.resolved_divisions(1)), ..SolverConfig::default() };
        let coarse = solve(&inst, &base).unwrap();
        let refined = solve(&inst, &fine).unwrap();
        let ok = coarse.status == Status::Converged
            && refined.status == Status::Converged
            && coarse.stationarity.max(coarse.pushforward) < 1e-3
            && refined.stationarity.max(refined.pushforward) < 1e-4;
        r.check(
            ok,
            format!(
                "{name} {} {:.1e}/{:.1e}, 2x {} {:.1e}/{:.1e}",
                coarse.status.as_str(),
                coarse.stationarity,
                coarse.pushforward,
                refined.status.as_str(),
                refined.stationarity,
                refined.pushforward
            ),
        );
    }
    let sol = solve(&a1(4.0), &SolverConfig::default()).unwrap();
    r.check(sol.status == Status::Diverged, format!("A1 t=4 {}", sol.status.as_str()));

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for inst in [toric_interval(), a1(6.0)] {
        let mut disc = Discretization::new(&inst, SolverConfig::default().resolved_divisions(1), QuadConfig::default()).unwrap();
        let u0 = disc.initial();
        for _ in 0..10 {
            let u: Vec<f64> = u0.iter().map(|v| v + 0.3 * rng.gen_range(0.0..1.0)).collect();
            let dir: Vec<f64> = u.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (a, f) = disc.directional_check(&u, &dir, 1e-5).unwrap();
            worst = worst.max((a - f).abs() / a.abs().max(1e-12));
        }
    }
    r.check(worst <= 1e-6, format!("directional derivative max relative error {worst:.1e} over 20 pairs"));
}

fn f_oracle(r: &mut Report) {
    let inst = toric_interval();
    let mesh = Mesh::chamber(&inst.polytope, 400).unwrap();
    let values = mesh.nodes.iter().map(|y| 0.5 * y[0] * y[0]).collect();
    let u = ConvexPotential::new(&inst.datum, mesh.nodes.clone(), values).unwrap();
    let f = eval_f(&u, &inst.datum, &QuadConfig::default()).unwrap();
    r.check((f + 0.2343).abs() <= 1e-3, format!("F={f:.4} against -0.2343"));
}

fn main() {
    let results = [
        run(1, Duration::from_secs(1), closed_form_family),
        run(2, Duration::from_secs(10), toric_vanishing),
        run(3, Duration::from_secs(1), extremal_fixture),
        run(4, Duration::from_secs(30), monte_carlo),
        run(5, Duration::from_secs(120), functional_identities),
        run(6, Duration::from_secs(60), lambda_positivity),
        run(7, Duration::from_secs(600), solver_consistency),
        run(8, Duration::from_secs(1), f_oracle),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
}
