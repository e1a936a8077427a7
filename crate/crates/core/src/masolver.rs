//! Direct minimization of the reduced functional over W-invariant PL
//! potentials on a chamber mesh.
//!
//! The discrete objective is `D_T(u) = sum_j w_j u_j - log int_{a+} e^{-psi_u} J`
//! with `w_j = (1/V) int phi_j (1 - theta) pi` for the hat functions `phi_j`
//! of the mesh. It is convex in the node values, invariant under adding
//! constants and toric linear functions, and its gradient is
//! `w_j - M_j / Z` where `M_j` is the dual mass of node `j`.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criterion::Instance;
use crate::dingfun::{dual_measure, eval_d, normalize, ConvexPotential, QuadConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::Mesh;
use crate::quad::{integrate, integrate_simplex, uniform, Poly};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    /// Quasi-Newton with an Armijo line search.
    Bfgs,
    /// Steepest descent with the same line search.
    Gradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Edge subdivisions of the coned chamber; `None` picks 160 in rank 1
    /// and 6 in rank 2.
    pub divisions: Option<usize>,
    pub quad: QuadConfig,
    pub optimizer: Optimizer,
    pub max_iter: usize,
    /// Target for the l1 norm of the gradient.
    pub tol: f64,
    /// Divergence when the normalized sup-norm exceeds this multiple of
    /// `diam(2P)`.
    pub divergence_factor: f64,
    pub window: usize,
    pub window_decrease: f64,
    /// Newton steps with a difference Hessian after convergence.
    pub polish_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            divisions: None,
            quad: QuadConfig::default(),
            optimizer: Optimizer::Bfgs,
            max_iter: 5000,
            tol: 1e-7,
            divergence_factor: 50.0,
            window: 100,
            window_decrease: 1e-6,
            polish_steps: 6,
        }
    }
}

impl SolverConfig {
    pub fn resolved_divisions(&self, rank: usize) -> usize {
        self.divisions.unwrap_or(if rank == 1 { 160 } else { 6 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iter: usize,
    pub d: f64,
    /// l1 norm of the gradient.
    pub residual: f64,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Diverged,
    MaxIter,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Normalized final potential.
    pub potential: ConvexPotential,
    /// Node values of the final iterate on the mesh.
    pub values: Vec<f64>,
    pub d_value: f64,
    pub history: Vec<HistoryRow>,
    pub stationarity: f64,
    pub pushforward: f64,
    pub status: Status,
}

/// Mesh, hat weights and quadrature shared by all evaluations.
#[derive(Debug, Clone)]
pub struct Discretization<'a> {
    pub inst: &'a Instance<f64>,
    pub mesh: Mesh,
    pub weights: Vec<f64>,
    pub quad: QuadConfig,
}

fn barycentric(simplex: &[Vec<f64>]) -> Option<Vec<Poly<f64>>> {
    let r = simplex.len() - 1;
    let m: Vec<Vec<f64>> = (0..=r)
        .map(|i| if i < r { simplex.iter().map(|v| v[i]).collect() } else { vec![1.0; r + 1] })
        .collect();
    let inv = linalg::inverse(&m, &1e-14)?;
    Some((0..=r).map(|k| Poly::linear(&inv[k][..r], inv[k][r])).collect())
}

impl<'a> Discretization<'a> {
    pub fn new(inst: &'a Instance<f64>, divisions: usize, quad: QuadConfig) -> Result<Self> {
        if divisions < 3 {
            return Err(Error::InvalidInput("solver needs at least 3 divisions".into()));
        }
        let mesh = Mesh::chamber(&inst.polytope, divisions)?;
        let density = inst.weighted_density();
        let v = inst.table.volume;
        let mut weights = vec![0.0; mesh.nodes.len()];
        for (k, s) in mesh.simplices.iter().enumerate() {
            let simplex = mesh.simplex(k);
            let hats = barycentric(&simplex).ok_or(Error::DegenerateRegion)?;
            for (node, hat) in s.iter().zip(&hats) {
                weights[*node] += integrate_simplex(&hat.mul(&density), &simplex) / v;
            }
        }
        Ok(Discretization { inst, mesh, weights, quad })
    }

    /// `D_T` and its gradient.
    pub fn objective(&mut self, values: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = dual_measure(&self.mesh.nodes, values, &self.inst.datum, &self.quad)?;
        self.quad.radius = self.quad.radius.max(m.radius);
        let linear = linalg::dot(&self.weights, values);
        let mut grad = self.weights.clone();
        for (&j, mass) in m.sites.iter().zip(&m.masses) {
            grad[j] -= mass / m.total;
        }
        Ok((linear - m.log_integral(), grad))
    }

    /// Analytic and central-difference derivative of `D_T` along `dir`.
    pub fn directional_check(&mut self, values: &[f64], dir: &[f64], eps: f64) -> Result<(f64, f64)> {
        let (_, g) = self.objective(values)?;
        let plus: Vec<f64> = values.iter().zip(dir).map(|(u, d)| u + eps * d).collect();
        let minus: Vec<f64> = values.iter().zip(dir).map(|(u, d)| u - eps * d).collect();
        let (dp, _) = self.objective(&plus)?;
        let (dm, _) = self.objective(&minus)?;
        Ok((linalg::dot(&g, dir), (dp - dm) / (2.0 * eps)))
    }

    pub fn potential(&self, values: &[f64]) -> Result<ConvexPotential> {
        ConvexPotential::new(&self.inst.datum, self.mesh.nodes.clone(), values.to_vec())
    }

    pub fn initial(&self) -> Vec<f64> {
        let g = &self.inst.datum.gram;
        self.mesh.nodes.iter().map(|y| 0.5 * linalg::pair(g, y, y)).collect()
    }
}

/// Symmetrized forward differences of the analytic gradient.
fn fd_hessian(disc: &mut Discretization<'_>, u: &[f64], g: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = u.len();
    let eps = 1e-6;
    let mut h = vec![vec![0.0; n]; n];
    let mut probe = u.to_vec();
    for k in 0..n {
        probe[k] += eps;
        let (_, gk) = disc.objective(&probe)?;
        probe[k] = u[k];
        for i in 0..n {
            h[i][k] = (gk[i] - g[i]) / eps;
        }
    }
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (h[i][j] + h[j][i]);
            h[i][j] = m;
            h[j][i] = m;
        }
    }
    Ok(h)
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Minimizes `D_T` from `<y, y>/2`.
pub fn solve(inst: &Instance<f64>, config: &SolverConfig) -> Result<Solution> {
    let r = inst.datum.rank;
    if r > 2 {
        return Err(Error::RankTooHigh { rank: r });
    }
    if !inst.polytope.in_dilate_interior(&vec![0.0; r]) {
        return Err(Error::OriginOutside);
    }
    if !(config.tol > 0.0 && config.window_decrease > 0.0 && config.divergence_factor > 0.0) {
        return Err(Error::InvalidInput("solver tolerances must be positive".into()));
    }
    let mut disc = Discretization::new(inst, config.resolved_divisions(r), config.quad.clone())?;
    let mut u = disc.initial();
    let threshold = config.divergence_factor * inst.polytope.dilate_diameter();

    let (mut d, mut g) = match disc.objective(&u) {
        Ok(v) => v,
        Err(Error::NonDecaying { .. }) => {
            let potential = normalize(&disc.potential(&u)?, &inst.datum)?;
            return Ok(Solution {
                potential,
                values: u,
                d_value: f64::NEG_INFINITY,
                history: Vec::new(),
                stationarity: f64::NAN,
                pushforward: f64::NAN,
                status: Status::Diverged,
            });
        }
        Err(e) => return Err(e),
    };
    let n = u.len();
    let mut h: Option<Vec<Vec<f64>>> = None;
    let mut history = Vec::new();
    let mut status = Status::MaxIter;
    let mut stalled = 0;
    for iter in 0..=config.max_iter {
        let normalized = normalize(&disc.potential(&u)?, &inst.datum)?;
        let sup_norm = sup(&normalized.values);
        history.push(HistoryRow { iter, d, residual: l1(&g), sup_norm });
        if l1(&g) <= config.tol {
            status = Status::Converged;
            break;
        }
        if sup_norm > threshold && iter >= config.window {
            let earlier = history[iter - config.window].d;
            if earlier - d > config.window_decrease {
                status = Status::Diverged;
                break;
            }
        }
        if iter == config.max_iter {
            break;
        }

        let dir: Vec<f64> = match (&h, config.optimizer) {
            (Some(hm), Optimizer::Bfgs) => linalg::mat_vec(hm, &g).iter().map(|v| -v).collect(),
            _ => {
                let s = 1.0 / sup(&g).max(1e-300) * 1e-2;
                g.iter().map(|v| -v * s).collect()
            }
        };
        let slope = linalg::dot(&g, &dir);
        let dir = if slope < 0.0 { dir } else { g.iter().map(|v| -v * 1e-2 / sup(&g).max(1e-300)).collect() };
        let slope = linalg::dot(&g, &dir);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            match disc.objective(&trial) {
                Ok((dt, gt)) if dt <= d + 1e-4 * step * slope => {
                    accepted = Some((trial, dt, gt));
                    break;
                }
                Ok(_) | Err(Error::TailTooLarge { .. }) => step *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((trial, dt, gt)) = accepted else {
            // no further decrease representable
            status = if l1(&g) <= 1e3 * config.tol { Status::Converged } else { Status::MaxIter };
            break;
        };
        let s: Vec<f64> = trial.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = linalg::dot(&s, &y);
        if config.optimizer == Optimizer::Bfgs && sy > 1e-300 {
            let hm = h.get_or_insert_with(|| {
                let gamma = sy / linalg::dot(&y, &y);
                (0..n).map(|i| (0..n).map(|j| if i == j { gamma } else { 0.0 }).collect()).collect()
            });
            let hy = linalg::mat_vec(hm, &y);
            let yhy = linalg::dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hm[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        stalled = if d - dt <= 1e-15 * (1.0 + d.abs()) { stalled + 1 } else { 0 };
        u = trial;
        d = dt;
        g = gt;
        if stalled >= 20 {
            status = if l1(&g) <= 100.0 * config.tol { Status::Converged } else { Status::MaxIter };
            history.push(HistoryRow { iter: iter + 1, d, residual: l1(&g), sup_norm: history[iter].sup_norm });
            break;
        }
    }

    if status == Status::Converged {
        for _ in 0..config.polish_steps {
            if l1(&g) <= 1e-13 * n as f64 {
                break;
            }
            let hess = fd_hessian(&mut disc, &u, &g)?;
            let trace: f64 = (0..n).map(|i| hess[i][i]).sum();
            let damped: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| hess[i][j] + if i == j { 1e-10 * trace / n as f64 } else { 0.0 }).collect())
                .collect();
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(step) = linalg::solve(&damped, &rhs, &0.0) else { break };
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + b).collect();
            let (dt, gt) = disc.objective(&trial)?;
            if dt > d + 1e-12 * (1.0 + d.abs()) || l1(&gt) >= l1(&g) {
                break;
            }
            u = trial;
            d = dt;
            g = gt;
            let sup_norm = sup(&normalize(&disc.potential(&u)?, &inst.datum)?.values);
            history.push(HistoryRow { iter: history.len(), d, residual: l1(&g), sup_norm });
        }
    }

    let potential = normalize(&disc.potential(&u)?, &inst.datum)?;
    let d_value = eval_d(&potential, inst, &disc.quad)?;
    let stationarity = stationarity_residual(&potential, inst, &disc.quad, 16, 0)?;
    let pushforward = pushforward_residual(&potential, inst, &disc.quad)?;
    Ok(Solution { potential, values: u, d_value, history, stationarity, pushforward, status })
}

/// `(1/|W|) sum_w g(w y)` for each monomial of degree `1..=max_degree`,
/// dropping the ones that vanish.
pub fn symmetric_monomials(inst: &Instance<f64>, max_degree: u32) -> Vec<Poly<f64>> {
    let r = inst.datum.rank;
    let scale = inst.polytope.dilate_diameter().max(1e-300);
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..r {
        exps = exps
            .into_iter()
            .flat_map(|e| (0..=max_degree).map(move |k| {
                let mut e = e.clone();
                e.push(k);
                e
            }))
            .collect();
    }
    let mut out = Vec::new();
    for e in exps {
        let deg: u32 = e.iter().sum();
        if deg == 0 || deg > max_degree {
            continue;
        }
        let mono = Poly::monomial(e, libm::pow(scale, -(deg as f64)));
        let mut acc = Poly::zero(r);
        for w in &inst.datum.weyl_elements {
            let subs: Vec<Poly<f64>> = w.iter().map(|row| Poly::linear(row, 0.0)).collect();
            acc = acc.add(&mono.compose(&subs));
        }
        let acc = acc.scale(&(1.0 / inst.datum.weyl_elements.len() as f64));
        let acc = Poly { nvars: r, terms: acc.terms.into_iter().filter(|(_, c)| c.abs() > 1e-14).collect() };
        if !acc.terms.is_empty() {
            out.push(acc);
        }
    }
    out
}

/// `|E[g(grad psi)] - (1/V) int g (1 - theta) pi|` for each `g`.
fn discrepancies(u: &ConvexPotential, inst: &Instance<f64>, quad: &QuadConfig, tests: &[Poly<f64>]) -> Result<Vec<f64>> {
    let m = dual_measure(&u.points, &u.values, &inst.datum, quad)?;
    let density = inst.weighted_density();
    let v = inst.table.volume;
    Ok(tests
        .iter()
        .map(|g| {
            let target = integrate(&g.mul(&density), &inst.polytope.triangulation) / v;
            let pushed: f64 = m.sites.iter().zip(&m.masses).map(|(&j, mass)| mass * g.eval(&u.points[j])).sum::<f64>() / m.total;
            (pushed - target).abs()
        })
        .collect())
}

/// Largest discrepancy of the weak equation over random W-invariant cubic
/// directions.
pub fn stationarity_residual(u: &ConvexPotential, inst: &Instance<f64>, quad: &QuadConfig, count: usize, seed: u64) -> Result<f64> {
    let basis = symmetric_monomials(inst, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = inst.datum.rank;
    let dirs: Vec<Poly<f64>> = (0..count)
        .map(|_| {
            basis
                .iter()
                .fold(Poly::zero(r), |acc, b| acc.add(&b.scale(&(2.0 * uniform(&mut rng) - 1.0))))
        })
        .collect();
    Ok(discrepancies(u, inst, quad, &dirs)?.into_iter().fold(0.0, f64::max))
}

/// Largest discrepancy between the pushed-forward dual measure and
/// `(1 - theta) pi / V` over symmetrized monomials of degree at most 2.
pub fn pushforward_residual(u: &ConvexPotential, inst: &Instance<f64>, quad: &QuadConfig) -> Result<f64> {
    let tests = symmetric_monomials(inst, 2);
    Ok(discrepancies(u, inst, quad, &tests)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::MomentPolytope;
    use crate::rootsys::RootDatum;

    fn a1(t: f64) -> Instance<f64> {
        let d = RootDatum::<f64>::explicit(linalg::identity(1), vec![vec![2.0]]).unwrap();
        let p = MomentPolytope::cube(&[t / 2.0], &d).unwrap();
        Instance::new(d, p).unwrap()
    }

    fn toric_interval() -> Instance<f64> {
        let d = RootDatum::<f64>::toric(1).unwrap();
        let p = MomentPolytope::cube(&[1.0], &d).unwrap();
        Instance::new(d, p).unwrap()
    }

    #[test]
    fn hat_weights_sum_to_one() {
        for inst in [a1(6.0), toric_interval()] {
            let disc = Discretization::new(&inst, 10, QuadConfig::default()).unwrap();
            assert!((disc.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let inst = a1(6.0);
        let mut disc = Discretization::new(&inst, 20, QuadConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u0 = disc.initial();
        for _ in 0..5 {
            let u: Vec<f64> = u0.iter().map(|v| v + 0.3 * uniform(&mut rng)).collect();
            let dir: Vec<f64> = u.iter().map(|_| 2.0 * uniform(&mut rng) - 1.0).collect();
            let (a, f) = disc.directional_check(&u, &dir, 1e-5).unwrap();
            assert!((a - f).abs() <= 1e-6 * a.abs().max(1e-3), "{a} {f}");
        }
    }

    #[test]
    fn objective_is_convex_and_shift_invariant() {
        let inst = toric_interval();
        let mut disc = Discretization::new(&inst, 16, QuadConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = disc.initial();
        for _ in 0..5 {
            let a: Vec<f64> = base.iter().map(|v| v + uniform(&mut rng)).collect();
            let b: Vec<f64> = base.iter().map(|v| v * (1.0 + uniform(&mut rng))).collect();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let (da, _) = disc.objective(&a).unwrap();
            let (db, _) = disc.objective(&b).unwrap();
            let (dm, _) = disc.objective(&mid).unwrap();
            assert!(dm <= 0.5 * (da + db) + 1e-9);
            let shifted: Vec<f64> = a.iter().zip(&disc.mesh.nodes).map(|(v, y)| v + 3.0 + 0.4 * y[0]).collect();
            assert!((disc.objective(&shifted).unwrap().0 - da).abs() < 1e-9);
        }
    }

    #[test]
    fn toric_interval_converges_symmetrically() {
        let inst = toric_interval();
        let sol = solve(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Converged);
        assert!(sol.stationarity < 1e-3 && sol.pushforward < 1e-3);
        for (y, v) in sol.potential.points.iter().zip(&sol.potential.values) {
            let w = sol.potential.eval(&[-y[0]]).unwrap();
            assert!((w - v).abs() < 1e-9);
        }
        assert!(sol.history.windows(2).all(|w| w[1].d <= w[0].d + 1e-12));
    }

    #[test]
    fn a1_family_attainment() {
        let sol = solve(&a1(6.0), &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Converged);
        assert!(sol.stationarity < 1e-3 && sol.pushforward < 1e-3);
        let sol = solve(&a1(4.0), &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Diverged);
    }

    #[test]
    fn residuals_detect_perturbation() {
        let inst = toric_interval();
        let cfg = SolverConfig { divisions: Some(40), ..SolverConfig::default() };
        let sol = solve(&inst, &cfg).unwrap();
        let mut bumped = sol.potential.fundamental_values();
        let k = bumped.len() / 3;
        bumped[k] += 0.1;
        let worse = sol.potential.with_values(&bumped).unwrap();
        let quad = QuadConfig::default();
        assert!(pushforward_residual(&worse, &inst, &quad).unwrap() > sol.pushforward);
        let zero = sol.potential.map(|_, _| 0.0).unwrap();
        let at_zero = stationarity_residual(&zero, &inst, &quad, 16, 0).unwrap();
        assert!(at_zero > 0.0 && at_zero > sol.stationarity);
        let rank_three = RootDatum::<f64>::toric(3).unwrap();
        let cube = MomentPolytope::cube(&[1.0, 1.0, 1.0], &rank_three).unwrap();
        let big = Instance::new(rank_three, cube).unwrap();
        assert_eq!(solve(&big, &cfg).map(|_| ()), Err(Error::RankTooHigh { rank: 3 }));
    }
}
