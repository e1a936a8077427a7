//! Polynomial densities and their integrals over triangulated regions,
//! exactly per simplex and by Monte Carlo.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{MomentPolytope, Simplex};
use crate::linalg::{self, Matrix};
use crate::rootsys::RootDatum;
use crate::scalar::{factorial, Scalar};

/// Sparse polynomial: exponent vector to coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> Poly<S> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// `c0 + sum coeffs[i] y_i`
    pub fn linear(coeffs: &[S], c0: S) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; n];
                e[i] = 1;
                p.terms.insert(e, c.clone());
            }
        }
        p
    }

    pub fn monomial(exps: Vec<u32>, c: S) -> Self {
        let mut p = Self::zero(exps.len());
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Total degree of every term equals `d`.
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == d)
    }

    fn add_term(&mut self, e: Vec<u32>, c: S) {
        let slot = self.terms.entry(e).or_insert_with(S::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &S) -> Self {
        let mut out = Self::zero(self.nvars);
        if !k.is_zero() {
            for (e, c) in &self.terms {
                out.terms.insert(e.clone(), c.clone() * k.clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: BTreeMap<Vec<u32>, S> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let slot = acc.entry(e).or_insert_with(S::zero);
                *slot = slot.clone() + ca.clone() * cb.clone();
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Poly { nvars: self.nvars, terms: acc }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.nvars, S::one()), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, y: &[S]) -> S {
        self.terms.iter().fold(S::zero(), |acc, (e, c)| {
            let m = e
                .iter()
                .zip(y)
                .fold(c.clone(), |m, (k, yi)| (0..*k).fold(m, |m, _| m * yi.clone()));
            acc + m
        })
    }

    /// Substitutes `y_i = subs[i]` (polynomials in a common set of variables).
    pub fn compose(&self, subs: &[Poly<S>]) -> Poly<S> {
        let nv = subs.first().map_or(0, |p| p.nvars);
        let mut powers: Vec<Vec<Poly<S>>> = subs.iter().map(|s| vec![Poly::constant(nv, S::one()), s.clone()]).collect();
        let mut out = Poly::zero(nv);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(nv, c.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[i].len() <= k {
                    let next = powers[i].last().expect("seeded").mul(&subs[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][k]);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn convert<T: Scalar>(&self) -> Poly<T> {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), T::from_float(c.as_f64()).unwrap_or_else(T::zero)))
                .collect(),
        }
    }
}

/// `pi(y) = prod_{alpha in Phi+} <alpha, y>^2`, expanded.
pub fn expand_pi<S: Scalar>(datum: &RootDatum<S>) -> Poly<S> {
    let mut p = Poly::constant(datum.rank, S::one());
    for a in &datum.positive_roots {
        let form = Poly::linear(&linalg::mat_vec(&datum.gram, a), S::zero());
        p = p.mul(&form.mul(&form));
    }
    p
}

/// Integral of `lambda^a` over the standard simplex: `prod a_i! / (|a| + d)!`.
fn standard_moment<S: Scalar>(e: &[u32]) -> S {
    let total: usize = e.iter().map(|&k| k as usize).sum::<usize>() + e.len();
    e.iter().fold(S::one(), |acc, &k| acc * factorial::<S>(k as usize)) / factorial::<S>(total)
}

/// Affine parametrization `y = v0 + sum lambda_k (v_k - v0)` as linear
/// polynomials in `lambda`, plus `|det|`.
pub fn simplex_chart<S: Scalar>(simplex: &Simplex<S>) -> (Vec<Poly<S>>, S) {
    let r = simplex.len() - 1;
    let v0 = &simplex[0];
    let edges: Matrix<S> = simplex[1..].iter().map(|v| linalg::sub(v, v0)).collect();
    let det = linalg::determinant(&edges, &S::zero()).abs();
    let subs = (0..v0.len())
        .map(|i| {
            let coeffs: Vec<S> = (0..r).map(|k| edges[k][i].clone()).collect();
            Poly::linear(&coeffs, v0[i].clone())
        })
        .collect();
    (subs, det)
}

/// Integral of a polynomial already pulled back to simplex coordinates.
pub fn integrate_chart<S: Scalar>(p: &Poly<S>, det: &S) -> S {
    p.terms
        .iter()
        .fold(S::zero(), |acc, (e, c)| acc + c.clone() * standard_moment::<S>(e))
        * det.clone()
}

pub fn integrate_simplex<S: Scalar>(p: &Poly<S>, simplex: &Simplex<S>) -> S {
    let (subs, det) = simplex_chart(simplex);
    integrate_chart(&p.compose(&subs), &det)
}

pub fn integrate<S: Scalar>(p: &Poly<S>, simplices: &[Simplex<S>]) -> S {
    simplices
        .iter()
        .fold(S::zero(), |acc, s| acc + integrate_simplex(p, s))
}

/// Weighted volume, first and second moments of a density.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<S> {
    pub volume: S,
    pub first: Vec<S>,
    pub barycenter: Vec<S>,
    pub second: Matrix<S>,
}

impl<S: Scalar> MomentTable<S> {
    /// `(1/V) M2 - b b^T`
    pub fn covariance(&self) -> Matrix<S> {
        let r = self.first.len();
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| self.second[i][j].clone() / self.volume.clone() - self.barycenter[i].clone() * self.barycenter[j].clone())
                    .collect()
            })
            .collect()
    }

    pub fn convert<T: Scalar>(&self) -> MomentTable<T> {
        let c = |x: &S| T::from_float(x.as_f64()).unwrap_or_else(T::zero);
        MomentTable {
            volume: c(&self.volume),
            first: self.first.iter().map(c).collect(),
            barycenter: self.barycenter.iter().map(c).collect(),
            second: self.second.iter().map(|r| r.iter().map(c).collect()).collect(),
        }
    }
}

pub fn moments<S: Scalar>(density: &Poly<S>, simplices: &[Simplex<S>]) -> Result<MomentTable<S>> {
    let r = density.nvars;
    let mut volume = S::zero();
    let mut first = vec![S::zero(); r];
    let mut second = vec![vec![S::zero(); r]; r];
    for s in simplices {
        let (subs, det) = simplex_chart(s);
        let p = density.compose(&subs);
        volume = volume + integrate_chart(&p, &det);
        let py: Vec<Poly<S>> = subs.iter().map(|y| p.mul(y)).collect();
        for i in 0..r {
            first[i] = first[i].clone() + integrate_chart(&py[i], &det);
            for j in i..r {
                let v = integrate_chart(&py[i].mul(&subs[j]), &det);
                second[i][j] = second[i][j].clone() + v;
            }
        }
    }
    for i in 0..r {
        for j in 0..i {
            second[i][j] = second[j][i].clone();
        }
    }
    let tol = if S::EXACT { S::zero() } else { S::from_ratio(1, 1_000_000_000_000) };
    if volume.abs() <= tol {
        return Err(Error::DegenerateRegion);
    }
    let barycenter = first.iter().map(|f| f.clone() / volume.clone()).collect();
    Ok(MomentTable { volume, first, barycenter, second })
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Joint hit-or-miss estimates of `int f_k` over `2P_+` with their
/// sample covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct McJoint {
    pub means: Vec<f64>,
    /// Covariance of the mean estimators.
    pub cov: Matrix<f64>,
}

impl McJoint {
    pub fn estimate(&self, k: usize) -> Estimate {
        Estimate { value: self.means[k], stderr: libm::sqrt(self.cov[k][k].max(0.0)) }
    }

    /// Delta-method estimate of `sum_k a_k I_k / I_den`.
    pub fn ratio(&self, num: &[(usize, f64)], den: usize) -> Estimate {
        let d = self.means[den];
        let n: f64 = num.iter().map(|&(k, a)| a * self.means[k]).sum();
        let r = n / d;
        // gradient of n/d in the estimated means
        let mut grad = vec![0.0; self.means.len()];
        for &(k, a) in num {
            grad[k] += a / d;
        }
        grad[den] -= r / d;
        let mut var = 0.0;
        for (i, gi) in grad.iter().enumerate() {
            for (j, gj) in grad.iter().enumerate() {
                var += gi * gj * self.cov[i][j];
            }
        }
        Estimate { value: r, stderr: libm::sqrt(var.max(0.0)) }
    }
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn mc_joint(funcs: &[Poly<f64>], region: &MomentPolytope<f64>, seed: u64, samples: usize) -> Result<McJoint> {
    if samples < 1000 {
        return Err(Error::InvalidInput("at least 1000 samples are required".into()));
    }
    let r = region.rank;
    let mut lo = vec![f64::INFINITY; r];
    let mut hi = vec![f64::NEG_INFINITY; r];
    for v in &region.chamber_vertices {
        for i in 0..r {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if !(box_vol > 0.0) {
        return Err(Error::DegenerateRegion);
    }
    let k = funcs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; k];
    let mut cross = vec![vec![0.0; k]; k];
    let mut y = vec![0.0; r];
    let mut vals = vec![0.0; k];
    for _ in 0..samples {
        for i in 0..r {
            y[i] = lo[i] + (hi[i] - lo[i]) * uniform(&mut rng);
        }
        if !region.chamber_halfspaces.iter().all(|h| h.slack(&y) >= 0.0) {
            continue;
        }
        for (v, f) in vals.iter_mut().zip(funcs) {
            *v = f.eval(&y) * box_vol;
        }
        for a in 0..k {
            sum[a] += vals[a];
            for b in a..k {
                cross[a][b] += vals[a] * vals[b];
            }
        }
    }
    let n = samples as f64;
    let means: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let mut cov = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let c = (cross[a][b] / n - means[a] * means[b]) / (n - 1.0);
            cov[a][b] = c;
            cov[b][a] = c;
        }
    }
    Ok(McJoint { means, cov })
}

pub fn mc_integrate(p: &Poly<f64>, region: &MomentPolytope<f64>, seed: u64, samples: usize) -> Result<Estimate> {
    Ok(mc_joint(core::slice::from_ref(p), region, seed, samples)?.estimate(0))
}
