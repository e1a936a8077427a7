//! The weighted barycenter `b_X`, the existence certificate and the
//! sampled necessity probe.

use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extremal::{solve_extremal, ExtremalData};
use crate::geom::{MomentPolytope, Simplex};
use crate::linalg;
use crate::quad::{expand_pi, integrate, moments, uniform, MomentTable, Poly};
use crate::rootsys::{ConeClass, ConePosition, RootDatum};
use crate::scalar::{sint, Scalar};

/// Everything the criterion and the functionals share for one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub datum: RootDatum<S>,
    pub polytope: MomentPolytope<S>,
    pub density: Poly<S>,
    pub table: MomentTable<S>,
    pub extremal: ExtremalData<S>,
}

impl<S: Scalar> Instance<S> {
    pub fn new(datum: RootDatum<S>, polytope: MomentPolytope<S>) -> Result<Self> {
        if polytope.rank != datum.rank {
            return Err(Error::DimensionMismatch { expected: datum.rank, found: polytope.rank });
        }
        let density = expand_pi(&datum);
        let table = moments(&density, &polytope.triangulation)?;
        let extremal = solve_extremal(&datum, &table, &polytope)?;
        Ok(Instance { datum, polytope, density, table, extremal })
    }

    pub fn four_rho(&self) -> Vec<S> {
        linalg::scale(&self.datum.rho, &sint(4))
    }

    /// `(1 - theta) pi` as a polynomial.
    pub fn weighted_density(&self) -> Poly<S> {
        let e = &self.extremal;
        let neg: Vec<S> = e.theta_slope.iter().map(|s| -s.clone()).collect();
        Poly::linear(&neg, S::one() - e.theta_const.clone()).mul(&self.density)
    }

    /// The same instance in floating point.
    pub fn to_f64(&self) -> Instance<f64> {
        Instance {
            datum: self.datum.convert(),
            polytope: self.polytope.convert(),
            density: self.density.convert(),
            table: self.table.convert(),
            extremal: self.extremal.convert(),
        }
    }
}

/// `b_X = b - M2 s / V - c b` for `theta = <s, y> + c`.
pub fn weighted_barycenter<S: Scalar>(table: &MomentTable<S>, extremal: &ExtremalData<S>) -> Vec<S> {
    let m2s = linalg::mat_vec(&table.second, &extremal.theta_slope);
    table
        .barycenter
        .iter()
        .zip(&m2s)
        .map(|(b, m)| b.clone() - m.clone() / table.volume.clone() - extremal.theta_const.clone() * b.clone())
        .collect()
}

/// `b_X` by integrating `y (1 - theta) pi` directly over `simplices`.
pub fn weighted_barycenter_direct<S: Scalar>(
    density: &Poly<S>,
    extremal: &ExtremalData<S>,
    simplices: &[Simplex<S>],
    volume: &S,
) -> Vec<S> {
    let r = density.nvars;
    let neg: Vec<S> = extremal.theta_slope.iter().map(|s| -s.clone()).collect();
    let w = Poly::linear(&neg, S::one() - extremal.theta_const.clone()).mul(density);
    (0..r)
        .map(|i| {
            let mut e = alloc::vec![0; r];
            e[i] = 1;
            integrate(&Poly::monomial(e, S::one()).mul(&w), simplices) / volume.clone()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    NotExists,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Exists => "exists",
            Verdict::NotExists => "not_exists",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Margins<S> {
    pub min_coeff: Option<S>,
    pub residual_norm: S,
    pub c_x: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<S> {
    pub b: Vec<S>,
    pub b_x: Vec<S>,
    pub four_rho: Vec<S>,
    pub shift: Vec<S>,
    pub cone: ConePosition<S>,
    pub c_x: S,
    pub cap_c_x: S,
    pub x: Vec<S>,
    pub a_matrix: Vec<Vec<S>>,
    pub volume: S,
    pub verdict: Verdict,
    /// `shift` lies on the relative boundary of the cone.
    pub boundary: bool,
    pub margins: Margins<S>,
    pub fano: bool,
}

pub fn certify<S: Scalar>(inst: &Instance<S>, tol: &S) -> Result<Certificate<S>> {
    let b_x = weighted_barycenter(&inst.table, &inst.extremal);
    let four_rho = inst.four_rho();
    let shift = linalg::sub(&b_x, &four_rho);
    let cone = inst.datum.cone_position(&shift, tol)?;
    let c_x = inst.extremal.c_x.clone();

    let boundary = cone.class == ConeClass::Boundary;
    let c_near = c_x.abs() <= *tol;
    let verdict = if c_x < -tol.clone() || cone.class == ConeClass::Outside {
        Verdict::NotExists
    } else if S::EXACT {
        if c_x.is_zero() || boundary {
            Verdict::NotExists
        } else {
            Verdict::Exists
        }
    } else if c_near || boundary {
        Verdict::Inconclusive
    } else {
        Verdict::Exists
    };

    let margins = Margins { min_coeff: cone.min_coeff(), residual_norm: cone.residual_norm(), c_x: c_x.clone() };
    Ok(Certificate {
        b: inst.table.barycenter.clone(),
        b_x,
        four_rho,
        shift,
        cone,
        c_x,
        cap_c_x: inst.extremal.cap_c_x.clone(),
        x: inst.extremal.x.clone(),
        a_matrix: inst.extremal.a_matrix.clone(),
        volume: inst.table.volume.clone(),
        verdict,
        boundary,
        margins,
        fano: inst.polytope.fano,
    })
}

/// Full pipeline from a datum and a polytope.
pub fn check_existence<S: Scalar>(datum: &RootDatum<S>, polytope: &MomentPolytope<S>, tol: &S) -> Result<Certificate<S>> {
    certify(&Instance::new(datum.clone(), polytope.clone())?, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<S> {
    pub rays: Vec<Vec<S>>,
    /// `<xi, b_X - 4 rho>` per ray.
    pub pairings: Vec<S>,
    pub negative_found: bool,
    /// No pairing contradicts the certificate verdict.
    pub consistent: bool,
}

/// Pairs every ray of the open chamber with `b_X - 4 rho`.
pub fn necessity_probe<S: Scalar>(
    cert: &Certificate<S>,
    datum: &RootDatum<S>,
    rays: &[Vec<S>],
    tol: &S,
) -> Result<ProbeReport<S>> {
    let mut pairings = Vec::with_capacity(rays.len());
    let mut consistent = true;
    for (index, xi) in rays.iter().enumerate() {
        if xi.len() != datum.rank {
            return Err(Error::DimensionMismatch { expected: datum.rank, found: xi.len() });
        }
        if datum.simple_roots.iter().any(|a| datum.pair(a, xi) <= *tol) {
            return Err(Error::RayOutsideChamber { index });
        }
        let p = datum.pair(xi, &cert.shift);
        if cert.verdict == Verdict::Exists {
            let semisimple = datum.simple_coeffs(xi).iter().any(|c| c.abs() > *tol);
            if p < -tol.clone() || (semisimple && !datum.simple_roots.is_empty() && p <= *tol) {
                consistent = false;
            }
        }
        pairings.push(p);
    }
    let negative_found = pairings.iter().any(|p| *p < -tol.clone());
    Ok(ProbeReport { rays: rays.to_vec(), pairings, negative_found, consistent })
}

/// `count` random rays `sum_j c_j w_j` over the fundamental coweights with
/// `c_j` uniform in `(0, 1]`; uniform toric directions when there are no
/// roots.
pub fn sample_chamber_rays(datum: &RootDatum<f64>, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coweights = datum.fundamental_coweights();
    (0..count)
        .map(|_| {
            if coweights.is_empty() {
                (0..datum.rank).map(|_| 2.0 * uniform(&mut rng) - 1.0).collect()
            } else {
                let mut v = alloc::vec![0.0; datum.rank];
                for w in &coweights {
                    let c = 1.0 - uniform(&mut rng);
                    v = linalg::add(&v, &linalg::scale(w, &c));
                }
                v
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::box_halfspaces;
    use alloc::vec;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn a1() -> RootDatum<Q> {
        RootDatum::explicit(linalg::identity(1), vec![vec![q(2, 1)]]).unwrap()
    }

    fn a1_instance(t: Q) -> Instance<Q> {
        let d = a1();
        let p = MomentPolytope::cube(&[t / q(2, 1)], &d).unwrap();
        Instance::new(d, p).unwrap()
    }

    #[test]
    fn a1_family_verdicts() {
        let z = q(0, 1);
        let c = certify(&a1_instance(q(4, 1)), &z).unwrap();
        assert_eq!(c.b_x, vec![q(3, 1)]);
        assert_eq!(c.cone.coeffs, vec![q(-1, 2)]);
        assert_eq!(c.verdict, Verdict::NotExists);
        let c = certify(&a1_instance(q(6, 1)), &z).unwrap();
        assert_eq!(c.b_x, vec![q(9, 2)]);
        assert_eq!(c.cone.coeffs, vec![q(1, 4)]);
        assert_eq!(c.verdict, Verdict::Exists);
        let c = certify(&a1_instance(q(16, 3)), &z).unwrap();
        assert_eq!(c.verdict, Verdict::NotExists);
        assert!(c.boundary);

        let f = a1_instance(q(16, 3)).to_f64();
        assert_eq!(certify(&f, &1e-9).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn toric_barycenters_vanish() {
        let d = RootDatum::<Q>::toric(1).unwrap();
        let mut hs = box_halfspaces(&[q(1, 2)]);
        hs[0].offset = q(3, 4);
        let inst = Instance::new(d, MomentPolytope::build(hs, &RootDatum::toric(1).unwrap()).unwrap()).unwrap();
        let c = certify(&inst, &q(0, 1)).unwrap();
        assert_eq!(c.b_x, vec![q(0, 1)]);
        assert_eq!(c.verdict, Verdict::Exists);
        let direct = weighted_barycenter_direct(&inst.density, &inst.extremal, &inst.polytope.triangulation, &inst.table.volume);
        assert_eq!(direct, c.b_x);
    }

    #[test]
    fn probe_pairings() {
        let z = q(0, 1);
        let inst = a1_instance(q(6, 1));
        let c = certify(&inst, &z).unwrap();
        let r = necessity_probe(&c, &inst.datum, &[vec![q(1, 1)]], &z).unwrap();
        assert_eq!(r.pairings, vec![q(1, 2)]);
        assert!(r.consistent);
        let inst = a1_instance(q(4, 1));
        let c = certify(&inst, &z).unwrap();
        let r = necessity_probe(&c, &inst.datum, &[vec![q(1, 1)]], &z).unwrap();
        assert_eq!(r.pairings, vec![q(-1, 1)]);
        assert!(r.negative_found && r.consistent);
        assert_eq!(necessity_probe(&c, &inst.datum, &[vec![q(-1, 1)]], &z).unwrap_err(), Error::RayOutsideChamber { index: 0 });
    }

    #[test]
    fn sampled_rays_lie_in_open_chamber() {
        let d = RootDatum::<f64>::named(&[crate::rootsys::CartanType::B(2)], 0).unwrap();
        for ray in sample_chamber_rays(&d, 50, 3) {
            assert!(d.simple_roots.iter().all(|a| d.pair(a, &ray) > 0.0));
        }
    }
}
