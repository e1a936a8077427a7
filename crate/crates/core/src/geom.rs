//! W-invariant moment polytopes: vertices, the chamber slice of the dilate
//! and deterministic triangulations.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rootsys::{sup_norm, RootDatum};
use crate::scalar::{factorial, sint, Scalar};

/// `{y : <normal, y> <= offset}` in plain coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace<S> {
    pub normal: Vec<S>,
    pub offset: S,
}

impl<S: Scalar> Halfspace<S> {
    pub fn new(normal: Vec<S>, offset: S) -> Self {
        Halfspace { normal, offset }
    }

    pub fn slack(&self, y: &[S]) -> S {
        self.offset.clone() - linalg::dot(&self.normal, y)
    }
}

/// `r + 1` vertices spanning an `r`-simplex.
pub type Simplex<S> = Vec<Vec<S>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// `4 rho` is not in the interior of `2P_+`.
    Fano,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentPolytope<S> {
    pub rank: usize,
    /// Halfspaces of `P`.
    pub halfspaces: Vec<Halfspace<S>>,
    /// Vertices of `P`.
    pub vertices: Vec<Vec<S>>,
    /// Vertices of `2P`.
    pub dilated_vertices: Vec<Vec<S>>,
    /// Halfspaces of `2P_+`: those of `2P` followed by the chamber walls.
    pub chamber_halfspaces: Vec<Halfspace<S>>,
    pub chamber_vertices: Vec<Vec<S>>,
    /// Pulling triangulation of `2P_+`.
    pub triangulation: Vec<Simplex<S>>,
    /// `4 rho` lies in the interior of `2P_+`.
    pub fano: bool,
    pub warnings: Vec<Warning>,
    pub tol: S,
}

impl<S: Scalar> MomentPolytope<S> {
    pub fn build(halfspaces: Vec<Halfspace<S>>, datum: &RootDatum<S>) -> Result<Self> {
        Self::build_with_tol(halfspaces, datum, S::default_tol())
    }

    pub fn build_with_tol(halfspaces: Vec<Halfspace<S>>, datum: &RootDatum<S>, tol: S) -> Result<Self> {
        let r = datum.rank;
        if halfspaces.is_empty() {
            return Err(Error::InvalidInput("polytope needs at least one halfspace".into()));
        }
        for h in &halfspaces {
            if h.normal.len() != r {
                return Err(Error::DimensionMismatch { expected: r, found: h.normal.len() });
            }
        }
        if !is_bounded(&halfspaces, r, &tol) {
            return Err(Error::Unbounded);
        }
        let vertices = enumerate_vertices(&halfspaces, r, &tol);
        let dim = if vertices.is_empty() { 0 } else { linalg::affine_dim(&vertices, &tol) };
        if vertices.is_empty() || dim < r {
            return Err(Error::LowerDimensional { dim });
        }
        check_invariance(&vertices, datum, &tol)?;

        let two = sint::<S>(2);
        let dilated_vertices: Vec<Vec<S>> = vertices.iter().map(|v| linalg::scale(v, &two)).collect();
        let mut chamber_halfspaces: Vec<Halfspace<S>> = halfspaces
            .iter()
            .map(|h| Halfspace::new(h.normal.clone(), h.offset.clone() * two.clone()))
            .collect();
        for a in &datum.simple_roots {
            let ga = linalg::mat_vec(&datum.gram, a);
            chamber_halfspaces.push(Halfspace::new(ga.iter().map(|x| -x.clone()).collect(), S::zero()));
        }
        let chamber_vertices = enumerate_vertices(&chamber_halfspaces, r, &tol);
        let cdim = if chamber_vertices.is_empty() { 0 } else { linalg::affine_dim(&chamber_vertices, &tol) };
        if cdim < r {
            return Err(Error::LowerDimensional { dim: cdim });
        }
        let triangulation = pulling_triangulation(&chamber_vertices, &chamber_halfspaces, &tol);

        let four_rho = linalg::scale(&datum.rho, &sint(4));
        let fano = chamber_halfspaces.iter().all(|h| h.slack(&four_rho) > tol);
        let warnings = if fano { Vec::new() } else { vec![Warning::Fano] };

        Ok(MomentPolytope {
            rank: r,
            halfspaces,
            vertices,
            dilated_vertices,
            chamber_halfspaces,
            chamber_vertices,
            triangulation,
            fano,
            warnings,
            tol,
        })
    }

    /// Axis box `[-h_i, h_i]` for `P`.
    pub fn cube(half_widths: &[S], datum: &RootDatum<S>) -> Result<Self> {
        Self::build(box_halfspaces(half_widths), datum)
    }

    pub fn chamber_volume(&self) -> S {
        self.triangulation
            .iter()
            .fold(S::zero(), |acc, s| acc + simplex_volume(s))
    }

    /// `y` in `2P` up to the polytope tolerance.
    pub fn in_dilate(&self, y: &[S]) -> bool {
        let two = sint::<S>(2);
        self.halfspaces
            .iter()
            .all(|h| h.offset.clone() * two.clone() - linalg::dot(&h.normal, y) >= -self.tol.clone())
    }

    /// `y` strictly inside `2P`.
    pub fn in_dilate_interior(&self, y: &[S]) -> bool {
        let two = sint::<S>(2);
        self.halfspaces
            .iter()
            .all(|h| h.offset.clone() * two.clone() - linalg::dot(&h.normal, y) > self.tol.clone())
    }

    /// Triangulation of `2P_+` coning from `apex` over the pulling
    /// triangulations of the facets that miss it.
    pub fn cone_triangulation(&self, apex: &[S]) -> Vec<Simplex<S>> {
        cone_triangulation(&self.chamber_vertices, &self.chamber_halfspaces, apex, &self.tol)
    }

    /// Centroid of the vertices of `2P_+`, an interior point.
    pub fn chamber_centroid(&self) -> Vec<S> {
        let n = sint::<S>(self.chamber_vertices.len() as i64);
        let mut c = vec![S::zero(); self.rank];
        for v in &self.chamber_vertices {
            c = linalg::add(&c, v);
        }
        c.iter().map(|x| x.clone() / n.clone()).collect()
    }

    /// Largest distance between two vertices of `2P` (sup norm).
    pub fn dilate_diameter(&self) -> S {
        let mut best = S::zero();
        for a in &self.dilated_vertices {
            for b in &self.dilated_vertices {
                let d = sup_norm(&linalg::sub(a, b));
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    pub fn convert<T: Scalar>(&self) -> MomentPolytope<T> {
        let cv = |v: &Vec<S>| -> Vec<T> { v.iter().map(|x| T::from_float(x.as_f64()).unwrap_or_else(T::zero)).collect() };
        let cs = |x: &S| T::from_float(x.as_f64()).unwrap_or_else(T::zero);
        let ch = |h: &Halfspace<S>| Halfspace { normal: cv(&h.normal), offset: cs(&h.offset) };
        MomentPolytope {
            rank: self.rank,
            halfspaces: self.halfspaces.iter().map(ch).collect(),
            vertices: self.vertices.iter().map(cv).collect(),
            dilated_vertices: self.dilated_vertices.iter().map(cv).collect(),
            chamber_halfspaces: self.chamber_halfspaces.iter().map(ch).collect(),
            chamber_vertices: self.chamber_vertices.iter().map(cv).collect(),
            triangulation: self.triangulation.iter().map(|s| s.iter().map(cv).collect()).collect(),
            fano: self.fano,
            warnings: self.warnings.clone(),
            tol: if T::EXACT { T::zero() } else { T::default_tol() },
        }
    }
}

pub fn box_halfspaces<S: Scalar>(half_widths: &[S]) -> Vec<Halfspace<S>> {
    let r = half_widths.len();
    let mut hs = Vec::with_capacity(2 * r);
    for (i, h) in half_widths.iter().enumerate() {
        for sign in [1i64, -1] {
            let mut n = vec![S::zero(); r];
            n[i] = sint(sign);
            hs.push(Halfspace::new(n, h.clone()));
        }
    }
    hs
}

/// Volume of an `r`-simplex given by `r + 1` vertices.
pub fn simplex_volume<S: Scalar>(s: &Simplex<S>) -> S {
    let r = s.len() - 1;
    let m: Vec<Vec<S>> = s[1..].iter().map(|v| linalg::sub(v, &s[0])).collect();
    linalg::determinant(&m, &S::zero()).abs() / factorial::<S>(r)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Vertices of `{y : <l_k, y> <= c_k}` by solving every nonsingular
/// `r`-subset of tight constraints; lexicographically sorted.
pub fn enumerate_vertices<S: Scalar>(halfspaces: &[Halfspace<S>], r: usize, tol: &S) -> Vec<Vec<S>> {
    let mut found: Vec<Vec<S>> = Vec::new();
    for idx in subsets(halfspaces.len(), r) {
        let a: Vec<Vec<S>> = idx.iter().map(|&i| halfspaces[i].normal.clone()).collect();
        let b: Vec<S> = idx.iter().map(|&i| halfspaces[i].offset.clone()).collect();
        let Some(x) = linalg::solve(&a, &b, tol) else { continue };
        if halfspaces.iter().all(|h| h.slack(&x) >= -tol.clone())
            && !found.iter().any(|v| linalg::approx_eq(v, &x, tol))
        {
            found.push(x);
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    found
}

fn is_bounded<S: Scalar>(halfspaces: &[Halfspace<S>], r: usize, tol: &S) -> bool {
    // the recession cone {d : <l_k, d> <= 0} meets the unit box only at 0
    let mut cone: Vec<Halfspace<S>> = halfspaces
        .iter()
        .map(|h| Halfspace::new(h.normal.clone(), S::zero()))
        .collect();
    cone.extend(box_halfspaces(&vec![S::one(); r]));
    enumerate_vertices(&cone, r, tol)
        .iter()
        .all(|v| sup_norm(v) <= *tol)
}

fn check_invariance<S: Scalar>(vertices: &[Vec<S>], datum: &RootDatum<S>, tol: &S) -> Result<()> {
    for &si in &datum.simple_reflections {
        let w = &datum.weyl_elements[si];
        for v in vertices {
            let image = linalg::mat_vec(w, v);
            if !vertices.iter().any(|u| linalg::approx_eq(u, &image, tol)) {
                return Err(Error::NotWInvariant { element: si, vertex: linalg::to_f64_vec(v) });
            }
        }
    }
    Ok(())
}

fn tight_sets<S: Scalar>(vertices: &[Vec<S>], halfspaces: &[Halfspace<S>], tol: &S) -> Vec<BTreeSet<usize>> {
    halfspaces
        .iter()
        .map(|h| {
            (0..vertices.len())
                .filter(|&i| h.slack(&vertices[i]).abs() <= *tol)
                .collect()
        })
        .collect()
}

fn face_dim<S: Scalar>(vertices: &[Vec<S>], face: &BTreeSet<usize>, tol: &S) -> usize {
    let pts: Vec<Vec<S>> = face.iter().map(|&i| vertices[i].clone()).collect();
    linalg::affine_dim(&pts, tol)
}

/// Facets of `face` (dimension `dim`) as vertex-index sets, deduplicated.
fn facets<S: Scalar>(
    vertices: &[Vec<S>],
    tight: &[BTreeSet<usize>],
    face: &BTreeSet<usize>,
    dim: usize,
    tol: &S,
) -> Vec<BTreeSet<usize>> {
    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    for t in tight {
        let f: BTreeSet<usize> = face.intersection(t).copied().collect();
        if f.len() < dim || f.len() == face.len() || out.contains(&f) {
            continue;
        }
        if face_dim(vertices, &f, tol) + 1 == dim {
            out.push(f);
        }
    }
    out
}

fn pull_face<S: Scalar>(
    vertices: &[Vec<S>],
    tight: &[BTreeSet<usize>],
    face: &BTreeSet<usize>,
    dim: usize,
    tol: &S,
) -> Vec<Vec<usize>> {
    let apex = *face.iter().next().expect("nonempty face");
    if dim == 0 {
        return vec![vec![apex]];
    }
    let mut out = Vec::new();
    for f in facets(vertices, tight, face, dim, tol) {
        if f.contains(&apex) {
            continue;
        }
        for mut s in pull_face(vertices, tight, &f, dim - 1, tol) {
            s.insert(0, apex);
            out.push(s);
        }
    }
    out
}

/// Pulling triangulation from the lexicographically smallest vertex,
/// recursing through facets.
pub fn pulling_triangulation<S: Scalar>(vertices: &[Vec<S>], halfspaces: &[Halfspace<S>], tol: &S) -> Vec<Simplex<S>> {
    let r = vertices.first().map_or(0, Vec::len);
    let tight = tight_sets(vertices, halfspaces, tol);
    let all: BTreeSet<usize> = (0..vertices.len()).collect();
    pull_face(vertices, &tight, &all, r, tol)
        .into_iter()
        .map(|s| s.into_iter().map(|i| vertices[i].clone()).collect())
        .collect()
}

pub fn cone_triangulation<S: Scalar>(
    vertices: &[Vec<S>],
    halfspaces: &[Halfspace<S>],
    apex: &[S],
    tol: &S,
) -> Vec<Simplex<S>> {
    let r = apex.len();
    let tight = tight_sets(vertices, halfspaces, tol);
    let all: BTreeSet<usize> = (0..vertices.len()).collect();
    let mut out = Vec::new();
    for f in facets(vertices, &tight, &all, r, tol) {
        let on_facet = halfspaces
            .iter()
            .zip(&tight)
            .any(|(h, t)| f.is_subset(t) && h.slack(apex).abs() <= *tol);
        if on_facet {
            continue;
        }
        for s in pull_face(vertices, &tight, &f, r - 1, tol) {
            let mut simplex = vec![apex.to_vec()];
            simplex.extend(s.into_iter().map(|i| vertices[i].clone()));
            out.push(simplex);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::CartanType;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn a1() -> RootDatum<Q> {
        RootDatum::explicit(linalg::identity(1), vec![vec![q(2, 1)]]).unwrap()
    }

    #[test]
    fn square_with_toric_datum() {
        let d = RootDatum::<Q>::toric(2).unwrap();
        let p = MomentPolytope::cube(&[q(1, 1), q(1, 1)], &d).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(p.chamber_vertices.len(), 4);
        assert_eq!(p.chamber_volume(), q(16, 1));
        assert!(p.fano);
    }

    #[test]
    fn a1_interval_slices() {
        let p = MomentPolytope::cube(&[q(2, 1)], &a1()).unwrap();
        assert_eq!(p.chamber_vertices, vec![vec![q(0, 1)], vec![q(4, 1)]]);
        assert_eq!(p.warnings, vec![Warning::Fano]);
        let p = MomentPolytope::cube(&[q(3, 1)], &a1()).unwrap();
        assert_eq!(p.chamber_volume(), q(6, 1));
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn rejects_unbounded_flat_and_asymmetric() {
        let d = RootDatum::<Q>::toric(2).unwrap();
        let half = vec![Halfspace::new(vec![q(1, 1), q(0, 1)], q(1, 1))];
        assert_eq!(MomentPolytope::build(half, &d).unwrap_err(), Error::Unbounded);

        let mut flat = box_halfspaces(&[q(1, 1), q(1, 1)]);
        flat[1].offset = q(-1, 1);
        assert!(matches!(MomentPolytope::build(flat, &d), Err(Error::LowerDimensional { .. })));

        let mut skew = box_halfspaces(&[q(1, 1)]);
        skew[0].offset = q(2, 1);
        assert!(matches!(MomentPolytope::build(skew, &a1()), Err(Error::NotWInvariant { .. })));
    }

    #[test]
    fn b2_square_chamber_volume_times_weyl_order() {
        let d = RootDatum::<Q>::explicit(linalg::identity(2), vec![vec![q(1, 1), q(-1, 1)], vec![q(0, 1), q(1, 1)]]).unwrap();
        let p = MomentPolytope::cube(&[q(1, 1), q(1, 1)], &d).unwrap();
        assert_eq!(p.chamber_volume() * q(8, 1), q(16, 1));
        for v in &p.chamber_vertices {
            assert!(d.in_chamber(v, &q(0, 1)));
        }
        let cone = p.cone_triangulation(&p.chamber_centroid());
        let vol = cone.iter().fold(q(0, 1), |a, s| a + simplex_volume(s));
        assert_eq!(vol, q(2, 1));
    }

    #[test]
    fn a2_hexagon_images_tile_the_dilate() {
        let d = RootDatum::<Q>::named(&[CartanType::A(2)], 0).unwrap();
        // permutohedron-like hexagon in the plane sum = 0, cut by |y_i - y_j| <= 2
        let mut hs = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let mut n = vec![q(0, 1); 3];
                    n[i] = q(1, 1);
                    n[j] = q(-1, 1);
                    hs.push(Halfspace::new(n, q(2, 1)));
                }
            }
        }
        hs.push(Halfspace::new(vec![q(1, 1); 3], q(1, 1)));
        hs.push(Halfspace::new(vec![q(-1, 1); 3], q(1, 1)));
        let p = MomentPolytope::build(hs, &d).unwrap();
        let total = p.chamber_volume() * q(6, 1);
        let full = pulling_triangulation(
            &enumerate_vertices(&{
                let mut h = p.halfspaces.clone();
                for x in &mut h {
                    x.offset = x.offset.clone() * q(2, 1);
                }
                h
            }, 3, &q(0, 1)),
            &p.halfspaces.iter().map(|h| Halfspace::new(h.normal.clone(), h.offset.clone() * q(2, 1))).collect::<Vec<_>>(),
            &q(0, 1),
        );
        let full_vol = full.iter().fold(q(0, 1), |a, s| a + simplex_volume(s));
        assert_eq!(total, full_vol);
    }
}
