//! Root data, Weyl groups and the cone spanned by positive roots.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{half, sint, Scalar};

pub const DEFAULT_WEYL_CAP: usize = 10_000;

/// Irreducible Cartan types with their standard rational realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartanType {
    /// `A_n` in the sum-zero hyperplane of `R^{n+1}`.
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    /// `G_2` in the sum-zero hyperplane of `R^3`.
    G2,
}

impl CartanType {
    pub fn ambient_dim(self) -> usize {
        match self {
            CartanType::A(n) => n + 1,
            CartanType::B(n) | CartanType::C(n) | CartanType::D(n) => n,
            CartanType::G2 => 3,
        }
    }

    fn simple_roots(self) -> Vec<Vec<i64>> {
        let e = |dim: usize, pairs: &[(usize, i64)]| {
            let mut v = vec![0; dim];
            for &(i, c) in pairs {
                v[i] += c;
            }
            v
        };
        match self {
            CartanType::A(n) => (0..n).map(|i| e(n + 1, &[(i, 1), (i + 1, -1)])).collect(),
            CartanType::B(n) | CartanType::C(n) => {
                let mut roots: Vec<_> = (0..n - 1).map(|i| e(n, &[(i, 1), (i + 1, -1)])).collect();
                let last = if matches!(self, CartanType::B(_)) { 1 } else { 2 };
                roots.push(e(n, &[(n - 1, last)]));
                roots
            }
            CartanType::D(n) => {
                let mut roots: Vec<_> = (0..n - 1).map(|i| e(n, &[(i, 1), (i + 1, -1)])).collect();
                roots.push(e(n, &[(n - 2, 1), (n - 1, 1)]));
                roots
            }
            CartanType::G2 => vec![vec![1, -1, 0], vec![-2, 1, 1]],
        }
    }

    fn validate(self) -> Result<()> {
        let ok = match self {
            CartanType::A(n) => n >= 1,
            CartanType::B(n) | CartanType::C(n) => n >= 2,
            CartanType::D(n) => n >= 3,
            CartanType::G2 => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("unsupported Cartan type {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeClass {
    Interior,
    Boundary,
    Outside,
}

/// Result of decomposing `v = sum c_i alpha_i + w` with `w` toric.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePosition<S> {
    pub class: ConeClass,
    pub coeffs: Vec<S>,
    pub residual: Vec<S>,
}

impl<S: Scalar> ConePosition<S> {
    /// Smallest simple-root coefficient, `None` without roots.
    pub fn min_coeff(&self) -> Option<S> {
        self.coeffs
            .iter()
            .cloned()
            .reduce(|a, b| if b < a { b } else { a })
    }

    /// Sup norm of the toric residual.
    pub fn residual_norm(&self) -> S {
        sup_norm(&self.residual)
    }
}

pub(crate) fn sup_norm<S: Scalar>(v: &[S]) -> S {
    v.iter()
        .map(Signed::abs)
        .fold(S::zero(), |a, b| if b > a { b } else { a })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootDatum<S> {
    pub rank: usize,
    pub gram: Matrix<S>,
    pub simple_roots: Vec<Vec<S>>,
    pub positive_roots: Vec<Vec<S>>,
    /// Positive roots in simple-root coordinates.
    pub root_coords: Vec<Vec<i64>>,
    /// `cartan[i][j] = 2<a_i,a_j>/<a_j,a_j>`.
    pub cartan: Vec<Vec<i64>>,
    /// Ambient matrices acting on `a*`; index 0 is the identity.
    pub weyl_elements: Vec<Matrix<S>>,
    /// Indices into `weyl_elements` of the simple reflections.
    pub simple_reflections: Vec<usize>,
    pub rho: Vec<S>,
    pub toric_basis: Vec<Vec<S>>,
    pub manifold_dim: usize,
    /// Maps `v` to its simple-root coefficients, `(A^T G A)^{-1} A^T G`.
    coeff_map: Matrix<S>,
}

impl<S: Scalar> RootDatum<S> {
    /// Builds a datum from an explicit gram matrix and simple roots.
    pub fn explicit(gram: Matrix<S>, simple_roots: Vec<Vec<S>>) -> Result<Self> {
        Self::explicit_with_cap(gram, simple_roots, DEFAULT_WEYL_CAP)
    }

    pub fn explicit_with_cap(gram: Matrix<S>, simple_roots: Vec<Vec<S>>, cap: usize) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        for row in &gram {
            if row.len() != rank {
                return Err(Error::DimensionMismatch { expected: rank, found: row.len() });
            }
        }
        for root in &simple_roots {
            if root.len() != rank {
                return Err(Error::DimensionMismatch { expected: rank, found: root.len() });
            }
        }
        let tol = S::default_tol();
        let symmetric = (0..rank).all(|i| (0..i).all(|j| (gram[i][j].clone() - gram[j][i].clone()).abs() <= tol));
        if !symmetric || linalg::ldl_pivots(&gram).iter().any(|p| *p <= tol) || linalg::ldl_pivots(&gram).len() < rank {
            return Err(Error::NonPositiveGram);
        }
        let s = simple_roots.len();
        if linalg::rank(&simple_roots, &tol) < s {
            return Err(Error::DependentRoots);
        }

        let mut cartan = vec![vec![0i64; s]; s];
        for i in 0..s {
            for j in 0..s {
                let num = sint::<S>(2) * linalg::pair(&gram, &simple_roots[i], &simple_roots[j]);
                let den = linalg::pair(&gram, &simple_roots[j], &simple_roots[j]);
                let q = num / den;
                match q.as_integer(&integer_tol::<S>()) {
                    Some(k) if i == j || k <= 0 => cartan[i][j] = k,
                    _ => return Err(Error::NonCrystallographic { i, j }),
                }
            }
        }

        let root_coords = positive_root_coords(&cartan, cap)?;
        let simple_mats = simple_reflection_matrices(&cartan);
        let group = close_group(&simple_mats, cap)?;

        // v = A c + w with A^T G w = 0
        let a_cols = &simple_roots;
        let coeff_map: Matrix<S> = if s == 0 {
            Vec::new()
        } else {
            let agram: Matrix<S> = a_cols
                .iter()
                .map(|ai| a_cols.iter().map(|aj| linalg::pair(&gram, ai, aj)).collect())
                .collect();
            let inv = linalg::inverse(&agram, &tol).ok_or(Error::DependentRoots)?;
            let atg: Matrix<S> = a_cols.iter().map(|ai| linalg::mat_vec(&gram, ai)).collect();
            linalg::mat_mul(&inv, &atg)
        };

        let to_ambient = |coords: &[i64]| -> Vec<S> {
            let mut v = vec![S::zero(); rank];
            for (c, root) in coords.iter().zip(a_cols) {
                for (vk, rk) in v.iter_mut().zip(root) {
                    *vk = vk.clone() + sint::<S>(*c) * rk.clone();
                }
            }
            v
        };
        let positive_roots: Vec<Vec<S>> = root_coords.iter().map(|c| to_ambient(c)).collect();

        let weyl_elements: Vec<Matrix<S>> = group
            .elements
            .iter()
            .map(|m| {
                // W = I + A (M - I) C, M acting on coefficient columns
                let mut w = linalg::identity::<S>(rank);
                for p in 0..s {
                    for q in 0..s {
                        let d = m[p][q] - i64::from(p == q);
                        if d == 0 {
                            continue;
                        }
                        for i in 0..rank {
                            for j in 0..rank {
                                let t = sint::<S>(d) * a_cols[p][i].clone() * coeff_map[q][j].clone();
                                w[i][j] = w[i][j].clone() + t;
                            }
                        }
                    }
                }
                w
            })
            .collect();

        let mut rho = vec![S::zero(); rank];
        for root in &positive_roots {
            rho = linalg::add(&rho, root);
        }
        let rho = linalg::scale(&rho, &half());

        let constraints: Vec<Vec<S>> = simple_roots.iter().map(|a| linalg::mat_vec(&gram, a)).collect();
        let toric_basis = linalg::nullspace(&constraints, rank, &tol);
        let manifold_dim = rank + 2 * positive_roots.len();

        Ok(RootDatum {
            rank,
            gram,
            simple_roots,
            positive_roots,
            root_coords,
            cartan,
            weyl_elements,
            simple_reflections: group.simple_indices,
            rho,
            toric_basis,
            manifold_dim,
            coeff_map,
        })
    }

    /// Product of named types, padded with `toric` extra central coordinates;
    /// identity gram.
    pub fn named(types: &[CartanType], toric: usize) -> Result<Self> {
        let mut rank = toric;
        for t in types {
            t.validate()?;
            rank += t.ambient_dim();
        }
        let mut roots = Vec::new();
        let mut offset = 0;
        for t in types {
            for r in t.simple_roots() {
                let mut v = vec![S::zero(); rank];
                for (k, c) in r.into_iter().enumerate() {
                    v[offset + k] = sint(c);
                }
                roots.push(v);
            }
            offset += t.ambient_dim();
        }
        Self::explicit(linalg::identity(rank), roots)
    }

    /// Purely toric datum of rank `r`.
    pub fn toric(rank: usize) -> Result<Self> {
        Self::explicit(linalg::identity(rank), Vec::new())
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl_elements.len()
    }

    pub fn toric_rank(&self) -> usize {
        self.toric_basis.len()
    }

    pub fn pair(&self, a: &[S], b: &[S]) -> S {
        linalg::pair(&self.gram, a, b)
    }

    /// Simple-root coefficients of the projection of `v` onto their span.
    pub fn simple_coeffs(&self, v: &[S]) -> Vec<S> {
        linalg::mat_vec(&self.coeff_map, v)
    }

    /// `y` lies in the closed chamber `<alpha, y> >= -tol` for all simple roots.
    pub fn in_chamber(&self, y: &[S], tol: &S) -> bool {
        self.simple_roots.iter().all(|a| self.pair(a, y) >= -tol.clone())
    }

    /// Fundamental coweights `A (A^T G A)^{-1}` expressed as vectors in `a*`;
    /// `<alpha_i, w_j> = delta_ij` and each is G-orthogonal to the toric part.
    pub fn fundamental_coweights(&self) -> Vec<Vec<S>> {
        let s = self.simple_roots.len();
        let agram: Matrix<S> = self
            .simple_roots
            .iter()
            .map(|ai| self.simple_roots.iter().map(|aj| self.pair(ai, aj)).collect())
            .collect();
        let Some(inv) = linalg::inverse(&agram, &S::default_tol()) else { return Vec::new() };
        (0..s)
            .map(|j| {
                let mut v = vec![S::zero(); self.rank];
                for (p, root) in self.simple_roots.iter().enumerate() {
                    v = linalg::add(&v, &linalg::scale(root, &inv[p][j]));
                }
                v
            })
            .collect()
    }

    pub fn cone_position(&self, v: &[S], tol: &S) -> Result<ConePosition<S>> {
        if v.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: v.len() });
        }
        let coeffs = self.simple_coeffs(v);
        let mut residual = v.to_vec();
        for (c, root) in coeffs.iter().zip(&self.simple_roots) {
            residual = linalg::sub(&residual, &linalg::scale(root, c));
        }
        let class = if sup_norm(&residual) > *tol {
            ConeClass::Outside
        } else if coeffs.iter().all(|c| c > tol) {
            ConeClass::Interior
        } else if coeffs.iter().all(|c| *c >= -tol.clone()) {
            ConeClass::Boundary
        } else {
            ConeClass::Outside
        };
        Ok(ConePosition { class, coeffs, residual })
    }

    /// Converts every field to another scalar type through `f64`.
    pub fn convert<T: Scalar>(&self) -> RootDatum<T> {
        let cv = |v: &Vec<S>| -> Vec<T> { v.iter().map(|x| T::from_float(x.as_f64()).unwrap_or_else(T::zero)).collect() };
        let cm = |m: &Matrix<S>| -> Matrix<T> { m.iter().map(cv).collect() };
        RootDatum {
            rank: self.rank,
            gram: cm(&self.gram),
            simple_roots: cm(&self.simple_roots),
            positive_roots: cm(&self.positive_roots),
            root_coords: self.root_coords.clone(),
            cartan: self.cartan.clone(),
            weyl_elements: self.weyl_elements.iter().map(cm).collect(),
            simple_reflections: self.simple_reflections.clone(),
            rho: cv(&self.rho),
            toric_basis: cm(&self.toric_basis),
            manifold_dim: self.manifold_dim,
            coeff_map: cm(&self.coeff_map),
        }
    }
}

fn integer_tol<S: Scalar>() -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::from_ratio(1, 1_000_000)
    }
}

/// Positive roots by reflection closure of the simple roots, as integer
/// coefficient vectors.
fn positive_root_coords(cartan: &[Vec<i64>], cap: usize) -> Result<Vec<Vec<i64>>> {
    let s = cartan.len();
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for i in 0..s {
        let mut e = vec![0; s];
        e[i] = 1;
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(beta) = queue.pop_front() {
        order.push(beta.clone());
        if order.len() > cap {
            return Err(Error::WeylOverflow { cap });
        }
        for i in 0..s {
            let pairing: i64 = (0..s).map(|j| beta[j] * cartan[j][i]).sum();
            let mut image = beta.clone();
            image[i] -= pairing;
            if image.iter().all(|&c| c >= 0) && image.iter().any(|&c| c > 0) && seen.insert(image.clone()) {
                queue.push_back(image);
            }
        }
    }
    order.sort_by(|a, b| {
        let ha: i64 = a.iter().sum();
        let hb: i64 = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    Ok(order)
}

/// `s_i` on simple-root coordinates: `s_i(a_j) = a_j - cartan[j][i] a_i`.
fn simple_reflection_matrices(cartan: &[Vec<i64>]) -> Vec<Vec<Vec<i64>>> {
    let s = cartan.len();
    (0..s)
        .map(|i| {
            let mut m = vec![vec![0i64; s]; s];
            for (j, row) in m.iter_mut().enumerate() {
                row[j] = 1;
            }
            for j in 0..s {
                m[i][j] -= cartan[j][i];
            }
            m
        })
        .collect()
}

struct Group {
    elements: Vec<Vec<Vec<i64>>>,
    simple_indices: Vec<usize>,
}

fn close_group(generators: &[Vec<Vec<i64>>], cap: usize) -> Result<Group> {
    let s = generators.len();
    let mut id = vec![vec![0i64; s]; s];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = 1;
    }
    let mut index: BTreeMap<Vec<Vec<i64>>, usize> = BTreeMap::new();
    let mut elements = vec![id.clone()];
    index.insert(id, 0);
    let mut cursor = 0;
    while cursor < elements.len() {
        let current = elements[cursor].clone();
        for g in generators {
            let prod = int_mul(g, &current);
            if !index.contains_key(&prod) {
                if elements.len() >= cap {
                    return Err(Error::WeylOverflow { cap });
                }
                index.insert(prod.clone(), elements.len());
                elements.push(prod);
            }
        }
        cursor += 1;
    }
    let simple_indices = generators.iter().map(|g| index[g]).collect();
    Ok(Group { elements, simple_indices })
}

fn int_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}
