//! The extremal vector field, its affine potential and the Futaki invariant.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::MomentPolytope;
use crate::linalg::{self, Matrix};
use crate::quad::MomentTable;
use crate::rootsys::RootDatum;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalData<S> {
    /// Coefficients of `X` in the toric basis.
    pub x: Vec<S>,
    /// `X` as a vector of `a*`.
    pub x_vec: Vec<S>,
    /// `theta(y) = <theta_slope, y> + theta_const`.
    pub theta_slope: Vec<S>,
    pub theta_const: S,
    pub c_x: S,
    pub cap_c_x: S,
    pub a_matrix: Matrix<S>,
}

impl<S: Scalar> ExtremalData<S> {
    pub fn theta(&self, y: &[S]) -> S {
        linalg::dot(&self.theta_slope, y) + self.theta_const.clone()
    }

    /// `1 - theta(y)`
    pub fn weight(&self, y: &[S]) -> S {
        S::one() - self.theta(y)
    }

    pub fn convert<T: Scalar>(&self) -> ExtremalData<T> {
        let c = |x: &S| T::from_float(x.as_f64()).unwrap_or_else(T::zero);
        ExtremalData {
            x: self.x.iter().map(c).collect(),
            x_vec: self.x_vec.iter().map(c).collect(),
            theta_slope: self.theta_slope.iter().map(c).collect(),
            theta_const: c(&self.theta_const),
            c_x: c(&self.c_x),
            cap_c_x: c(&self.cap_c_x),
            a_matrix: self.a_matrix.iter().map(|r| r.iter().map(c).collect()).collect(),
        }
    }
}

/// Solves `a X = (<t_k, b>)_k` in the toric basis.
pub fn solve_extremal<S: Scalar>(
    datum: &RootDatum<S>,
    table: &MomentTable<S>,
    polytope: &MomentPolytope<S>,
) -> Result<ExtremalData<S>> {
    let r = datum.rank;
    let basis = &datum.toric_basis;
    let rz = basis.len();
    let gt: Vec<Vec<S>> = basis.iter().map(|t| linalg::mat_vec(&datum.gram, t)).collect();
    let tb: Vec<S> = gt.iter().map(|g| linalg::dot(g, &table.barycenter)).collect();
    let second_over_v: Matrix<S> = table
        .second
        .iter()
        .map(|row| row.iter().map(|m| m.clone() / table.volume.clone()).collect())
        .collect();
    let a_matrix: Matrix<S> = (0..rz)
        .map(|k| {
            (0..rz)
                .map(|l| linalg::dot(&gt[k], &linalg::mat_vec(&second_over_v, &gt[l])) - tb[k].clone() * tb[l].clone())
                .collect()
        })
        .collect();

    let x = if rz == 0 {
        Vec::new()
    } else {
        let trace = (0..rz).fold(S::zero(), |acc, i| acc + a_matrix[i][i].clone());
        let floor = if S::EXACT { S::zero() } else { trace * S::from_ratio(1, 1_000_000_000_000) };
        let pivots = linalg::ldl_pivots(&a_matrix);
        if pivots.len() < rz || pivots.iter().any(|p| *p <= floor) {
            return Err(Error::SingularMomentMatrix);
        }
        linalg::solve(&a_matrix, &tb, &S::zero()).ok_or(Error::SingularMomentMatrix)?
    };

    let mut x_vec = alloc::vec![S::zero(); r];
    for (xk, t) in x.iter().zip(basis) {
        x_vec = linalg::add(&x_vec, &linalg::scale(t, xk));
    }
    let theta_slope = linalg::mat_vec(&datum.gram, &x_vec);
    let theta_const = -linalg::dot(&theta_slope, &table.barycenter);

    let mut c_x: Option<S> = None;
    let mut cap_c_x: Option<S> = None;
    for v in &polytope.dilated_vertices {
        let w = S::one() - (linalg::dot(&theta_slope, v) + theta_const.clone());
        if c_x.as_ref().is_none_or(|c| w < *c) {
            c_x = Some(w.clone());
        }
        if cap_c_x.as_ref().is_none_or(|c| w > *c) {
            cap_c_x = Some(w);
        }
    }

    Ok(ExtremalData {
        x,
        x_vec,
        theta_slope,
        theta_const,
        c_x: c_x.unwrap_or_else(S::one),
        cap_c_x: cap_c_x.unwrap_or_else(S::one),
        a_matrix,
    })
}

/// `Fut(Y) = -V <Y, b>` for central `Y`.
pub fn futaki<S: Scalar>(datum: &RootDatum<S>, table: &MomentTable<S>, y: &[S], tol: &S) -> Result<S> {
    if y.len() != datum.rank {
        return Err(Error::DimensionMismatch { expected: datum.rank, found: y.len() });
    }
    for (i, a) in datum.positive_roots.iter().enumerate() {
        if datum.pair(a, y).abs() > *tol {
            return Err(Error::NotCentral { root: i });
        }
    }
    Ok(-(table.volume.clone() * datum.pair(y, &table.barycenter)))
}
