//! Small dense linear algebra over [`Scalar`]; row-major `Vec<Vec<S>>`.

use alloc::vec;
use alloc::vec::Vec;

use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn mat_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vec<S> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(S::zero(), |acc, (x, brow)| acc + x.clone() * brow[j].clone())
                })
                .collect()
        })
        .collect()
}

pub fn transpose<S: Scalar>(m: &Matrix<S>) -> Matrix<S> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn scale<S: Scalar>(a: &[S], k: &S) -> Vec<S> {
    a.iter().map(|x| x.clone() * k.clone()).collect()
}

/// Bilinear form `aᵀ G b`.
pub fn pair<S: Scalar>(gram: &Matrix<S>, a: &[S], b: &[S]) -> S {
    dot(a, &mat_vec(gram, b))
}

fn pivot_row<S: Scalar>(m: &Matrix<S>, col: usize, from: usize, tol: &S) -> Option<usize> {
    let mut best: Option<usize> = None;
    for r in from..m.len() {
        let v = m[r][col].abs();
        if v > *tol && best.is_none_or(|b| v > m[b][col].abs()) {
            best = Some(r);
        }
    }
    best
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref<S: Scalar>(m: &mut Matrix<S>, tol: &S) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pivot_row(m, c, r, tol) else { continue };
        m.swap(r, p);
        let inv = S::one() / m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = m[r][j].clone() * f.clone();
                    m[i][j] = m[i][j].clone() - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Scalar>(rows: &[Vec<S>], tol: &S) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, tol).len()
}

/// Basis of `{x : M x = 0}`.
pub fn nullspace<S: Scalar>(rows: &[Vec<S>], ncols: usize, tol: &S) -> Vec<Vec<S>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, tol);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); ncols];
            v[f] = S::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves the square system `A x = b`; `None` if singular.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S], tol: &S) -> Option<Vec<S>> {
    let n = a.len();
    let mut aug: Matrix<S> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, tol);
    if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n].clone()).collect())
}

pub fn inverse<S: Scalar>(a: &Matrix<S>, tol: &S) -> Option<Matrix<S>> {
    let n = a.len();
    let mut aug: Matrix<S> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, tol);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn determinant<S: Scalar>(a: &Matrix<S>, tol: &S) -> S {
    let n = a.len();
    let mut m = a.clone();
    let mut det = S::one();
    for c in 0..n {
        let Some(p) = pivot_row(&m, c, c, tol) else { return S::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det = det * m[c][c].clone();
        for i in c + 1..n {
            let f = m[i][c].clone() / m[c][c].clone();
            for j in c..n {
                let t = m[c][j].clone() * f.clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
    }
    det
}

/// Square-root-free `LDLᵀ` pivots of a symmetric matrix; the matrix is
/// positive definite iff every pivot is positive.
pub fn ldl_pivots<S: Scalar>(a: &Matrix<S>) -> Vec<S> {
    let n = a.len();
    let mut m = a.clone();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let d = m[k][k].clone();
        pivots.push(d.clone());
        if d.is_zero() {
            break;
        }
        for i in k + 1..n {
            let f = m[i][k].clone() / d.clone();
            for j in k..n {
                let t = m[k][j].clone() * f.clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
    }
    pivots
}

/// Affine dimension of a point set.
pub fn affine_dim<S: Scalar>(points: &[Vec<S>], tol: &S) -> usize {
    let Some(first) = points.first() else { return 0 };
    let diffs: Vec<Vec<S>> = points[1..].iter().map(|p| sub(p, first)).collect();
    if diffs.is_empty() {
        0
    } else {
        rank(&diffs, tol)
    }
}

pub fn approx_eq<S: Scalar>(a: &[S], b: &[S], tol: &S) -> bool {
    a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).abs() <= *tol)
}

pub fn to_f64_vec<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(Scalar::as_f64).collect()
}

pub fn to_f64_mat<S: Scalar>(m: &Matrix<S>) -> Matrix<f64> {
    m.iter().map(|r| to_f64_vec(r)).collect()
}
