//! Lower convex hulls of lifted point sets in rank 1 and 2.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::cells::{convex_hull_2d, Point2};
use crate::error::{Error, Result};

/// One affine piece of the hull over a convex cell of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HullCell {
    /// Segment endpoints (rank 1) or counterclockwise polygon (rank 2).
    pub vertices: Vec<Vec<f64>>,
    /// Input points lying on this piece.
    pub members: Vec<usize>,
    pub grad: Vec<f64>,
    pub intercept: f64,
}

impl HullCell {
    pub fn value(&self, y: &[f64]) -> f64 {
        self.grad.iter().zip(y).map(|(g, v)| g * v).sum::<f64>() + self.intercept
    }

    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        if self.vertices.len() == 2 && y.len() == 1 {
            let (a, b) = (self.vertices[0][0], self.vertices[1][0]);
            return y[0] >= a.min(b) - tol && y[0] <= a.max(b) + tol;
        }
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
            let cross = (b[0] - a[0]) * (y[1] - a[1]) - (b[1] - a[1]) * (y[0] - a[0]);
            let len = libm::hypot(b[0] - a[0], b[1] - a[1]);
            cross >= -tol * len
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerHull {
    pub rank: usize,
    pub cells: Vec<HullCell>,
    /// Convex hull of the projected points (rank 2) or its endpoints.
    pub domain: Vec<Vec<f64>>,
    pub tol: f64,
}

impl LowerHull {
    pub fn build(points: &[Vec<f64>], values: &[f64]) -> Result<Self> {
        let rank = points.first().map_or(0, Vec::len);
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
            + points.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-10 * scale;
        match rank {
            1 => Ok(hull_1d(points, values, tol)),
            2 => hull_2d(points, values, tol),
            r => Err(Error::RankTooHigh { rank: r }),
        }
    }

    pub fn in_domain(&self, y: &[f64]) -> bool {
        let tol = self.tol;
        if self.rank == 1 {
            return y[0] >= self.domain[0][0] - tol && y[0] <= self.domain[1][0] + tol;
        }
        let n = self.domain.len();
        (0..n).all(|i| {
            let (a, b) = (&self.domain[i], &self.domain[(i + 1) % n]);
            let cross = (b[0] - a[0]) * (y[1] - a[1]) - (b[1] - a[1]) * (y[0] - a[0]);
            cross >= -tol * libm::hypot(b[0] - a[0], b[1] - a[1])
        })
    }

    /// Hull value, `None` outside the domain.
    pub fn eval(&self, y: &[f64]) -> Option<f64> {
        if !self.in_domain(y) {
            return None;
        }
        self.cells.iter().map(|c| c.value(y)).reduce(f64::max)
    }

    /// Cells whose closure contains `y`.
    pub fn cells_at(&self, y: &[f64]) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].contains(y, 1e3 * self.tol))
            .collect()
    }
}

fn hull_1d(points: &[Vec<f64>], values: &[f64], tol: f64) -> LowerHull {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .partial_cmp(&points[b][0])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal))
    });
    idx.dedup_by(|b, a| points[*a][0] == points[*b][0]);
    let cross = |o: usize, a: usize, b: usize| {
        (points[a][0] - points[o][0]) * (values[b] - values[o]) - (values[a] - values[o]) * (points[b][0] - points[o][0])
    };
    let mut chain: Vec<usize> = Vec::new();
    for &p in &idx {
        while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0 {
            chain.pop();
        }
        chain.push(p);
    }
    let cells = chain
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let slope = (values[b] - values[a]) / (points[b][0] - points[a][0]);
            let intercept = values[a] - slope * points[a][0];
            let (lo, hi) = (points[a][0], points[b][0]);
            let members = (0..points.len())
                .filter(|&k| {
                    let y = points[k][0];
                    y >= lo && y <= hi && (values[k] - (slope * y + intercept)).abs() <= tol
                })
                .collect();
            HullCell { vertices: vec![vec![lo], vec![hi]], members, grad: vec![slope], intercept }
        })
        .collect();
    let domain = vec![points[idx[0]].clone(), points[*idx.last().expect("nonempty")].clone()];
    LowerHull { rank: 1, cells, domain, tol }
}

/// Plane through three lifted points.
fn plane(p: [Point2; 3], z: [f64; 3]) -> Option<([f64; 2], f64)> {
    let (a, b) = ([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]);
    let (za, zb) = (z[1] - z[0], z[2] - z[0]);
    let det = a[0] * b[1] - a[1] * b[0];
    if det.abs() < 1e-300 {
        return None;
    }
    let g0 = (za * b[1] - zb * a[1]) / det;
    let g1 = (a[0] * zb - b[0] * za) / det;
    Some(([g0, g1], z[0] - g0 * p[0][0] - g1 * p[0][1]))
}

fn hull_2d(points: &[Vec<f64>], values: &[f64], tol: f64) -> Result<LowerHull> {
    // keep the lowest value over each projected point
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal))
    });
    order.dedup_by(|b, a| points[*a] == points[*b]);
    let pts: Vec<Point2> = order.iter().map(|&i| [points[i][0], points[i][1]]).collect();
    let z: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let n = pts.len();
    let domain = convex_hull_2d(&pts);
    if domain.len() < 3 {
        return Err(Error::InvalidInput("support points are collinear".into()));
    }
    let dtol = 1e-12 * pts.iter().fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));

    let tight = |g: [f64; 2], c: f64| -> Vec<usize> {
        (0..n)
            .filter(|&k| (z[k] - (g[0] * pts[k][0] + g[1] * pts[k][1] + c)).abs() <= tol)
            .collect()
    };

    // boundary edge from the lexicographically smallest point along the
    // next projected hull vertex
    let p = 0usize;
    let q_dir = {
        let q = domain[1];
        let d = [q[0] - pts[p][0], q[1] - pts[p][1]];
        let l = libm::hypot(d[0], d[1]);
        [d[0] / l, d[1] / l]
    };
    let inward = [-q_dir[1], q_dir[0]];
    let along: Vec<usize> = (1..n)
        .filter(|&k| {
            let d = [pts[k][0] - pts[p][0], pts[k][1] - pts[p][1]];
            (inward[0] * d[0] + inward[1] * d[1]).abs() <= dtol
        })
        .collect();
    let q = along
        .iter()
        .copied()
        .min_by(|&a, &b| {
            let sa = (z[a] - z[p]) / libm::hypot(pts[a][0] - pts[p][0], pts[a][1] - pts[p][1]);
            let sb = (z[b] - z[p]) / libm::hypot(pts[b][0] - pts[p][0], pts[b][1] - pts[p][1]);
            sa.partial_cmp(&sb).unwrap_or(core::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::InvalidInput("degenerate support".into()))?;
    let first = wrap(&pts, &z, p, q, inward, dtol).ok_or_else(|| Error::InvalidInput("degenerate support".into()))?;

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut queue: VecDeque<([f64; 2], f64)> = VecDeque::new();
    queue.push_back(first);
    let mut cells = Vec::new();
    while let Some((g, c)) = queue.pop_front() {
        let members = tight(g, c);
        if members.len() < 3 || !seen.insert(members.clone()) {
            continue;
        }
        let poly_pts: Vec<Point2> = members.iter().map(|&k| pts[k]).collect();
        let polygon = convex_hull_2d(&poly_pts);
        if polygon.len() < 3 {
            continue;
        }
        let m = polygon.len();
        for i in 0..m {
            let (a, b) = (polygon[i], polygon[(i + 1) % m]);
            let ia = members.iter().copied().find(|&k| pts[k] == a).expect("vertex is a member");
            let ib = members.iter().copied().find(|&k| pts[k] == b).expect("vertex is a member");
            let d = [b[0] - a[0], b[1] - a[1]];
            let l = libm::hypot(d[0], d[1]);
            let outward = [d[1] / l, -d[0] / l];
            if let Some(next) = wrap(&pts, &z, ia, ib, outward, dtol) {
                queue.push_back(next);
            }
        }
        cells.push(HullCell {
            vertices: polygon.iter().map(|v| v.to_vec()).collect(),
            members: members.iter().map(|&k| order[k]).collect(),
            grad: g.to_vec(),
            intercept: c,
        });
    }
    Ok(LowerHull { rank: 2, cells, domain: domain.iter().map(|v| v.to_vec()).collect(), tol })
}

/// Rotates the supporting plane about the lifted edge `a b` toward the side
/// `normal`; returns the next facet plane, `None` on the domain boundary.
fn wrap(pts: &[Point2], z: &[f64], a: usize, b: usize, normal: [f64; 2], dtol: f64) -> Option<([f64; 2], f64)> {
    let e = [pts[b][0] - pts[a][0], pts[b][1] - pts[a][1]];
    let el2 = e[0] * e[0] + e[1] * e[1];
    let mut best: Option<(f64, usize)> = None;
    for k in 0..pts.len() {
        let d = [pts[k][0] - pts[a][0], pts[k][1] - pts[a][1]];
        let dn = normal[0] * d[0] + normal[1] * d[1];
        if dn <= dtol {
            continue;
        }
        // height above the lifted line through a, b
        let t = (d[0] * e[0] + d[1] * e[1]) / el2;
        let h = z[k] - (z[a] + t * (z[b] - z[a]));
        let s = h / dn;
        if best.is_none_or(|(bs, _)| s < bs) {
            best = Some((s, k));
        }
    }
    let (_, k) = best?;
    plane([pts[a], pts[b], pts[k]], [z[a], z[b], z[k]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_in_one_dimension() {
        let pts: Vec<Vec<f64>> = (-4..=4).map(|i| vec![i as f64 * 0.5]).collect();
        let mut vals: Vec<f64> = pts.iter().map(|p| p[0] * p[0]).collect();
        vals[3] += 1.0;
        let h = LowerHull::build(&pts, &vals).unwrap();
        assert_eq!(h.cells.len(), 7);
        assert!((h.eval(&[-0.5]).unwrap() - 0.5).abs() < 1e-12);
        assert!((h.eval(&[1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(h.eval(&[3.0]).is_none());
    }

    #[test]
    fn grid_with_coplanar_points() {
        let mut pts = Vec::new();
        let mut vals = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                let (x, y) = (i as f64, j as f64);
                pts.push(vec![x, y]);
                vals.push(x.abs().max(y.abs()) + 0.25 * x);
            }
        }
        let h = LowerHull::build(&pts, &vals).unwrap();
        // four planar pieces of the pyramid
        assert_eq!(h.cells.len(), 4);
        let area: f64 = h.cells.iter().map(|c| {
            let p: Vec<Point2> = c.vertices.iter().map(|v| [v[0], v[1]]).collect();
            crate::cells::polygon_area(&p)
        }).sum();
        assert!((area - 36.0).abs() < 1e-9);
        for (p, v) in pts.iter().zip(&vals) {
            assert!((h.eval(p).unwrap() - v).abs() < 1e-9);
        }
        assert_eq!(h.cells_at(&[0.0, 0.0]).len(), 4);
    }

    #[test]
    fn strictly_convex_samples_reproduce_values() {
        let mut pts = Vec::new();
        let mut vals = Vec::new();
        for i in 0..=6 {
            for j in 0..=6 {
                let (x, y) = (i as f64 / 3.0 - 1.0, j as f64 / 3.0 - 1.0);
                pts.push(vec![x, y]);
                vals.push(x * x + 0.5 * y * y + 0.1 * x * y);
            }
        }
        pts.push(vec![0.1, 0.2]);
        vals.push(10.0);
        let h = LowerHull::build(&pts, &vals).unwrap();
        for (p, v) in pts.iter().zip(&vals).take(49) {
            assert!((h.eval(p).unwrap() - v).abs() < 1e-9);
        }
        assert!(h.eval(&[0.1, 0.2]).unwrap() < 1.0);
        let area: f64 = h.cells.iter().map(|c| {
            let p: Vec<Point2> = c.vertices.iter().map(|v| [v[0], v[1]]).collect();
            crate::cells::polygon_area(&p)
        }).sum();
        assert!((area - 4.0).abs() < 1e-9);
    }
}
