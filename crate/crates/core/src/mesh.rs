//! Uniform simplicial meshes of `2P_+` coned from the origin.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::MomentPolytope;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub rank: usize,
    pub nodes: Vec<Vec<f64>>,
    /// Node indices of each simplex.
    pub simplices: Vec<Vec<usize>>,
}

impl Mesh {
    /// Cones `2P_+` from `O` and splits every edge into `divisions` parts.
    pub fn chamber(polytope: &MomentPolytope<f64>, divisions: usize) -> Result<Self> {
        if divisions == 0 {
            return Err(Error::InvalidInput("mesh needs at least one division".into()));
        }
        let r = polytope.rank;
        if r > 2 {
            return Err(Error::RankTooHigh { rank: r });
        }
        let origin = vec![0.0; r];
        let coarse = polytope.cone_triangulation(&origin);
        let mut nodes: Vec<Vec<f64>> = Vec::new();
        let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        let mut node = |p: Vec<f64>| -> usize {
            let key: Vec<i64> = p.iter().map(|v| libm::round(v * 1e9) as i64).collect();
            *index.entry(key).or_insert_with(|| {
                nodes.push(p);
                nodes.len() - 1
            })
        };
        let d = divisions;
        let mut simplices = Vec::new();
        for s in &coarse {
            let at = |i: usize, j: usize| -> Vec<f64> {
                let (a, b) = (i as f64 / d as f64, j as f64 / d as f64);
                (0..r)
                    .map(|k| s[0][k] + a * (s[1][k] - s[0][k]) + if r == 2 { b * (s[2][k] - s[0][k]) } else { 0.0 })
                    .collect()
            };
            if r == 1 {
                for i in 0..d {
                    simplices.push(vec![node(at(i, 0)), node(at(i + 1, 0))]);
                }
                continue;
            }
            for i in 0..d {
                for j in 0..d - i {
                    simplices.push(vec![node(at(i, j)), node(at(i + 1, j)), node(at(i, j + 1))]);
                    if i + j + 2 <= d {
                        simplices.push(vec![node(at(i + 1, j)), node(at(i + 1, j + 1)), node(at(i, j + 1))]);
                    }
                }
            }
        }
        Ok(Mesh { rank: r, nodes, simplices })
    }

    pub fn simplex(&self, k: usize) -> Vec<Vec<f64>> {
        self.simplices[k].iter().map(|&i| self.nodes[i].clone()).collect()
    }

    /// Index of the node at the origin.
    pub fn origin(&self) -> Option<usize> {
        self.nodes.iter().position(|p| p.iter().all(|v| v.abs() < 1e-12))
    }
}
