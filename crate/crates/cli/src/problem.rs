//! Declarative problem files.

use mabuchi_core::criterion::Instance;
use mabuchi_core::dingfun::QuadConfig;
use mabuchi_core::geom::{Halfspace, MomentPolytope};
use mabuchi_core::masolver::{Optimizer, SolverConfig};
use mabuchi_core::{CartanType, RootDatum, Scalar};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::number::{parse_vec, Number};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub datum: DatumBlock,
    pub polytope: PolytopeBlock,
    #[serde(default)]
    pub options: Options,
}

/// Either named Cartan types padded with toric coordinates, or an explicit
/// gram matrix with simple roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumBlock {
    /// Ambient rank.
    pub rank: usize,
    #[serde(default)]
    pub types: Vec<String>,
    #[serde(default)]
    pub toric: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simple_roots: Option<Vec<Vec<Number>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceBlock {
    pub normal: Vec<Number>,
    pub offset: Number,
}

/// Halfspaces `<normal, y> <= offset` of `P`, or an axis box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<HalfspaceBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube: Option<Vec<Number>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOptions>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOptions {
    pub radius: Option<f64>,
    pub max_radius: Option<f64>,
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    pub divisions: Option<usize>,
    pub optimizer: Option<String>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub divergence_factor: Option<f64>,
    pub window: Option<usize>,
    pub window_decrease: Option<f64>,
    pub polish_steps: Option<usize>,
}

impl QuadOptions {
    pub fn apply(&self, cfg: &mut QuadConfig) {
        if let Some(v) = self.radius {
            cfg.radius = v;
        }
        if let Some(v) = self.max_radius {
            cfg.max_radius = v;
        }
        if let Some(v) = self.tail_tol {
            cfg.tail_tol = v;
        }
    }
}

impl SolverOptions {
    pub fn apply(&self, cfg: &mut SolverConfig) -> Result<(), CliError> {
        if let Some(v) = self.divisions {
            cfg.divisions = Some(v);
        }
        if let Some(name) = &self.optimizer {
            cfg.optimizer = match name.as_str() {
                "bfgs" => Optimizer::Bfgs,
                "gradient" => Optimizer::Gradient,
                other => return Err(CliError::input("InvalidOption", format!("unknown optimizer {other:?}"))),
            };
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.divergence_factor {
            cfg.divergence_factor = v;
        }
        if let Some(v) = self.window {
            cfg.window = v;
        }
        if let Some(v) = self.window_decrease {
            cfg.window_decrease = v;
        }
        if let Some(v) = self.polish_steps {
            cfg.polish_steps = v;
        }
        Ok(())
    }
}

fn parse_type(name: &str) -> Result<CartanType, CliError> {
    let bad = || CliError::input("InvalidDatum", format!("unknown Cartan type {name:?}"));
    let upper = name.trim().to_ascii_uppercase();
    if upper == "G2" {
        return Ok(CartanType::G2);
    }
    let (letter, n) = upper.split_at(1.min(upper.len()));
    let n: usize = n.parse().map_err(|_| bad())?;
    match letter {
        "A" => Ok(CartanType::A(n)),
        "B" => Ok(CartanType::B(n)),
        "C" => Ok(CartanType::C(n)),
        "D" => Ok(CartanType::D(n)),
        _ => Err(bad()),
    }
}

/// A problem file with its raw bytes.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub sha256: String,
}

impl Problem {
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        let file: ProblemFile =
            serde_json::from_slice(bytes).map_err(|e| CliError::input("InvalidProblem", e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(CliError::input(
                "UnsupportedVersion",
                format!("format_version {} is not supported", file.format_version),
            ));
        }
        let digest = Sha256::digest(bytes);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(Problem { file, sha256 })
    }

    pub fn read(path: &str) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&bytes)
    }

    /// `true` when every datum and polytope number was written exactly.
    pub fn is_rational(&self) -> bool {
        let d = &self.file.datum;
        let p = &self.file.polytope;
        let mut numbers: Vec<&Number> = Vec::new();
        for m in [&d.gram, &d.simple_roots].into_iter().flatten() {
            numbers.extend(m.iter().flatten());
        }
        for h in p.halfspaces.iter().flatten() {
            numbers.extend(h.normal.iter());
            numbers.push(&h.offset);
        }
        numbers.extend(p.cube.iter().flatten());
        numbers.iter().all(|n| n.is_exact())
    }

    pub fn datum<S: Scalar>(&self) -> Result<RootDatum<S>, CliError> {
        let d = &self.file.datum;
        let datum = match (&d.gram, &d.simple_roots) {
            (Some(gram), roots) => {
                if !d.types.is_empty() || d.toric != 0 {
                    return Err(CliError::input("InvalidDatum", "give either named types or an explicit gram matrix"));
                }
                let gram = gram.iter().map(|r| parse_vec(r)).collect::<Result<Vec<_>, _>>()?;
                let roots = roots.iter().flatten().map(|r| parse_vec(r)).collect::<Result<Vec<_>, _>>()?;
                if gram.len() != d.rank || gram.iter().any(|r| r.len() != d.rank) {
                    return Err(mabuchi_core::Error::DimensionMismatch { expected: d.rank, found: gram.len() }.into());
                }
                RootDatum::explicit(gram, roots)?
            }
            (None, Some(_)) => return Err(CliError::input("InvalidDatum", "simple_roots need a gram matrix")),
            (None, None) => {
                let types = d.types.iter().map(|t| parse_type(t)).collect::<Result<Vec<_>, _>>()?;
                RootDatum::named(&types, d.toric)?
            }
        };
        if datum.rank != d.rank {
            return Err(mabuchi_core::Error::DimensionMismatch { expected: d.rank, found: datum.rank }.into());
        }
        Ok(datum)
    }

    pub fn instance<S: Scalar>(&self, tol: Option<&S>) -> Result<Instance<S>, CliError> {
        let datum = self.datum::<S>()?;
        let p = &self.file.polytope;
        let halfspaces = match (&p.halfspaces, &p.cube) {
            (Some(hs), None) => hs
                .iter()
                .map(|h| Ok(Halfspace::new(parse_vec(&h.normal)?, h.offset.parse()?)))
                .collect::<Result<Vec<_>, CliError>>()?,
            (None, Some(cube)) => {
                if cube.len() != datum.rank {
                    return Err(mabuchi_core::Error::DimensionMismatch { expected: datum.rank, found: cube.len() }.into());
                }
                mabuchi_core::geom::box_halfspaces(&parse_vec::<S>(cube)?)
            }
            _ => return Err(CliError::input("InvalidPolytope", "give exactly one of halfspaces or cube")),
        };
        let polytope = match tol {
            Some(t) => MomentPolytope::build_with_tol(halfspaces, &datum, t.clone())?,
            None => MomentPolytope::build(halfspaces, &datum)?,
        };
        Ok(Instance::new(datum, polytope)?)
    }

    pub fn quad_config(&self) -> QuadConfig {
        let mut cfg = QuadConfig::default();
        if let Some(q) = &self.file.options.quadrature {
            q.apply(&mut cfg);
        }
        cfg
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig { quad: self.quad_config(), ..SolverConfig::default() };
        if let Some(s) = &self.file.options.solver {
            s.apply(&mut cfg)?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    const A1: &str = r#"{
        "format_version": 1,
        "datum": { "rank": 1, "gram": [["1"]], "simple_roots": [["2"]] },
        "polytope": { "halfspaces": [ { "normal": ["1"], "offset": "3" }, { "normal": ["-1"], "offset": "3" } ] }
    }"#;

    #[test]
    fn explicit_and_named_data() {
        let p = Problem::parse(A1.as_bytes()).unwrap();
        assert!(p.is_rational());
        assert_eq!(p.sha256.len(), 64);
        let inst = p.instance::<BigRational>(None).unwrap();
        assert_eq!(inst.table.volume, BigRational::from_ratio(288, 1));

        let named = r#"{ "format_version": 1, "datum": { "rank": 2, "types": ["b2"] },
                         "polytope": { "cube": [2, "2"] } }"#;
        let p = Problem::parse(named.as_bytes()).unwrap();
        assert_eq!(p.instance::<f64>(None).unwrap().datum.weyl_order(), 8);
    }

    #[test]
    fn rejects_malformed_files() {
        let wrong_version = A1.replace("\"format_version\": 1", "\"format_version\": 9");
        assert_eq!(Problem::parse(wrong_version.as_bytes()).unwrap_err().kind, "UnsupportedVersion");
        let unknown = A1.replace("\"rank\": 1,", "\"rank\": 1, \"extra\": 0,");
        assert_eq!(Problem::parse(unknown.as_bytes()).unwrap_err().kind, "InvalidProblem");
        let wrong_rank = A1.replace("\"rank\": 1", "\"rank\": 2");
        let p = Problem::parse(wrong_rank.as_bytes()).unwrap();
        assert_eq!(p.instance::<f64>(None).unwrap_err().kind, "DimensionMismatch");
        let float = A1.replace("\"offset\": \"3\" }, {", "\"offset\": 3.5 }, {");
        assert!(!Problem::parse(float.as_bytes()).unwrap().is_rational());
    }
}
