//! JSON documents written by the subcommands.

use mabuchi_core::criterion::Certificate;
use mabuchi_core::extremal::ExtremalData;
use mabuchi_core::geom::Warning;
use mabuchi_core::ConeClass;
use serde::{Deserialize, Serialize};

use crate::number::{render_mat, render_vec, Num, Render};

/// Identifies the problem a document was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub format_version: u32,
    /// `exact` or `float`.
    pub mode: String,
    pub tol: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: String,
    pub format_version: u32,
    /// Unix seconds; omitted under `--reproducible`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub input: InputEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeBlock {
    /// `interior`, `boundary` or `outside`.
    pub class: String,
    pub coefficients: Vec<Num>,
    pub residual: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginsBlock {
    pub min_coeff: Option<Num>,
    pub residual_norm: Num,
    pub c_x: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(flatten)]
    pub header: Header,
    pub verdict: String,
    pub boundary: bool,
    pub fano: bool,
    pub volume: Num,
    pub b: Vec<Num>,
    pub b_x: Vec<Num>,
    pub four_rho: Vec<Num>,
    pub shift: Vec<Num>,
    pub cone: ConeBlock,
    pub c_x: Num,
    pub cap_c_x: Num,
    pub x: Vec<Num>,
    pub a_matrix: Vec<Vec<Num>>,
    pub margins: MarginsBlock,
    pub warnings: Vec<String>,
}

fn cone_class(c: ConeClass) -> &'static str {
    match c {
        ConeClass::Interior => "interior",
        ConeClass::Boundary => "boundary",
        ConeClass::Outside => "outside",
    }
}

impl CertificateFile {
    pub fn new<S: Render>(header: Header, cert: &Certificate<S>, warnings: &[Warning]) -> Self {
        CertificateFile {
            header,
            verdict: cert.verdict.as_str().into(),
            boundary: cert.boundary,
            fano: cert.fano,
            volume: cert.volume.render(),
            b: render_vec(&cert.b),
            b_x: render_vec(&cert.b_x),
            four_rho: render_vec(&cert.four_rho),
            shift: render_vec(&cert.shift),
            cone: ConeBlock {
                class: cone_class(cert.cone.class).into(),
                coefficients: render_vec(&cert.cone.coeffs),
                residual: render_vec(&cert.cone.residual),
            },
            c_x: cert.c_x.render(),
            cap_c_x: cert.cap_c_x.render(),
            x: render_vec(&cert.x),
            a_matrix: render_mat(&cert.a_matrix),
            margins: MarginsBlock {
                min_coeff: cert.margins.min_coeff.as_ref().map(Render::render),
                residual_norm: cert.margins.residual_norm.render(),
                c_x: cert.margins.c_x.render(),
            },
            warnings: warnings
                .iter()
                .map(|w| match w {
                    Warning::Fano => "4rho_not_interior".to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalFile {
    #[serde(flatten)]
    pub header: Header,
    pub x: Vec<Num>,
    pub x_vec: Vec<Num>,
    pub theta_slope: Vec<Num>,
    pub theta_const: Num,
    pub c_x: Num,
    pub cap_c_x: Num,
    pub a_matrix: Vec<Vec<Num>>,
}

impl ExtremalFile {
    pub fn new<S: Render>(header: Header, e: &ExtremalData<S>) -> Self {
        ExtremalFile {
            header,
            x: render_vec(&e.x),
            x_vec: render_vec(&e.x_vec),
            theta_slope: render_vec(&e.theta_slope),
            theta_const: e.theta_const.render(),
            c_x: e.c_x.render(),
            cap_c_x: e.cap_c_x.render(),
            a_matrix: render_mat(&e.a_matrix),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FutakiFile {
    #[serde(flatten)]
    pub header: Header,
    pub y: Vec<Num>,
    pub futaki: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DingFile {
    #[serde(flatten)]
    pub header: Header,
    pub support_points: usize,
    /// Linear part of the normalized potential.
    pub l: Num,
    pub f: Num,
    pub d: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialBlock {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(flatten)]
    pub header: Header,
    /// `converged`, `diverged` or `max_iter`.
    pub status: String,
    pub divisions: usize,
    pub iterations: usize,
    pub d_value: Num,
    pub stationarity: Num,
    pub pushforward: Num,
    pub history_csv: Option<String>,
    pub potential: PotentialBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeFile {
    #[serde(flatten)]
    pub header: Header,
    pub verdict: String,
    pub rays: Vec<Vec<Num>>,
    pub pairings: Vec<Num>,
    pub negative_found: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub quantity: String,
    pub exact: Num,
    pub estimate: Num,
    pub stderr: Num,
    /// `|estimate - exact| / stderr`
    pub z: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    #[serde(flatten)]
    pub header: Header,
    pub samples: usize,
    pub rows: Vec<McRow>,
    pub max_z: Num,
}
