//! Numbers in problem files and reports.

use mabuchi_core::scalar::{parse_scalar, rational_string};
use mabuchi_core::Scalar;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A number as written in a problem file: a JSON number or a string holding
/// an integer, a decimal or `p/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    /// Strings and integers are read exactly; JSON floats are not.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Number::Float(_))
    }

    pub fn parse<S: Scalar>(&self) -> Result<S, CliError> {
        let value = match self {
            Number::Int(v) => S::from_i64(*v),
            Number::Float(v) => S::from_float(*v),
            Number::Text(t) => parse_scalar(t),
        };
        value.ok_or_else(|| CliError::input("InvalidNumber", format!("cannot parse number {self:?}")))
    }
}

pub fn parse_vec<S: Scalar>(v: &[Number]) -> Result<Vec<S>, CliError> {
    v.iter().map(Number::parse).collect()
}

/// Parses a comma separated vector such as `1,-1/2,0.25`.
pub fn parse_list<S: Scalar>(text: &str) -> Result<Vec<S>, CliError> {
    text.split(',')
        .map(|t| parse_scalar(t).ok_or_else(|| CliError::usage(format!("cannot parse number {t:?}"))))
        .collect()
}

/// A reported number: shortest round-trip decimal, plus the exact value
/// in exact mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Num {
    pub decimal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<String>,
}

impl Num {
    pub fn float(x: f64) -> Self {
        Num { decimal: format!("{x:?}"), rational: None }
    }

    /// The exact value when present, else the decimal.
    #[cfg(test)]
    pub fn value<S: Scalar>(&self) -> Option<S> {
        parse_scalar(self.rational.as_deref().unwrap_or(&self.decimal))
    }
}

pub trait Render: Scalar {
    fn render(&self) -> Num;
}

impl Render for f64 {
    fn render(&self) -> Num {
        Num::float(*self)
    }
}

impl Render for BigRational {
    fn render(&self) -> Num {
        Num { decimal: format!("{:?}", self.as_f64()), rational: Some(rational_string(self)) }
    }
}

pub fn render_vec<S: Render>(v: &[S]) -> Vec<Num> {
    v.iter().map(Render::render).collect()
}

pub fn render_mat<S: Render>(m: &[Vec<S>]) -> Vec<Vec<Num>> {
    m.iter().map(|r| render_vec(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_spelling() {
        let q: BigRational = Number::Text("16/3".into()).parse().unwrap();
        assert_eq!(q, BigRational::from_ratio(16, 3));
        let q: BigRational = Number::Text("0.75".into()).parse().unwrap();
        assert_eq!(q, BigRational::from_ratio(3, 4));
        let q: BigRational = Number::Int(-2).parse().unwrap();
        assert_eq!(q, BigRational::from_ratio(-2, 1));
        assert!(!Number::Float(0.5).is_exact());
        assert!(Number::Text("x".into()).parse::<f64>().is_err());
        assert_eq!(parse_list::<f64>("1, -1/2").unwrap(), vec![1.0, -0.5]);
    }

    #[test]
    fn rendering_round_trips() {
        let q = BigRational::from_ratio(-5, 8);
        let n = q.render();
        assert_eq!(n.decimal, "-0.625");
        assert_eq!(n.rational.as_deref(), Some("-5/8"));
        assert_eq!(n.value::<BigRational>().unwrap(), q);
        let x = 0.1 + 0.2;
        assert_eq!(Num::float(x).value::<f64>().unwrap(), x);
    }
}
