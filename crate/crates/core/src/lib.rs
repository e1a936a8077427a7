#![no_std]
#![doc = include_str!("../README.md")]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cells;
pub mod criterion;
pub mod dingfun;
pub mod error;
pub mod extremal;
pub mod geom;
pub mod hull;
pub mod linalg;
pub mod masolver;
pub mod mesh;
pub mod quad;
pub mod rootsys;
pub mod scalar;

pub use error::{Error, Result};
pub use rootsys::{CartanType, ConeClass, ConePosition, RootDatum};
pub use scalar::Scalar;
