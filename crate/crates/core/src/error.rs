use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Cartan integer 2<a{i},a{j}>/<a{j},a{j}> is not a nonpositive integer")]
    NonCrystallographic { i: usize, j: usize },
    #[error("simple roots are linearly dependent")]
    DependentRoots,
    #[error("gram matrix is not symmetric positive definite")]
    NonPositiveGram,
    #[error("Weyl group exceeds the cap of {cap} elements")]
    WeylOverflow { cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope is lower dimensional (dimension {dim})")]
    LowerDimensional { dim: usize },
    #[error("polytope is not W-invariant: element {element} maps vertex {vertex:?} outside the vertex set")]
    NotWInvariant { element: usize, vertex: Vec<f64> },
    #[error("region has zero weighted volume")]
    DegenerateRegion,
    #[error("moment matrix is not positive definite")]
    SingularMomentMatrix,
    #[error("vector pairs nontrivially with root {root}")]
    NotCentral { root: usize },
    #[error("ray {index} is outside the open chamber")]
    RayOutsideChamber { index: usize },
    #[error("origin is not interior to 2P")]
    OriginOutside,
    #[error("4rho lies outside 2P")]
    FourRhoOutside,
    #[error("Legendre dual does not decay (rate {delta})")]
    NonDecaying { delta: f64 },
    #[error("truncation tail bound {bound:e} exceeds tolerance")]
    TailTooLarge { bound: f64 },
    #[error("potentials belong to different instances")]
    MismatchedInstances,
    #[error("sampling family is empty")]
    EmptyFamily,
    #[error("rank {rank} exceeds the supported maximum of 2")]
    RankTooHigh { rank: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;
