//! Decomposition iteration (DJM) and its split-source variant (MDJM)
//! for Boussinesq-type equations, built on a closed `sech`/`tanh` term algebra
//! with arbitrary-precision coefficients, plus an independent numeric oracle.

pub mod algebra;
pub mod boussinesq;
pub mod error;
pub mod iterate;
pub mod oracle;
pub mod pointwise;
pub mod precision;

pub use algebra::{Expr, Monomial, Phase, Space, TanhPowers};
pub use boussinesq::{
    BoussinesqParams, BoussinesqProblem, Example1Params, ReferenceSolution, SolitaryWaveParams,
};
pub use error::{Error, Result};
pub use iterate::{IterationProblem, Method, Operator, SeriesOptions, SeriesSolution, SeriesSpace};
pub use pointwise::PointFn;
pub use precision::{PrecisionConfig, Real};
