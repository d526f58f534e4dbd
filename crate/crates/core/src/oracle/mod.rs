//! Independent numeric checks: finite differences, quadrature and time stepping
//! on point evaluators only, never the algebra's symbolic calculus.

pub mod fd;
pub mod quadrature;
pub mod recurrence;
pub mod residual;
pub mod spectral;

pub use recurrence::{verify_term_recurrence, RecurrenceReport};
pub use residual::{
    pde_residual, pde_residual_with, ResidualPoint, ResidualPolicy, ResidualReport,
};
pub use spectral::{numeric_reference, NumericReference, SpectralConfig};
