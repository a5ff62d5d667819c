pub mod boundary_data;
pub mod cli;
pub mod direction_solver;
pub mod disk_harmonic;
pub mod error;
pub mod expr;
pub mod jordan_domain;
pub mod neumann;
pub mod quadrature;
pub mod rh_solver;
pub mod verify;

pub use error::{Error, Result};
