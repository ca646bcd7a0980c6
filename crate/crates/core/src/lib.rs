//! Asymptotic-preserving residual distribution solver for hyperbolic systems
//! with stiff relaxation.

pub mod basis;
pub mod cases;
pub mod cli;
pub mod dec;
pub mod error;
pub mod kinetic;
pub mod mesh;
pub mod model;
pub mod residual;
pub mod solver;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
