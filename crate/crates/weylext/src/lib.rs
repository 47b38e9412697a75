//! Weyl operators on uniform grids, metaplectic operators, and their
//! symplectic dimensional extensions.

pub mod error;
pub mod extension;
pub mod fourier;
pub mod grid;
pub mod hermite;
pub mod intertwine;
pub mod linalg;
pub mod metaplectic;
pub mod scenarios;
pub mod shubin;
pub mod symbol;
pub mod symplectic;
pub mod weyl;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
