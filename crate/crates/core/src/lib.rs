//! Spectral computations for the critical almost Mathieu operator at
//! rational frequency.

pub mod butterfly;
pub mod contfrac;
pub mod contour;
pub mod discriminant;
pub mod error;
pub mod numeric;
mod precise;
pub mod scaled;
pub mod spectrum;
pub mod tridiag;
pub mod trigsums;
pub mod verify;

pub use error::{Error, Result};
