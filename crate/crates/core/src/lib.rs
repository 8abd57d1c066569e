//! Generating functionals of the linearly driven oscillator and the
//! independent routes used to check them.

pub mod algebra;
pub mod amplitudes;
pub mod classical;
pub mod error;
pub mod fock;
pub mod greens;
pub mod keldysh;
pub mod path;
pub mod signal;
pub mod source;

pub use error::{Error, Result};
pub use num_complex::Complex64;
