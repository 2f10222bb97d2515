//! Numerical laboratory for phase retrieval from short-time Fourier
//! transform magnitudes: transforms, weighted Sobolev norms, explicit
//! instability constructions and the geometric constants that govern
//! stability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub(crate) mod fft;
pub mod field;
pub mod forge;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod norms;
pub mod parallel;
pub mod rng;
pub mod signal;
pub mod transforms;

pub use error::{Error, Result};
pub use field::TFField;
pub use grid::{Grid1D, TFGrid};
pub use signal::Signal;
