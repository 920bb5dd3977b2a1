//! Numerical workbench for Bukhgeim-type reconstruction of complex planar
//! potentials with jump discontinuities along curves.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cgo;
pub mod domain;
pub mod dtn;
pub mod error;
pub mod grid;
pub mod persist;
pub mod quad;
pub mod recon;
pub mod scattering;
pub mod spline;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{ComplexField, FourierGrid};
