//! Reproducible experiment runners on top of the `bukhgeim` library: the rhombus
//! counterexample, convergence sweeps, the operator decay suite, stability under
//! boundary perturbations and far-field scattering data.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cache;
pub mod config;
pub mod convergence;
pub mod counterexample;
pub mod description;
pub mod fit;
pub mod lemmas;
pub mod output;
pub mod scatter;
pub mod stability;

pub use config::ExperimentConfig;
