//! Simulation of chirped-pulse interferometry, white-light interferometry and
//! the Hong–Ou–Mandel dip they are compared against.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod cpi;
pub mod csvio;
pub mod elements;
pub mod error;
pub mod grid;
pub mod hom;
pub mod material;
pub mod quadrature;
pub mod scan;
pub mod units;
pub mod wli;

pub use error::{Error, Result};
