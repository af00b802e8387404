//! Numerical core for the finite-volume AC conductivity measure of the
//! Anderson model. `no_std` with `alloc`.
#![no_std]
extern crate alloc;

pub mod bins;
pub mod conductivity;
pub mod disorder;
pub mod error;
pub mod lattice;
pub mod model;
pub mod quadrature;
pub mod response;
pub mod spectral;
pub mod stats;
pub mod thermo;

pub use error::{Error, Result};
pub use model::Realization;
