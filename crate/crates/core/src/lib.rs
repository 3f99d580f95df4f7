//! Lifted TFHE: gate bootstrapping with bundled blind rotation and a
//! multiplierless integer negacyclic transform.

pub mod analysis;
pub mod bootstrap;
pub mod error;
pub mod keys;
pub mod codec;
pub mod lattice;
pub mod netlist;
pub mod params;
pub mod rng;
pub mod torus;
pub mod transform;

pub use error::{Error, Result};
pub use params::ParameterSet;
pub use torus::{IntPolynomial, Torus, TorusPolynomial};
