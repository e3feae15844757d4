//! Central-charge paths and semiorthogonal decompositions on the blowup of a
//! surface at a point.

pub mod chambers;
pub mod cli;
pub mod charges;
pub mod error;
pub mod lattice;
pub mod paths;
pub mod qde;
pub mod sod;
pub mod specfun;

pub use error::{Error, Result};
