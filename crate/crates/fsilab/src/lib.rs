//! A desk-scale laboratory for a 2D viscous incompressible fluid coupled to
//! one rigid disk on a doubly periodic domain: pseudo-spectral time stepping
//! with a momentum-conserving rigid projection, explicit initial-data
//! constructions, semigroup decay-rate measurement, a Duhamel fixed-point
//! module, an annulus divergence solver, and the study runners behind the
//! `fsilab` command line tool.

pub mod error;
pub mod field;
pub mod solid;

pub use error::{Error, Result};

#[cfg(test)]
mod solid_tests;
