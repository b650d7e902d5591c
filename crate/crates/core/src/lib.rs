//! Fixed-point solvers for the steady incompressible Navier-Stokes equations
//! in two dimensions: Arrow-Hurwicz, its grad-div stabilized form, iterated
//! penalty Picard and plain Picard, each optionally wrapped in Anderson
//! acceleration, on Taylor-Hood or Scott-Vogelius elements.

pub mod anderson;
pub mod error;
pub mod fem;
pub mod harness;
pub mod mesh;
pub mod solvers;
pub mod sparse;
pub mod vtk;

pub use error::{Error, Result};
