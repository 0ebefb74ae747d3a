//! Part-scale thermal simulation of powder-bed fusion with virtual-domain
//! boundary conditions.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod materials;
pub mod mesh;
pub mod output;
pub mod probes;
pub mod process;
pub mod simulation;
pub mod solver;
pub mod vda;

pub use error::{Error, Result};
