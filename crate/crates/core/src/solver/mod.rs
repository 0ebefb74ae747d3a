//! Transient heat conduction on the active part of a structured mesh.
//!
//! Backward Euler in time, trilinear hexahedra with lumped capacity, Picard
//! iterations on temperature-dependent properties and radiation, and a
//! Jacobi-preconditioned conjugate-gradient linear solve.

mod bc;
mod engine;
pub mod fe;
pub mod sparse;

pub use bc::{radiation_coefficient, BoundaryCondition, TimeSeries};
pub use engine::{
    LedgerRow, RegionMaterials, SolverSettings, SolverSetup, SourceFn, StepEnergy, StepReport,
    ThermalSolver,
};
