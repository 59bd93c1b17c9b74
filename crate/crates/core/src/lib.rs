//! Interior-penalty discontinuous Galerkin discretization of the time-harmonic
//! eddy current problem: magnetic field in the conductor, scalar potential plus
//! one cohomology coefficient in the insulator.

pub mod fixtures;
pub mod mesh;
pub mod msh;
pub mod quadrature;
pub mod basis;
pub mod fespace;
pub mod cohomology;
pub mod sparse;
pub mod assembly;
pub mod solver;
pub mod jet;
pub mod mms;
pub mod analysis;
pub mod pipeline;
pub mod config;
pub mod vtk;
pub mod verify;
pub mod run;
