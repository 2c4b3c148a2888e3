//! Blow-up and scattering criteria for the 3D cubic focusing nonlinear
//! Schrödinger equation `i u_t + Δu + |u|²u = 0`, restricted to radial data.
//!
//! The crate computes the ground state, diagnostics of radial fields, closed
//! forms for five families of initial data, the analytic blow-up/scattering
//! criteria, and classifies direct simulations of the radial equation.

pub mod criteria;
pub mod error;
pub mod grid;
pub mod groundstate;
pub mod profiles;
pub mod quantities;
pub mod scan;
pub mod solver;
pub mod tables;

pub use error::{Error, Result};
pub use grid::RadialGrid;
pub use groundstate::GroundState;
pub use profiles::{Family, Profile};
pub use quantities::{Diagnostics, RadialField};
