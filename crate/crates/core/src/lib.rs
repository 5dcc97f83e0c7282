//! Numerical laboratory for sub-Riemannian geometry: exact polynomial frames,
//! Carnot–Carathéodory distances and geodesics, nilpotent approximation and
//! blow-ups, the Heisenberg lift of the Grushin plane, warped-product and
//! cone-Grushin models, and a discrete curvature-dimension checker.

pub mod carnot;
pub mod cdlab;
pub mod cli;
pub mod error;
pub mod geodesy;
pub mod linalg;
pub mod nilpotent;
pub mod optim;
pub mod structure;
pub mod symfield;
pub mod warped;

pub use error::{Error, Result};
