//! Admissible curves, normal geodesics and Carnot–Carathéodory distances.
//!
//! Distances come from a direct method over piecewise-constant controls; normal
//! geodesics come from the Hamiltonian flow. Each is used to check the other.

mod curve;
mod direct;
mod hamiltonian;
pub(crate) mod rk4;

pub use curve::{integrate_control, integrate_control_steps, ControlCurve, PiecewiseControl};
pub use direct::{cc_distance, constant_speed, geodesic_between, DistanceEstimate, DistanceOptions};
pub use hamiltonian::{
    hamiltonian, normal_flow, normal_geodesic, normal_geodesic_steps, shoot, shooting_geodesic, Covector,
    ShootingOptions,
};
