//! Foundation numerics: ε-jets, a Hermitian eigensolver and an adaptive
//! Runge–Kutta integrator for linear complex ODE systems.

pub mod jet;
pub mod linalg;
pub mod ode;

pub use jet::{jet_mul, jet_recip, Jet};
pub use linalg::{hermitian_eig, Eigen, HermitianMatrix};
pub use ode::{ode_evolve, ode_evolve_with, LinearGenerator, OdeOptions, Trajectory};
