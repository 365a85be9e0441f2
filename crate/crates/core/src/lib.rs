//! Adiabatic switching in time-dependent perturbation theory.
//!
//! A perturbation `V` switched on as `x·e^{εt}` produces perturbative series
//! whose terms blow up like `1/ε^n`. This crate computes the same evolved
//! states three ways and checks that they agree:
//!
//! - direct integration of the Schrödinger equation ([`numkit::ode`]),
//! - the naive power series in the coupling, which diverges as `ε → 0`
//!   ([`twostate::bessel_series_a`], [`nstate::dyson2`]),
//! - a phase-factor ansatz whose recursion isolates every `1/ε` term in a
//!   single time-independent phase ([`twostate::phase_split`],
//!   [`nstate::g_split`]).
//!
//! [`twostate`] handles the exactly solvable two-level model and [`nstate`]
//! the general finite-dimensional case.

pub mod error;
pub mod nstate;
pub mod numkit;
pub mod twostate;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
