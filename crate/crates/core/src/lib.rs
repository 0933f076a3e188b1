#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

//! Affine coherent states on the half-line.
//!
//! The crate builds the coherent states |q,p;ν,n⟩ generated from eigenvectors
//! of the radial oscillator, evolves them exactly under the Hamiltonian
//! p² + (ν²−1/4)/x², quantizes the classical observables by integrating
//! against the coherent-state frame, and exposes the SU(1,1) structure of the
//! underlying affine group representation.

pub mod cli;
pub mod coherent;
pub mod dynamics;
pub mod error;
pub mod fiducial;
pub mod propagator;
pub mod quantizer;
pub mod specfun;
pub mod su11;

pub use error::{Error, Result};
