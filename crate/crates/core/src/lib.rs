//! Core numerics for a six-legged central pattern generator built from
//! bursting neurons: single-cell dynamics and limit cycles, phase response
//! curves, pairwise coupling functions, the reduced phase-difference model
//! on the 2-torus, and saddle-node sweeps over heterogeneous drive currents.
//!
//! The crate is `no_std`-compatible (with `alloc`); all IO, file formats and
//! the command-line driver live in the companion `hexgait` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod bifurcation;
pub mod coupling;
pub mod equivalence;
pub mod error;
mod fmath;
pub mod gait;
pub mod interp;
pub mod iprc;
pub mod limit_cycle;
pub mod linalg;
pub mod network;
pub mod neuron;
pub mod ode;
pub mod pipeline;
pub mod torus;

pub use error::CoreError;
pub use neuron::{NeuronParams, NeuronState};
