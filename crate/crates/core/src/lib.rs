//! Nearest-neighbour spacing statistics for unitary-invariant ensembles and
//! repulsive particle systems.
//!
//! The crate covers the whole pipeline: potentials and model files
//! ([`models`]), equilibrium measures and the repulsive fixed point
//! ([`equilibrium`]), exact and Markov-chain samplers ([`sampling`]), the
//! Gaudin spacing law ([`gaudin`]), empirical spacing observables
//! ([`spacing`]), the Christoffel–Darboux kernel ([`cd_kernel`]) and seeded
//! studies with CSV reports ([`experiments`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cd_kernel;
pub mod equilibrium;
pub mod experiments;
pub mod error;
pub mod gaudin;
pub mod interp;
pub mod models;
pub mod quadrature;
pub mod sampling;
pub mod spacing;

pub use error::{Error, Result};
pub use models::{Ensemble, Interaction, Interval, Model, Potential};
