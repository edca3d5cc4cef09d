//! Rank-2 logarithmic connections on an elliptic curve built as direct
//! images of rank-1 connections on a bielliptic genus-2 cover.
//!
//! The crate is organised bottom-up: curve arithmetic, quadrature and
//! period integrals, connection matrices and residues, monodromy by closed
//! forms and by ODE transport, bundle identification through elementary
//! transforms, and the structure of the monodromy group.

pub mod bundles;
pub mod connections;
pub mod curves;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod monodromy;
pub mod ode;
pub mod par;
pub mod paths;
pub mod periods;
pub mod quadrature;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
