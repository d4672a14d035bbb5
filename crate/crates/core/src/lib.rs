//! Symmetric multigrid preconditioning for the Stokes equations on a MAC grid.
//!
//! The finest-level system `L x = b` is solved with SQMR, preconditioned by a
//! V- or W-cycle on the penalized operator `L̃`. Each level smooths a band of
//! unknowns next to the boundary with Vanka blocks and the interior with
//! distributive Gauss-Seidel, arranged so the whole cycle is a symmetric map.

pub mod cli;
pub mod config;
pub mod discretization;
pub mod domain;
pub mod error;
pub mod io;
pub mod krylov;
pub mod linalg;
pub mod multigrid;
pub mod scenarios;
pub mod smoothers;
pub mod transfer;
pub mod verify;

pub use error::{Result, StokesError};
