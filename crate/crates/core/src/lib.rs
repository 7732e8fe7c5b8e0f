//! Inertial proximal point methods for mixed variational inequalities, linearized
//! ADMM and its inertial variant, and a compressive principal component pursuit
//! solver built on them.
//!
//! Module map:
//!
//! - [`numkit`]: dense matrices, Jacobi SVD, orthonormal transforms, measurement operators, seeded RNG
//! - [`prox`]: shrinkage and projection operators
//! - [`vi_core`]: the general inertial proximal point engine and its rate diagnostics
//! - [`splitting`]: two-block separable problems, ADMM / linearized ADMM / inertial linearized ADMM
//! - [`cpcp`]: compressive principal component pursuit instances and solvers

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cpcp;
pub mod error;
pub mod numkit;
pub mod prox;
pub mod splitting;
pub mod vi_core;

pub use error::{Error, Result};
