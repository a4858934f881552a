//! Scrambled base-2 digital nets and the variance behaviour of their
//! integration estimators.
//!
//! The crate is organised bottom-up:
//!
//! * [`net_gen`] builds Sobol' generator matrices and enumerates net points.
//! * [`scramble`] randomizes nets (Owen nested uniform, linear matrix + shift).
//! * [`net_verify`] certifies the (t,m,s)-net property by exhaustive counting.
//! * [`integrands`] provides test integrands with kinks, their weak mixed
//!   derivatives, `L^p` norms, and predicted variance exponents.
//! * [`variation`] evaluates alternating sums, Hölder and superadditivity
//!   inequalities, and lower bounds for the generalized Vitali variation.
//! * [`experiment`] runs randomized QMC ensembles and fits convergence rates.
//!
//! The guide under `book/` walks through each of these with runnable examples.

pub mod error;
pub mod experiment;
pub mod integrands;
pub mod net_gen;
pub mod net_verify;
pub mod prf;
pub mod quadrature;
pub mod scramble;
pub mod variation;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, ErrorClass, Result};
pub use net_gen::{
    build_sobol_matrices, generate_net, generate_point, to_unit_cube, DigitalPointSet,
    GeneratorMatrixSet, Offset, Ordering,
};
pub use scramble::{ScrambleKind, ScrambleSpec};
