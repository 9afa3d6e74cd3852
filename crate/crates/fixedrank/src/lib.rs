//! Fixed-rank matrix recovery from linear measurements.
//!
//! This crate solves `min_X R_r(X) + ||A X - b||^2`, where `R_r` is a
//! non-convex regularizer that vanishes exactly on matrices of rank at
//! most `r` and leaves the leading singular values unpenalized. Unlike
//! nuclear-norm formulations there is no shrinking bias on the signal,
//! and when the operator is close to an isometry a verifiable spectral
//! gap condition certifies that the computed stationary point is the
//! only one.
//!
//! The pieces:
//!
//! * [`spectral`]: dense SVD, spectra, rank-r truncation, vectorization;
//! * [`operator`]: measurement operators (dense, orthographic
//!   projection, difference-augmented) with adjoints and exact isometry
//!   defects;
//! * [`regularizer`]: evaluation of `R_r`, its proximal operator,
//!   subgradient representatives, and the optimality certificate;
//! * [`solvers`]: the adaptive proximal-gradient solver, the nuclear
//!   baseline, mu-bisection, stationarity diagnostics;
//! * [`problems`]: seeded synthetic instance generators;
//! * [`nrsfm`]: non-rigid structure-from-motion scenes and operators;
//! * [`sweep`]: batch experiment harnesses writing CSV tables;
//! * [`io`]: matrix CSV/JSON formats, problem bundles, trace logs.
//!
//! Every runnable capability has a corresponding example under
//! `examples/`; the `fixedrank` binary drives the same harnesses from
//! the command line.

pub mod error;
pub mod io;
pub mod nrsfm;
pub mod operator;
pub mod problems;
pub mod regularizer;
pub mod solvers;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use operator::{MeasurementOperator, ProblemInstance};
pub use regularizer::{
    certify, eval_g, eval_rr, ksupport_sq, prox_rr, s_star, subgrad_representative, Certificate,
    ProxResult,
};
pub use solvers::{
    bisect_mu, gist_solve, gist_solve_from, gradient_step, is_stationary, nuclear_prox,
    nuclear_solve, nuclear_solve_from, objective_nuclear, objective_rr, SolverConfig, SolverTrace,
};
pub use spectral::{
    numerical_rank, singular_values, svd, truncate_rank, Mat, Spectrum, SvdFactors, Vec64,
    RANK_REL_TOL,
};
