//! Sparse recovery by generalized alternating projection (GAP) and adaptive
//! iterative thresholding (AIT).
//!
//! The crate is generic over the scalar type through [`Real`]; `f32` and
//! `f64` are supported and the `*F64` aliases below cover the common case.
//!
//! Layout:
//! - [`operator`]: the sensing operator `A` with a stored Cholesky factor of `AAᵀ`.
//! - [`rip`]: exhaustive restricted-isometry constants for small matrices.
//! - [`solvers`]: threshold selection, shrinkage, GAP/AIT steps and the run loop.
//! - [`theory`]: convergence conditions, admissible step sizes and rate constants.
//! - [`imaging`]: patch-DCT image compressive sensing.
//! - [`synth`]: seeded generators for signals, matrices and noise.
//! - [`io`]: matrix, trace and PGM file formats.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod imaging;
pub mod io;
pub mod operator;
pub mod rip;
pub mod scalar;
pub mod solvers;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use operator::{ProblemInstance, SensingOperator};
pub use scalar::Real;
pub use solvers::{
    ait_step, estimate_noise, gap_step, run_solver, run_with, select_lambda, shrink, Algorithm,
    IterateTrace, IterationRecord, Shrinkage, SoftThreshold, SolverConfig, StopReason,
};
pub use theory::{TheoryInputs, TheoryReport};

pub type Vector<T> = nalgebra::DVector<T>;
pub type Matrix<T> = nalgebra::DMatrix<T>;

pub type SensingOperatorF64 = SensingOperator<f64>;
pub type ProblemInstanceF64 = ProblemInstance<f64>;
pub type SolverConfigF64 = SolverConfig<f64>;
pub type IterateTraceF64 = IterateTrace<f64>;
pub type TheoryInputsF64 = TheoryInputs<f64>;
pub type TheoryReportF64 = TheoryReport<f64>;
pub type VectorF64 = Vector<f64>;
pub type MatrixF64 = Matrix<f64>;

pub type SensingOperatorF32 = SensingOperator<f32>;
pub type SolverConfigF32 = SolverConfig<f32>;
