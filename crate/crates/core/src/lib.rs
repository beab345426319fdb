//! Adaptive estimation of a frontier (boundary) function from data with
//! one-sided regression errors.
//!
//! The observations follow `Y_j = f(j/n) + eps_j` with `eps_j <= 0`. The
//! crate provides
//!
//! - [`lp`]: a small dense simplex solver for linear programs in free
//!   variables,
//! - [`local_poly`]: the local polynomial envelope fit that lies above the
//!   data and minimises the sum of its values over the window,
//! - [`tail`]: location invariant estimation of the error sharpness index
//!   (negative Hill) and of the logarithmic second-order exponent,
//! - [`adapt`]: bandwidth grids, critical values and the Lepski selector
//!   producing the fully data-driven estimate,
//! - [`quad`]: adaptive Gauss-Kronrod quadrature used by the `L_q` critical
//!   values.
//!
//! Everything here is pure computation on `alloc` collections; IO and
//! simulation live in the companion `frontier-adapt` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod adapt;
pub mod error;
pub mod local_poly;
pub mod lp;
pub mod quad;
pub mod sample;
pub mod tail;

pub use adapt::{
    adaptive_estimate, adaptive_estimate_with, build_grid, critical_values_lq, critical_values_pointwise, iu_n,
    lepski_select, AdaptOptions, AdaptiveOutput, BandwidthGrid, CriticalValues, CvKind, Diagnostics, EstimatorConfig,
    LepskiNorm, Loss, PointEstimate, Target,
};
pub use error::{Error, Result};
pub use local_poly::{estimate_at, estimate_curve, fit_local, PolyFit};
pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus};
pub use sample::Sample;
pub use tail::{a_hat, estimate_b, estimate_tail, neg_hill_inv_alpha, TailEstimate, TailFunction};
