// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change point detection for piecewise polynomial signals through the
//! dual solution path of trend filtering.
//!
//! The path is traced event by event ([`path`]), halted by a Gaussian
//! bridge excursion test ([`stopping`]) and turned into a segmentation with
//! an optional staircase correction ([`detect`]). [`sim`] reproduces the
//! simulation protocol used to evaluate the method.
//!
//! ```
//! use prutf::{detect_mprutf, NoiseScale, StoppingConfig};
//!
//! let y: Vec<f64> = (0..80).map(|i| if i < 40 { 0.0 } else { 3.0 }).collect();
//! let cfg = StoppingConfig { sigma: NoiseScale::Known(0.5), ..Default::default() };
//! let res = detect_mprutf(&y, 0, cfg).unwrap();
//! assert_eq!(res.change_points, vec![40]);
//! ```

#![forbid(unsafe_code)]

pub mod detect;
mod error;
pub mod linop;
pub mod path;
mod scalar;
pub mod sim;
pub mod stopping;

pub use detect::{
    detect, detect_mprutf, detect_prutf, is_staircase, pattern_diagnostics, segment_polynomial_fit,
    to_primal_changepoints, BlockDiagnostic, DetectConfig, DetectionResult, Method, StopReason,
};
pub use error::{PrutfError, Result};
pub use linop::{AugmentedBoundary, BlockedGram, ChangeRun, DifferenceOperator};
pub use path::{EventKind, PathConfig, PathEvent, PathSolver, PathState, SolutionPath};
pub use scalar::{pairwise_mean, pairwise_sum, Scalar};
pub use stopping::{estimate_sigma_mad, excursion_prob, should_stop, threshold_x_alpha, NoiseScale, StoppingConfig};

pub type PathSolverF64 = PathSolver<f64>;
pub type PathSolverF32 = PathSolver<f32>;
pub type DetectionF64 = DetectionResult<f64>;
pub type DetectionF32 = DetectionResult<f32>;
pub type SolutionPathF64 = SolutionPath<f64>;
