// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrutfError {
    #[error("signal of length {n} is too short for order {r}: need at least {} points", r + 2)]
    SignalTooShort { n: usize, r: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("gram block is not positive definite at pivot {pivot}; the boundary set is invalid")]
    NotPositiveDefinite { pivot: usize },

    #[error("noise scale estimate is zero; supply sigma explicitly")]
    DegenerateScale,

    #[error("path exceeded the event cap of {cap} events")]
    CapExceeded { cap: usize },

    #[error("segment [{start}, {end}) has fewer than {needed} points for a degree-{} fit", needed - 1)]
    UnderdeterminedSegment {
        start: usize,
        end: usize,
        needed: usize,
    },

    #[error("lambda {lambda} lies outside the recorded path range [{lower}, {upper}]")]
    LambdaOutOfRange { lambda: f64, lower: f64, upper: f64 },

    #[error("threshold bisection failed to bracket alpha = {alpha}")]
    BracketFailure { alpha: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, PrutfError>;
