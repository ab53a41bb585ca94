// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the operator calculus.
#[derive(Debug, Error)]
pub enum Error {
    /// A grid or window is too small for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Fiber or matrix shapes do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A scalar argument lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A block `lambda - sigma(eta)` is numerically singular.
    #[error("resolvent error at frequency {frequency:?}: smallest singular value {smallest_singular_value:e} below {threshold:e}")]
    Resolvent {
        frequency: Vec<i64>,
        smallest_singular_value: f64,
        threshold: f64,
    },

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A black-box operator violated its contract (e.g. nonlinearity).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Operation not defined for this kind of input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The index of a truncated multiplier is not well defined.
    #[error("index refused: {0}")]
    IndexRefused(String),

    /// Unknown symbol family or invalid family parameters.
    #[error("family error: {0}")]
    Family(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
