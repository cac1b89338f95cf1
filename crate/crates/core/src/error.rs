// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid precondition: {0}")]
    Precondition(String),
    #[error("step size too large: {0}")]
    StepSize(String),
    #[error("safety assertion failed: {0}")]
    Safety(String),
}

pub type Result<T> = std::result::Result<T, Error>;
