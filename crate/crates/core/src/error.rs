// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `omega_rate == 0`: the eigenbasis of the observable is undefined.
    #[error("degenerate observable: omega_rate = 0 leaves the measurement axis undefined")]
    DegenerateObservable,

    /// The Theta chart divides by sin(alpha).
    #[error("chart singularity at sin(alpha) = 0; use the polar (theta, phi) chart instead")]
    ChartSingularity,

    #[error("degenerate branch: {0}")]
    DegenerateBranch(String),

    #[error("potential never reaches omega: g0 = {g0:e} < omega = {omega:e}")]
    NoCrossing { g0: f64, omega: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integration failed at t = {t:e}: {reason}")]
    Integration {
        reason: String,
        t: f64,
        /// Samples emitted before the failure.
        partial: Box<Trajectory>,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
