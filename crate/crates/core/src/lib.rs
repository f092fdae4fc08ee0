// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Quasilinear selective-measurement dynamics of a two-level system.
//!
//! The state is a Bloch vector `n` (or density matrix `rho`). An observable
//! `Omega = omega . sigma / 2` is measured by a device whose generator
//! `G = lambda g(t) g_hat . sigma / 2` drives the state towards the
//! eigenstate selected by the Born-sampled outcome `lambda`:
//!
//! ```text
//! dn/dt = omega x n + lambda g(t) (g_hat - n (g_hat . n))
//! ```
//!
//! All generator magnitudes are stored as angular rates (rad/s), i.e. with
//! the reduced Planck constant divided out.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod complex2;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod measurement;
pub mod ode;
pub mod potentials;
pub mod quadrature;
pub mod scenario;
pub mod state;
pub mod sterngerlach;
pub mod vec3;

pub use complex2::Complex2x2;
pub use dynamics::{DeviceConfig, DriveDirection, IntegratorConfig, Trajectory, TrajectorySample};
pub use error::{Error, Result};
pub use geometry::{CasimirPair, ChartBranch, DeviceGeometry, OutcomeRegion};
pub use potentials::PotentialProfile;
pub use state::{BlochVector, Branch, DensityMatrix2, ObservableSpec, Projector2};
