//! Active-function cross-entropy clustering (afCEC).
//!
//! Clusters are modelled by f-adapted Gaussians: a Gaussian in all but one
//! coordinate, times a 1-D Gaussian of the distance (along the remaining
//! coordinate) to a fitted curve. The curve comes from a family that is linear
//! in its coefficients, so each cluster is fitted by least squares, and the
//! cross-entropy clustering cost is minimized with a Lloyd-style loop that
//! also removes clusters that become too small.
//!
//! The [`acagmm`] module checks the parabola density of AcaGMM and its
//! change-of-variables correction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acagmm;
pub mod curves;
pub mod data;
pub mod density;
pub mod engine;
pub mod error;
pub mod numerics;
pub mod selection;

pub use curves::{builtin_family, FamilyKind, FunctionFamily};
pub use data::Dataset;
pub use engine::{fit, fit_restarts, AfcecModel, EngineConfig, Init};
pub use error::{Error, Result};
pub use selection::{score, LlMode, ModelScore, ParamConvention};
