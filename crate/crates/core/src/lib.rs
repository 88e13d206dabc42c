//! Temporal probability smoothing for video segmentation.
//!
//! Per-frame foreground probability planes from any segmentation model are
//! stabilized by warping the previous refined plane along dense optical flow
//! and blending it with the current prediction. The blend weight is derived
//! per pixel from the entropy of the current prediction and from
//! forward-backward flow consistency.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and
//! the command-line tool live in the `tpsmooth` companion crate.
//!
//! Module map:
//!
//! - [`grid`]: dense planes ([`ScalarField`], [`Mask`], [`FlowField`],
//!   [`GrayFrame`]) and per-pixel transforms.
//! - [`flow`]: Farnebäck dense flow, backward warping, cycle residual and
//!   motion uncertainty.
//! - [`smoother`]: entropy, blend coefficient, fusion and the sequential
//!   recursion.
//! - [`metrics`]: temporal IoU, warped IoU, boundary F, dropout, IQR robust
//!   normalization and the unified stability score.
//! - [`stats`]: paired Wilcoxon signed-rank test.
//! - [`synth`]: seeded synthetic sequences with ground truth and controlled
//!   degradations.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod flow;
pub mod grid;
pub mod metrics;
mod numeric;
pub mod smoother;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{sigmoid, sigmoid_map, threshold_mask, FlowField, GrayFrame, Mask, ScalarField};
