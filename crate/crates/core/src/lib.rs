//! Supervised classification of functional data through extremality.
//!
//! Curves sampled on a common grid are mapped to a two-dimensional plane,
//! either through the modified epigraph/hypograph indexes against each
//! group (the EE-plot) or through a functional depth against each group
//! (the DD-plot). Standard two-dimensional classifiers then operate on
//! those coordinates.
//!
//! The crate is organised bottom-up:
//!
//! * [`fdata`]: grids, datasets, CSV persistence and splitting.
//! * [`extremality`]: EI, HI, MEI and MHI.
//! * [`depth`]: Fraiman–Muniz, h-mode and random-projection depths.
//! * [`synth`]: seeded Gaussian curve generator and the six experiment presets.
//! * [`embed`]: EE/DD coordinates, point CSV and SVG scatter output.
//! * [`classify`]: LDA, QDA, kNN, RBF-SVM and random forest.
//! * [`eval`]: stratified k-fold cross-validation and the suite runner.

pub mod classify;
pub mod depth;
pub mod embed;
mod error;
pub mod eval;
pub mod extremality;
pub mod fdata;
mod linalg;
pub mod rng;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
