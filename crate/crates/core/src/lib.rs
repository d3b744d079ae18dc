//! Hierarchical Bayesian assessment of whether a system has a latent trait,
//! from expert credences about observable indicators, under several
//! theoretical stances.
//!
//! - [`levels`], [`model`]: ordinal evidence levels, stance and catalog
//!   files, and compiled Beta-parameterized trees.
//! - [`inference`]: exact, enumerated and Gibbs-sampled posteriors.
//! - [`evidence`]: expert surveys, panels and random indicator draws.
//! - [`assessment`]: repeated runs per stance and pooling across stances.
//! - [`sensitivity`]: prior sweeps, ordinal stability, coarse-grained
//!   variants.
//! - [`export`], [`project`]: CSV output and the command-line operations.

pub mod assessment;
pub mod bundled;
pub mod evidence;
pub mod export;
pub mod inference;
pub mod levels;
pub mod model;
pub mod project;
pub mod seed;
pub mod sensitivity;
pub mod stats;
