//! Constructive classifiers built from binary threshold units.
//!
//! A [`NetLinesNetwork`] has one hidden layer of ±1 units and a ±1 output.
//! [`train_netlines`] grows it one hidden unit at a time: each new unit learns
//! which training patterns the previous stage classified correctly, and the
//! output unit is retrained on the resulting internal representations until
//! the training error is small enough. Every unit is trained with the
//! annealed perceptron rule in [`minimerror`].
//!
//! Multi-class problems are handled in [`multiclass`] by chaining one-vs-rest
//! networks (and voting over several chains), and [`datagen`] provides the
//! synthetic benchmark generators.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod datagen;
pub mod error;
pub mod io;
pub mod linalg;
pub mod minimerror;
pub mod multiclass;
pub mod netlines;
pub mod rng;
pub mod standardize;

pub use data::{BinarySet, ClassId, Dataset, Pattern};
pub use error::{Error, Result};
pub use minimerror::{train_perceptron, MinimerrorConfig, PerceptronWeights, TrainReport};
pub use netlines::{train_netlines, Growth, GrowthConfig, NetLinesNetwork};
pub use standardize::Standardizer;
