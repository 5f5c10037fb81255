//! Dense f64 array math, a tape-based reverse-mode differentiation engine for
//! the layer set used by the sensor captioning models, an Adam optimizer,
//! seeded Gaussian sampling, and a finite-difference gradient checker.
//!
//! Everything here is single-threaded and deterministic: the same seed yields
//! the same bits on every run.

pub mod adam;
pub mod array;
pub mod gradcheck;
pub mod param;
pub mod rng;
pub mod tape;

pub use adam::{adam_step, AdamConfig};
pub use array::Array;
pub use gradcheck::{grad_check, ClosureMap, ScalarMap};
pub use param::{ParamSet, Parameter};
pub use rng::{gaussian_sample, Rng};
pub use tape::{softmax, Tape, Var};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("shape {shape:?} does not match data length {len}")]
    ShapeDataMismatch { shape: Vec<usize>, len: usize },
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },
    #[error("softmax over an empty axis")]
    EmptyAxis,
    #[error("parameter `{0}` is not trainable")]
    NotTrainable(String),
    #[error("shape mismatch in {context}: {left:?} vs {right:?}")]
    ShapeMismatch {
        context: String,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("negative variance {0}")]
    NegativeVariance(f64),
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
}

pub type Result<T> = std::result::Result<T, NumericsError>;
