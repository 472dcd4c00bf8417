//! Formal abductive explanations and locally-minimal probabilistic
//! explanations for decision trees, random forests and binarized neural
//! networks.

pub mod counting;
pub mod encoding;
pub mod error;
pub mod explain;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod sampling;
pub mod scalar;
pub mod seed;
pub mod space;

pub use error::{Error, Result};

/// Model with floating-point network parameters.
pub type FloatModel = model::Model<f64>;
/// Model with exact rational network parameters.
pub type ExactModel = model::Model<num_rational::BigRational>;
pub type Problem = model::ExplanationProblem<f64>;
pub type ExactProblem = model::ExplanationProblem<num_rational::BigRational>;
