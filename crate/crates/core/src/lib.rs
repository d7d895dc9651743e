mod dd;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod io;
pub mod local;
pub mod matrix;
pub mod oracle;
pub mod summation;
pub mod sweep;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
pub use matrix::{Observations, SampleMatrix, TrialPair, WeightVector};
