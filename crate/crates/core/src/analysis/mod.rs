//! Analytic bias and variance predictions, and the alignment decomposition
//! of a joint dimensionality.

mod alignment;
mod moments;

pub use alignment::{alignment_report, AlignmentReport, ManifoldShare};
pub use moments::{estimate_kernel_moments, predict_bias_variance, BiasTarget, KernelMoments};
