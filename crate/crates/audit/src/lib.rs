//! Robustness auditing of feature-attribution explanations for binary
//! tabular classifiers.
//!
//! The library trains a small family of classifiers, explains their test
//! predictions with a local linear surrogate (LIME-style) and a Shapley
//! estimator, and audits the resulting feature rankings by quantifying how
//! causally necessary and sufficient each ranked feature is, via forward
//! counterfactual perturbation. The [`pipeline`] module orchestrates the
//! full audit matrix and emits reports; everything below it is usable on
//! its own.

pub mod counterfactual;
pub mod dataset;
pub mod error;
pub mod explain;
mod linalg;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod robustness;
pub mod scoring;
pub mod testutil;

pub use error::{AuditError, Result};
