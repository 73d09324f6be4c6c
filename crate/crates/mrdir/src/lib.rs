//! Bayesian Mendelian randomization with causal-direction model averaging.
//!
//! The crate fits a linear structural equation model with pleiotropy and
//! unobserved confounding to genotype-exposure-outcome data summarized by
//! sufficient statistics, computes the model evidence for both causal
//! directions with a nested sampler, and averages the causal-effect
//! posterior over the two direction hypotheses. Classical Wald-ratio and
//! inverse-variance-weighted estimates are provided as baselines, together
//! with a simulator for the supported experiment families and readers for
//! individual-level and GWAS summary data.

pub mod baselines;
pub mod cli;
pub mod data_io;
pub mod error;
pub mod inference;
pub mod nested;
pub mod priors;
pub mod sem;
pub mod simulate;

pub use error::{Error, Result};
